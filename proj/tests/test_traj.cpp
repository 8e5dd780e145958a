#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

#include "isdq/traj.hpp"
#include "oracles.hpp"

using namespace isdq;
using namespace isdq::traj;

namespace
{
/// Textbook DBSCAN by pairwise distances, with the nearest-core border rule.
std::vector<int> dbscan_oracle(const std::vector<double>& v, double eps, int min_samples)
{
  const std::size_t m = v.size();
  std::vector<bool> core(m);
  for (std::size_t i = 0; i < m; ++i)
  {
    int nb = 0;
    for (std::size_t j = 0; j < m; ++j) nb += std::abs(v[i] - v[j]) <= eps ? 1 : 0;
    core[i] = nb >= min_samples;
  }
  std::vector<int> comp(m, 0);
  int k = 0;
  for (std::size_t i = 0; i < m; ++i)
  {
    if (!core[i] || comp[i]) continue;
    ++k;
    std::vector<std::size_t> stack{i};
    comp[i] = k;
    while (!stack.empty())
    {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < m; ++q)
        if (core[q] && !comp[q] && std::abs(v[p] - v[q]) <= eps)
        {
          comp[q] = k;
          stack.push_back(q);
        }
    }
  }
  // Number components by ascending minimum core value.
  std::vector<double> lo(static_cast<std::size_t>(k) + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i)
    if (core[i]) lo[static_cast<std::size_t>(comp[i])] = std::min(lo[static_cast<std::size_t>(comp[i])], v[i]);
  std::vector<int> rank(static_cast<std::size_t>(k) + 1, 0);
  for (int a = 1; a <= k; ++a)
    for (int b = 1; b <= k; ++b) rank[static_cast<std::size_t>(a)] += lo[static_cast<std::size_t>(b)] <= lo[static_cast<std::size_t>(a)] ? 1 : 0;
  std::vector<int> out(m, 0);
  for (std::size_t i = 0; i < m; ++i)
  {
    if (core[i])
    {
      out[i] = rank[static_cast<std::size_t>(comp[i])];
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < m; ++q)
    {
      if (!core[q]) continue;
      const double d = std::abs(v[i] - v[q]);
      const int lab = rank[static_cast<std::size_t>(comp[q])];
      if (d <= eps && (d < best || (d == best && lab < out[i])))
      {
        best = d;
        out[i] = lab;
      }
    }
  }
  return out;
}

std::vector<Vec2> random_path(std::mt19937_64& rng, std::size_t len)
{
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<Vec2> p;
  for (std::size_t k = 0; k < len; ++k) p.push_back({u(rng), u(rng)});
  return p;
}
}  // namespace

TEST(Dtw, Fixtures)
{
  const std::vector<Vec2> a{{0, 0}, {1, 0}, {2, 0}}, b{{0, 0}, {2, 0}};
  EXPECT_EQ(dtw(a, a), 0.0);
  EXPECT_DOUBLE_EQ(dtw(a, b), 1.0);
  EXPECT_THROW(dtw(a, std::vector<Vec2>{}), std::invalid_argument);
}

TEST(Dtw, MatchesExhaustiveWarpsAndIsSymmetric)
{
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (int trial = 0; trial < 300; ++trial)
  {
    const auto a = random_path(rng, len(rng)), b = random_path(rng, len(rng));
    const double oracle = oracle::warp(a, b);
    EXPECT_NEAR(dtw(a, b), oracle, 1e-12 * std::max(1.0, oracle));
    EXPECT_EQ(dtw(a, b), dtw(b, a));
  }
}

TEST(ModeCount, Cases)
{
  EXPECT_EQ(mode_count(std::vector<double>{0, 0, 0}, 0.5), 1);
  EXPECT_EQ(mode_count(std::vector<double>{2, 4, 6}, 0.5), 2);
  EXPECT_EQ(mode_count(std::vector<double>{100, 200, 300}, 0.5), 3);
  // Half-way cases round to even.
  EXPECT_EQ(mode_count(std::vector<double>{5, 5, 5, 5, 5}, 0.5), 2);
  EXPECT_EQ(mode_count(std::vector<double>{7, 7, 7, 7, 7}, 0.5), 4);
  EXPECT_THROW(mode_count(std::vector<double>{1}, 0.0), std::invalid_argument);
}

TEST(Percentile, Fixtures)
{
  EXPECT_EQ(percentile_cluster(std::vector<double>{3, 1, 2}, 1), (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(percentile_cluster(std::vector<double>{1, 2, 3, 4, 5, 6}, 3), (std::vector<int>{1, 1, 2, 2, 3, 3}));
  EXPECT_EQ(percentile_cluster(std::vector<double>{6, 5, 4, 3, 2, 1}, 3), (std::vector<int>{3, 3, 2, 2, 1, 1}));
  EXPECT_EQ(percentile_cluster(std::vector<double>{1, 1, 1, 1}, 2), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_THROW(percentile_cluster(std::vector<double>{1, 2}, 3), std::out_of_range);
}

TEST(Percentile, EqualCountBins)
{
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> msize(1, 120);
  std::uniform_real_distribution<double> u(0, 50);
  for (int trial = 0; trial < 500; ++trial)
  {
    const int m = msize(rng);
    std::vector<double> v(static_cast<std::size_t>(m));
    for (auto& x : v) x = std::floor(u(rng));  // ties on purpose
    const int c = std::uniform_int_distribution<int>(1, m)(rng);
    const auto idx = percentile_cluster(v, c);
    std::vector<int> count(static_cast<std::size_t>(c) + 1, 0);
    for (int k : idx)
    {
      ASSERT_GE(k, 1);
      ASSERT_LE(k, c);
      ++count[static_cast<std::size_t>(k)];
    }
    const auto [lo, hi] = std::minmax_element(count.begin() + 1, count.end());
    EXPECT_LE(*hi - *lo, 1);
    // Bins respect value order.
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)])
          EXPECT_LE(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  }
}

TEST(Dbscan, Fixtures)
{
  EXPECT_EQ(dbscan_cluster_1d(std::vector<double>{1, 2, 3, 4, 5}, 10, 5), (std::vector<int>(5, 1)));
  EXPECT_EQ(dbscan_cluster_1d(std::vector<double>{100, 0, 100.1, 0.1, 0.2}, 1, 2), (std::vector<int>{2, 1, 2, 1, 1}));
  EXPECT_EQ(dbscan_cluster_1d(std::vector<double>{0, 0.1, 50}, 1, 2), (std::vector<int>{1, 1, 0}));
  EXPECT_THROW(dbscan_cluster_1d(std::vector<double>{1}, 0, 2), std::invalid_argument);
  EXPECT_THROW(dbscan_cluster_1d(std::vector<double>{1}, 1, 0), std::invalid_argument);
}

TEST(Dbscan, MatchesPairwiseOracle)
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 60);
  for (int trial = 0; trial < 300; ++trial)
  {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    std::vector<double> v(m);
    for (auto& x : v) x = std::round(u(rng) * 2) / 2;
    const double eps = std::uniform_int_distribution<int>(1, 8)(rng) * 0.5;
    const int ms = std::uniform_int_distribution<int>(1, 6)(rng);
    EXPECT_EQ(dbscan_cluster_1d(v, eps, ms), dbscan_oracle(v, eps, ms)) << "trial " << trial;
  }
}

TEST(ModeTable, HandBuiltSweep)
{
  // Solo: straight line. Runs j=1..4 shift agent 0 by 0, 3, 1, 2 and agent 1
  // by 2, 2, 0, 4 (lateral metres, all samples).
  auto line = [](int agent, double dy) {
    sim::Trajectory t{agent, {}, true};
    for (int k = 0; k < 5; ++k) t.samples.push_back({0.1 * k, {double(k), dy}});
    return t;
  };
  const std::vector<sim::Trajectory> solos{line(0, 0), line(1, 0)};
  const double s0[4] = {0, 3, 1, 2}, s1[4] = {2, 2, 0, 4};
  std::vector<sim::SimResult> sweep(4);
  for (int j = 0; j < 4; ++j)
  {
    sweep[static_cast<std::size_t>(j)].param_index = j + 1;
    sweep[static_cast<std::size_t>(j)].trajectories = {line(0, s0[j]), line(1, s1[j])};
  }
  // DTW = 5 * shift; means 7.5 and 10 give c = 4 (the second clamped to m).
  const auto t = build_mode_table(sweep, solos, {});
  ASSERT_EQ(t.m, 4);
  ASSERT_EQ(t.n, 2);
  EXPECT_EQ(t.mode_counts, (std::vector<int>{4, 4}));
  const int expect0[4] = {1, 4, 2, 3}, expect1[4] = {2, 3, 1, 4};
  for (int j = 0; j < 4; ++j)
  {
    EXPECT_EQ(t.at(j, 0), expect0[j]);
    EXPECT_EQ(t.at(j, 1), expect1[j]);
  }
  const auto single = build_mode_table(std::vector<DtwRow>{{3, {1.0, 2.0}}}, {});
  EXPECT_EQ(single.n, 1);
  EXPECT_EQ(single.agent_ids, (std::vector<int>{3}));
}

TEST(ModeTable, CsvRoundTrip)
{
  const std::vector<DtwRow> rows{{0, {1, 40, 41, 42, 43, 44, 90}}, {4, {5, 6, 7, 8, 9, 10, 11}}};
  ClusterConfig db;
  db.method = ClusterMethod::dbscan;
  db.min_samples = 3;
  for (const ClusterConfig& cfg : {ClusterConfig{}, db})
  {
    const auto t = build_mode_table(rows, cfg);
    std::stringstream ss;
    write_mode_table_csv(ss, t);
    EXPECT_EQ(read_mode_table_csv(ss), t);
  }
}
