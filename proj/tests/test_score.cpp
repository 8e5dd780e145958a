#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isdq/generators.hpp"
#include "isdq/score.hpp"
#include "oracles.hpp"

using namespace isdq;
using namespace isdq::score;

namespace
{
traj::ModeTable table(int n, std::vector<std::vector<int>> rows)
{
  traj::ModeTable t;
  t.n = n;
  t.m = static_cast<int>(rows.size());
  for (int i = 0; i < n; ++i) t.agent_ids.push_back(i);
  for (const auto& r : rows) t.indices.insert(t.indices.end(), r.begin(), r.end());
  t.mode_counts.assign(static_cast<std::size_t>(n), 1);
  t.outliers.assign(static_cast<std::size_t>(n), 0);
  return t;
}

traj::ModeTable random_table(std::mt19937_64& rng, int m, int n, int max_k)
{
  std::uniform_int_distribution<int> k(1, max_k);
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(m));
  for (auto& r : rows)
    for (int i = 0; i < n; ++i) r.push_back(k(rng));
  return table(n, rows);
}

scene::Task task(int id, Vec2 s, Vec2 g)
{
  scene::Task t;
  t.id = id;
  t.start = s;
  t.goal = g;
  return t;
}

scene::Scenario open_world(std::vector<scene::Task> tasks, Rect bounds)
{
  scene::Scenario s;
  s.name = "open";
  s.config = {"open", {}, bounds};
  s.tasks = std::move(tasks);
  return s;
}

IsConfig small_config(int m)
{
  IsConfig c;
  c.space.m = m;
  return c;
}
}  // namespace

TEST(Probabilities, Fixtures)
{
  const auto t = table(2, {{1, 1}, {1, 2}, {2, 1}, {1, 1}});
  EXPECT_DOUBLE_EQ(joint_prob(t, std::vector<int>{1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(joint_prob(t, std::vector<int>{2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(joint_prob(t, std::vector<int>{1, 1}) + joint_prob(t, std::vector<int>{1, 2}) +
                       joint_prob(t, std::vector<int>{2, 1}),
                   1.0);
  EXPECT_DOUBLE_EQ(marginal_prob(t, 0, 1), 0.75);
  EXPECT_DOUBLE_EQ(marginal_prob_others(t, 0, std::vector<int>{1}), 0.75);
  const auto one = table(1, {{1}, {2}, {2}});
  EXPECT_DOUBLE_EQ(marginal_prob(one, 0, 2), joint_prob(one, std::vector<int>{2}));
}

TEST(InteractionScore, Fixtures)
{
  EXPECT_EQ(interaction_score(table(2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}}), 0), 0.0);
  EXPECT_DOUBLE_EQ(interaction_score(table(2, {{1, 1}, {1, 1}, {2, 2}, {2, 2}}), 0), 1.0);
  EXPECT_EQ(interaction_score(table(1, {{1}, {2}, {3}}), 0), 0.0);
}

// (a) plug-in estimate equals the entropy-identity oracle.
TEST(InteractionScore, MatchesBruteForceMutualInformation)
{
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 2000; ++trial)
  {
    const int m = std::uniform_int_distribution<int>(1, 50)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const int k = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto t = random_table(rng, m, n, k);
    for (int i = 0; i < n; ++i)
    {
      const long double oracle = oracle::mutual_information(t, i);
      const double got = interaction_score(t, i);
      // Relative 1e-12; values that cancel to zero are compared absolutely.
      EXPECT_LE(std::abs(got - static_cast<double>(oracle)), 1e-12 * std::max<double>(std::abs(got), 1.0))
          << "trial " << trial << " agent " << i;
    }
  }
}

// (b) two-agent symmetry, exact.
TEST(InteractionScore, TwoAgentSymmetry)
{
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial)
  {
    const auto t = random_table(rng, std::uniform_int_distribution<int>(1, 60)(rng), 2, 5);
    EXPECT_EQ(interaction_score(t, 0), interaction_score(t, 1));
  }
}

// (c) appending an agent column never lowers IS. Equal mutual informations
// reached through different count tables may differ in the last bits, so the
// comparison carries the 1e-12 relative precision of (a).
TEST(InteractionScore, MonotoneUnderAppendedColumn)
{
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial)
  {
    const int m = std::uniform_int_distribution<int>(1, 50)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto t = random_table(rng, m, n, 4);
    auto wider = t;
    wider.n = n + 1;
    wider.indices.clear();
    std::uniform_int_distribution<int> k(1, 4);
    for (int j = 0; j < m; ++j)
    {
      for (int i = 0; i < n; ++i) wider.indices.push_back(t.at(j, i));
      wider.indices.push_back(k(rng));
    }
    for (int i = 0; i < n; ++i)
    {
      const double before = interaction_score(t, i);
      EXPECT_GE(interaction_score(wider, i), before - 1e-12 * std::max(before, 1.0)) << trial;
    }
  }
}

// (d) 0 <= IS <= min(H(K_i), H(K_-i)) <= log2 c_i.
TEST(InteractionScore, Bounds)
{
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial)
  {
    const int m = std::uniform_int_distribution<int>(1, 50)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const int c = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto t = random_table(rng, m, n, c);
    for (int i = 0; i < n; ++i)
    {
      const double v = interaction_score(t, i);
      const oracle::Entropies e = oracle::entropies(t, i);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, static_cast<double>(std::min(e.x, e.rest)) + 1e-12);
      EXPECT_LE(v, std::log2(c) + 1e-12);
    }
  }
}

TEST(IsScenario, DegenerateAndIndependent)
{
  const auto lone = open_world({task(0, {0, 0}, {10, 0})}, {-1, -3, 11, 3});
  const auto r = is_scenario(lone, small_config(20));
  ASSERT_EQ(r.per_agent.size(), 1u);
  EXPECT_EQ(r.per_agent[0].is_bits, 0.0);

  const auto far = open_world({task(0, {0, 0}, {10, 0}), task(1, {0, 40}, {10, 40})}, {-1, -3, 11, 43});
  const auto f = is_scenario(far, small_config(100));
  for (const auto& a : f.per_agent) EXPECT_LT(a.is_bits, 0.05);
}

TEST(IsScenario, ThreadCountDoesNotChangeReport)
{
  const auto s = scene::gen_exsd("concentric", 2, 1).front();
  auto one = small_config(8), many = small_config(8);
  many.threads = 3;
  EXPECT_EQ(to_json(is_scenario(s, one), one).dump(), to_json(is_scenario(s, many), one).dump());
}

TEST(IsDomain, Pooling)
{
  IsReport a{"a", "x", traj::ClusterMethod::percentile, {{0, 1.0, 1, 0, true}, {1, 3.0, 1, 0, true}}, 2.0, 1.0};
  IsReport b{"b", "x", traj::ClusterMethod::percentile, {{0, 5.0, 1, 0, false}}, 5.0, 0.0};
  const std::vector<IsReport> single{a};
  EXPECT_DOUBLE_EQ(is_domain(single).mean, a.mean);
  const std::vector<IsReport> both{a, b}, doubled{a, b, a, b};
  EXPECT_DOUBLE_EQ(is_domain(both).mean, 3.0);
  EXPECT_DOUBLE_EQ(is_domain(doubled).mean, is_domain(both).mean);
  EXPECT_EQ(is_domain(both).agents, 3u);
  EXPECT_DOUBLE_EQ(is_domain(both, true).mean, 2.0);
  EXPECT_THROW(is_domain(std::vector<IsReport>{}), std::invalid_argument);
}

TEST(Baseline, FarApartIsZero)
{
  const auto s = open_world({task(0, {0, 0}, {10, 0}), task(1, {0, 20}, {10, 20})}, {-1, -2, 11, 22});
  const auto r = baseline_bl(s, {});
  EXPECT_EQ(r.counts, (std::vector<int>{0, 0}));
}

TEST(Baseline, ParallelPairGrowsLinearly)
{
  // Same schedule, 1 m apart: every waypoint has a partner at the same time.
  std::vector<int> totals;
  for (double len : {5.0, 10.0, 20.0})
  {
    const auto s = open_world({task(0, {0.25, 0.25}, {len + 0.25, 0.25}), task(1, {0.25, 1.25}, {len + 0.25, 1.25})},
                              {0, -1, len + 1, 3});
    const auto r = baseline_bl(s, {});
    const int wps = static_cast<int>(std::lround(len / nav::kDefaultCellSize)) + 1;
    EXPECT_EQ(r.counts[0], wps);
    EXPECT_EQ(r.counts[1], wps);
    totals.push_back(r.counts[0]);
  }
  EXPECT_EQ(totals[1] - totals[0], 10);
  EXPECT_EQ(totals[2] - totals[1], 20);
}

TEST(Baseline, ThresholdsValidated)
{
  const auto s = open_world({task(0, {0, 0}, {1, 0})}, {-1, -1, 2, 1});
  EXPECT_THROW(baseline_bl(s, {0.0, 1.0}), std::invalid_argument);
}

TEST(Reports, JsonFields)
{
  const auto s = open_world({task(0, {0, 0}, {6, 0}), task(1, {6, 0}, {0, 0})}, {-1, -3, 7, 3});
  auto cfg = small_config(10);
  cfg.cluster.method = traj::ClusterMethod::dbscan;
  const auto j = to_json(is_scenario(s, cfg), cfg);
  EXPECT_EQ(j["method"], "is");
  EXPECT_EQ(j["config"]["cluster"], "dbscan");
  EXPECT_TRUE(j["per_agent"][0].contains("outliers"));
  const auto b = to_json(baseline_bl(s, {}), {}, nav::kDefaultCellSize);
  EXPECT_TRUE(b["per_agent"][0]["bl_count"].is_number_integer());
}
