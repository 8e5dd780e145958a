#pragma once

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <numeric>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isdq/geometry.hpp"
#include "isdq/sim.hpp"

namespace isdq::traj
{

inline constexpr double kDefaultAlpha = 0.5;
inline constexpr double kDefaultDbscanEps = 10.0;
inline constexpr int kDefaultDbscanMinSamples = 5;

/// DTW values of one agent's m interactive runs against its solo run.
struct DtwRow
{
  int agent_id = 0;
  std::vector<double> values;
};

enum class ClusterMethod
{
  percentile,
  dbscan,
};

inline std::string to_string(ClusterMethod m) { return m == ClusterMethod::percentile ? "percentile" : "dbscan"; }

inline ClusterMethod parse_cluster_method(const std::string& s)
{
  if (s == "percentile") return ClusterMethod::percentile;
  if (s == "dbscan") return ClusterMethod::dbscan;
  throw std::invalid_argument("unknown cluster method: " + s);
}

struct ClusterConfig
{
  ClusterMethod method = ClusterMethod::percentile;
  double alpha = kDefaultAlpha;
  double eps = kDefaultDbscanEps;
  int min_samples = kDefaultDbscanMinSamples;
};

/// m x n mode indices; row j is simulation j, column i is agent i.
struct ModeTable
{
  int m = 0;
  int n = 0;
  std::vector<int> agent_ids;
  std::vector<int> indices;
  std::vector<int> mode_counts;
  /// DBSCAN outliers per agent (label 0); zero for percentile tables.
  std::vector<int> outliers;

  int at(int j, int i) const { return indices[static_cast<std::size_t>(j) * n + i]; }
  int& at(int j, int i) { return indices[static_cast<std::size_t>(j) * n + i]; }
  bool operator==(const ModeTable&) const = default;
};

/// Sum-cost DTW with Euclidean point cost over the full DP table.
inline double dtw(std::span<const Vec2> a, std::span<const Vec2> b)
{
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw: empty sequence");
  const std::size_t nb = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(nb + 1, inf), cur(nb + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i)
  {
    cur[0] = inf;
    const Vec2& p = a[i - 1];
    for (std::size_t j = 1; j <= nb; ++j)
    {
      const double c = distance(p, b[j - 1]);
      cur[j] = c + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[nb];
}

inline std::vector<Vec2> positions(const sim::Trajectory& t)
{
  std::vector<Vec2> out;
  out.reserve(t.samples.size());
  for (const auto& s : t.samples) out.push_back(s.position);
  return out;
}

inline double dtw(const sim::Trajectory& a, const sim::Trajectory& b) { return dtw(positions(a), positions(b)); }

/// c = clamp(round_half_even(alpha * mean), 1, m).
inline int mode_count(std::span<const double> values, double alpha)
{
  if (!(alpha > 0.0)) throw std::invalid_argument("mode_count: alpha must be > 0");
  if (values.empty()) throw std::invalid_argument("mode_count: empty row");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const int m = static_cast<int>(values.size());
  const double x = alpha * mean;
  if (!(x < static_cast<double>(m))) return m;
  const int prev = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x);
  std::fesetround(prev);
  return std::clamp(static_cast<int>(r), 1, m);
}

/// Equal-count binning by stable ascending rank.
inline std::vector<int> percentile_cluster(std::span<const double> values, int c)
{
  const int m = static_cast<int>(values.size());
  if (c < 1 || c > std::max(m, 1)) throw std::out_of_range("percentile_cluster: c must lie in 1..m");
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](int l, int r) { return values[l] < values[r]; });
  std::vector<int> idx(values.size());
  for (int r = 1; r <= m; ++r)
    idx[static_cast<std::size_t>(order[static_cast<std::size_t>(r - 1)])] =
        static_cast<int>((static_cast<long long>(r - 1) * c) / m) + 1;
  return idx;
}

/// 1-D DBSCAN. A point is core when at least `min_samples` values (itself
/// included) lie within `eps`. Border points join the cluster of their nearest
/// core (lower label on ties). Clusters are numbered 1..k by ascending minimum;
/// noise is 0.
inline std::vector<int> dbscan_cluster_1d(std::span<const double> values, double eps, int min_samples)
{
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan_cluster_1d: eps must be > 0");
  if (min_samples < 1) throw std::invalid_argument("dbscan_cluster_1d: min_samples must be >= 1");
  const std::size_t m = values.size();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](int l, int r) { return values[l] < values[r]; });
  std::vector<double> v(m);
  for (std::size_t k = 0; k < m; ++k) v[k] = values[static_cast<std::size_t>(order[k])];

  std::vector<std::uint8_t> core(m, 0);
  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < m; ++k)
  {
    while (v[k] - v[lo] > eps) ++lo;
    if (hi < k) hi = k;
    while (hi + 1 < m && v[hi + 1] - v[k] <= eps) ++hi;
    if (static_cast<int>(hi - lo + 1) >= min_samples) core[k] = 1;
  }

  // Consecutive cores within eps share a cluster.
  std::vector<int> sorted_label(m, 0);
  int label = 0;
  std::ptrdiff_t last_core = -1;
  std::vector<std::size_t> cores;
  for (std::size_t k = 0; k < m; ++k)
  {
    if (!core[k]) continue;
    if (last_core < 0 || v[k] - v[static_cast<std::size_t>(last_core)] > eps) ++label;
    sorted_label[k] = label;
    last_core = static_cast<std::ptrdiff_t>(k);
    cores.push_back(k);
  }
  for (std::size_t k = 0; k < m; ++k)
  {
    if (core[k] || cores.empty()) continue;
    auto it = std::ranges::lower_bound(cores, k);
    double best = std::numeric_limits<double>::infinity();
    int best_label = 0;
    auto consider = [&](std::size_t c) {
      const double d = std::abs(v[c] - v[k]);
      if (d <= eps && (d < best || (d == best && sorted_label[c] < best_label)))
      {
        best = d;
        best_label = sorted_label[c];
      }
    };
    if (it != cores.end()) consider(*it);
    if (it != cores.begin()) consider(*std::prev(it));
    sorted_label[k] = best_label;
  }

  // Renumber by ascending cluster minimum.
  std::vector<double> cluster_min(static_cast<std::size_t>(label) + 1, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < m; ++k)
    if (sorted_label[k] > 0)
      cluster_min[static_cast<std::size_t>(sorted_label[k])] =
          std::min(cluster_min[static_cast<std::size_t>(sorted_label[k])], v[k]);
  std::vector<int> by_min(static_cast<std::size_t>(label));
  std::iota(by_min.begin(), by_min.end(), 1);
  std::ranges::stable_sort(by_min, [&](int l, int r) { return cluster_min[l] < cluster_min[r]; });
  std::vector<int> remap(static_cast<std::size_t>(label) + 1, 0);
  for (std::size_t k = 0; k < by_min.size(); ++k) remap[static_cast<std::size_t>(by_min[k])] = static_cast<int>(k) + 1;

  std::vector<int> out(m, 0);
  for (std::size_t k = 0; k < m; ++k)
    out[static_cast<std::size_t>(order[k])] = remap[static_cast<std::size_t>(sorted_label[k])];
  return out;
}

/// Clusters one DTW row. Returns indices, the mode count and the outlier count.
struct ColumnLabels
{
  std::vector<int> indices;
  int mode_count = 1;
  int outliers = 0;
};

inline ColumnLabels cluster_row(std::span<const double> values, const ClusterConfig& cfg)
{
  ColumnLabels col;
  if (cfg.method == ClusterMethod::percentile)
  {
    col.mode_count = mode_count(values, cfg.alpha);
    col.indices = percentile_cluster(values, col.mode_count);
    return col;
  }
  col.indices = dbscan_cluster_1d(values, cfg.eps, cfg.min_samples);
  int k = 0;
  for (int v : col.indices)
  {
    k = std::max(k, v);
    if (v == 0) ++col.outliers;
  }
  col.mode_count = k + (col.outliers > 0 ? 1 : 0);
  return col;
}

inline ModeTable build_mode_table(std::span<const DtwRow> rows, const ClusterConfig& cfg)
{
  if (rows.empty()) throw std::invalid_argument("build_mode_table: no agents");
  ModeTable t;
  t.n = static_cast<int>(rows.size());
  t.m = static_cast<int>(rows.front().values.size());
  if (t.m < 1) throw std::invalid_argument("build_mode_table: no runs");
  t.indices.assign(static_cast<std::size_t>(t.m) * t.n, 0);
  for (int i = 0; i < t.n; ++i)
  {
    const DtwRow& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<int>(r.values.size()) != t.m)
      throw std::invalid_argument("build_mode_table: agent " + std::to_string(r.agent_id) + " has " +
                                  std::to_string(r.values.size()) + " values, expected " + std::to_string(t.m));
    const ColumnLabels col = cluster_row(r.values, cfg);
    t.agent_ids.push_back(r.agent_id);
    t.mode_counts.push_back(col.mode_count);
    t.outliers.push_back(col.outliers);
    for (int j = 0; j < t.m; ++j) t.at(j, i) = col.indices[static_cast<std::size_t>(j)];
  }
  return t;
}

/// DTW of every agent's interactive trajectory against its solo trajectory.
inline std::vector<DtwRow> dtw_rows(std::span<const sim::SimResult> sweep, std::span<const sim::Trajectory> solos)
{
  std::vector<DtwRow> rows(solos.size());
  std::vector<std::vector<Vec2>> solo_pts;
  for (std::size_t i = 0; i < solos.size(); ++i)
  {
    rows[i].agent_id = solos[i].agent_id;
    rows[i].values.reserve(sweep.size());
    solo_pts.push_back(positions(solos[i]));
  }
  for (const auto& run : sweep)
  {
    if (run.trajectories.size() != solos.size())
      throw std::invalid_argument("dtw_rows: run " + std::to_string(run.param_index) + " has " +
                                  std::to_string(run.trajectories.size()) + " trajectories, expected " +
                                  std::to_string(solos.size()));
    for (std::size_t i = 0; i < solos.size(); ++i)
      rows[i].values.push_back(dtw(positions(run.trajectories[i]), solo_pts[i]));
  }
  return rows;
}

inline ModeTable build_mode_table(std::span<const sim::SimResult> sweep, std::span<const sim::Trajectory> solos,
                                  const ClusterConfig& cfg)
{
  const auto rows = dtw_rows(sweep, solos);
  return build_mode_table(rows, cfg);
}

/// First line: mode counts; then one row per run.
inline void write_mode_table_csv(std::ostream& out, const ModeTable& t)
{
  out << "mode_counts";
  for (int c : t.mode_counts) out << ',' << c;
  out << "\nparam_index";
  for (int id : t.agent_ids) out << ",k_" << id;
  out << '\n';
  for (int j = 0; j < t.m; ++j)
  {
    out << (j + 1);
    for (int i = 0; i < t.n; ++i) out << ',' << t.at(j, i);
    out << '\n';
  }
}

/// Inverse of write_mode_table_csv; outliers are recounted from zero labels.
inline ModeTable read_mode_table_csv(std::istream& in)
{
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  auto to_int = [](const std::string& txt) {
    std::size_t used = 0;
    const int v = std::stoi(txt, &used);
    if (used != txt.size()) throw std::runtime_error("mode table csv: bad integer '" + txt + "'");
    return v;
  };
  std::string line;
  ModeTable t;
  if (!std::getline(in, line) || !line.starts_with("mode_counts"))
    throw std::runtime_error("mode table csv: missing mode_counts line");
  const auto counts = split(line);
  for (std::size_t k = 1; k < counts.size(); ++k) t.mode_counts.push_back(to_int(counts[k]));
  if (!std::getline(in, line) || !line.starts_with("param_index"))
    throw std::runtime_error("mode table csv: missing header line");
  const auto header = split(line);
  for (std::size_t k = 1; k < header.size(); ++k)
  {
    if (!header[k].starts_with("k_")) throw std::runtime_error("mode table csv: bad column '" + header[k] + "'");
    t.agent_ids.push_back(to_int(header[k].substr(2)));
  }
  t.n = static_cast<int>(t.agent_ids.size());
  if (t.n == 0 || static_cast<int>(t.mode_counts.size()) != t.n)
    throw std::runtime_error("mode table csv: column count mismatch");
  while (std::getline(in, line))
  {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != t.n + 1) throw std::runtime_error("mode table csv: ragged row");
    for (int i = 0; i < t.n; ++i) t.indices.push_back(to_int(cells[static_cast<std::size_t>(i) + 1]));
    ++t.m;
  }
  t.outliers.assign(static_cast<std::size_t>(t.n), 0);
  for (int j = 0; j < t.m; ++j)
    for (int i = 0; i < t.n; ++i)
      if (t.at(j, i) == 0) ++t.outliers[static_cast<std::size_t>(i)];
  return t;
}

}  // namespace isdq::traj
