#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "isdq/nav.hpp"
#include "isdq/scene.hpp"
#include "isdq/sim.hpp"
#include "isdq/traj.hpp"

namespace isdq::score
{

inline constexpr double kDefaultEpsD = 1.6;
inline constexpr double kDefaultEpsT = 1.0;

/// P(K = tuple): fraction of rows equal to `tuple`.
inline double joint_prob(const traj::ModeTable& t, std::span<const int> tuple)
{
  if (static_cast<int>(tuple.size()) != t.n) throw std::invalid_argument("joint_prob: tuple length must equal n");
  int hits = 0;
  for (int j = 0; j < t.m; ++j)
  {
    bool eq = true;
    for (int i = 0; i < t.n && eq; ++i) eq = t.at(j, i) == tuple[static_cast<std::size_t>(i)];
    hits += eq ? 1 : 0;
  }
  return static_cast<double>(hits) / t.m;
}

/// P(K_i = k).
inline double marginal_prob(const traj::ModeTable& t, int i, int k)
{
  int hits = 0;
  for (int j = 0; j < t.m; ++j) hits += t.at(j, i) == k ? 1 : 0;
  return static_cast<double>(hits) / t.m;
}

/// P(K_{-i} = rest), where `rest` lists the other n-1 digits in column order.
inline double marginal_prob_others(const traj::ModeTable& t, int i, std::span<const int> rest)
{
  if (static_cast<int>(rest.size()) != t.n - 1)
    throw std::invalid_argument("marginal_prob_others: tuple length must equal n-1");
  int hits = 0;
  for (int j = 0; j < t.m; ++j)
  {
    bool eq = true;
    for (int c = 0, r = 0; c < t.n && eq; ++c)
    {
      if (c == i) continue;
      eq = t.at(j, c) == rest[static_cast<std::size_t>(r++)];
    }
    hits += eq ? 1 : 0;
  }
  return static_cast<double>(hits) / t.m;
}

namespace detail
{
/// Group id per row for the composite tuple of all columns except `skip`.
inline std::vector<int> group_rows_without(const traj::ModeTable& t, int skip)
{
  std::vector<int> order(static_cast<std::size_t>(t.m));
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](int a, int b) {
    for (int c = 0; c < t.n; ++c)
    {
      if (c == skip) continue;
      if (t.at(a, c) != t.at(b, c)) return t.at(a, c) < t.at(b, c);
    }
    return false;
  };
  std::ranges::stable_sort(order, less);
  std::vector<int> group(static_cast<std::size_t>(t.m), 0);
  int g = 0;
  for (std::size_t k = 0; k < order.size(); ++k)
  {
    if (k > 0 && less(order[k - 1], order[k])) ++g;
    group[static_cast<std::size_t>(order[k])] = g;
  }
  return group;
}
}  // namespace detail

/// Plug-in mutual information I(K_i; K_{-i}) in bits, with K_{-i} treated as
/// one composite variable. Terms are summed in sorted order so that equal
/// multisets of cells give identical results.
inline double interaction_score(const traj::ModeTable& t, int i)
{
  if (t.m < 1) throw std::invalid_argument("interaction_score: empty table");
  if (i < 0 || i >= t.n) throw std::out_of_range("interaction_score: agent column out of range");
  const std::vector<int> g = detail::group_rows_without(t, i);
  std::map<std::pair<int, int>, std::int64_t> cell;
  std::map<int, std::int64_t> na, nb;
  for (int j = 0; j < t.m; ++j)
  {
    const int a = t.at(j, i);
    const int b = g[static_cast<std::size_t>(j)];
    ++cell[{a, b}];
    ++na[a];
    ++nb[b];
  }
  std::vector<double> terms;
  terms.reserve(cell.size());
  for (const auto& [key, n_ab] : cell)
  {
    std::int64_t num = static_cast<std::int64_t>(t.m) * n_ab;
    std::int64_t den = na[key.first] * nb[key.second];
    const std::int64_t d = std::gcd(num, den);
    num /= d;
    den /= d;
    terms.push_back(static_cast<double>(n_ab) * std::log2(static_cast<double>(num) / static_cast<double>(den)));
  }
  std::ranges::sort(terms);
  double s = 0.0;
  for (double v : terms) s += v;
  return std::max(0.0, s / t.m);
}

struct IsConfig
{
  sim::ParamSpace space;
  double dt = sim::kDefaultDt;
  std::uint64_t seed = 0;
  traj::ClusterConfig cluster;
  double cell_size = nav::kDefaultCellSize;
  unsigned threads = 1;
};

/// Everything the scoring stage needs from the simulations of one scenario.
struct ScenarioRuns
{
  std::string scenario;
  std::string label;
  std::vector<int> agent_ids;
  std::vector<traj::DtwRow> rows;
  /// Runs in which each agent reached its goal.
  std::vector<int> reached_runs;
  std::vector<int> unplanned;
  int m = 0;
};

struct AgentScore
{
  int id = 0;
  double is_bits = 0.0;
  int mode_count = 1;
  int outliers = 0;
  bool reached_goal = false;
  double reached_fraction = 0.0;
};

struct IsReport
{
  std::string scenario;
  std::string label;
  traj::ClusterMethod method = traj::ClusterMethod::percentile;
  std::vector<AgentScore> per_agent;
  double mean = 0.0;
  double std = 0.0;
};

inline std::pair<double, double> mean_std(std::span<const double> v)
{
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

/// Solo runs, the m-run sweep and the DTW rows. Trajectories of each run are
/// reduced to DTW values as soon as the run finishes.
inline ScenarioRuns run_scenario(const scene::Scenario& s, const IsConfig& cfg,
                                 std::vector<sim::SimResult>* keep = nullptr)
{
  sim::validate(cfg.space);
  const std::size_t n = s.tasks.size();
  ScenarioRuns out;
  out.scenario = s.name;
  out.label = s.config.label;
  out.m = cfg.space.m;
  const sim::SfParams star = sim::theta_star(cfg.space);
  std::vector<std::vector<Vec2>> solo_pts(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto& task = s.tasks[i];
    out.agent_ids.push_back(task.id);
    try
    {
      solo_pts[i] = traj::positions(sim::solo_trajectory(s, task.id, star, cfg.dt, cfg.cell_size));
    }
    catch (const NoPathError&)
    {
      solo_pts[i] = {task.start};
    }
  }

  const sim::RoutePlan plan = sim::plan_routes(s, cfg.cell_size);
  const auto m = static_cast<std::size_t>(cfg.space.m);
  std::vector<std::vector<double>> values(n, std::vector<double>(m, 0.0));
  std::vector<std::vector<std::uint8_t>> reached(n, std::vector<std::uint8_t>(m, 0));
  std::vector<std::string> errors(m);
  if (keep) keep->assign(m, {});
  sim::SimOptions opt;
  opt.dt = cfg.dt;
  opt.seed = cfg.seed;

  auto run = [&](int j) {
    const auto jj = static_cast<std::size_t>(j - 1);
    try
    {
      sim::SimResult r = sim::simulate(s, plan, sim::interpolate_params(cfg.space, j), opt, j);
      for (std::size_t i = 0; i < n; ++i)
      {
        values[i][jj] = traj::dtw(traj::positions(r.trajectories[i]), solo_pts[i]);
        reached[i][jj] = r.trajectories[i].reached_goal ? 1 : 0;
      }
      if (jj == 0) out.unplanned = r.unplanned;
      if (keep) (*keep)[jj] = std::move(r);
    }
    catch (const std::exception& e)
    {
      errors[jj] = e.what();
    }
  };
  const unsigned threads = std::max(1U, std::min<unsigned>(cfg.threads, static_cast<unsigned>(m)));
  if (threads == 1)
  {
    for (int j = 1; j <= cfg.space.m; ++j) run(j);
  }
  else
  {
    std::atomic<int> next{1};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int j = next++; j <= cfg.space.m; j = next++) run(j);
      });
  }
  std::string agg;
  for (std::size_t j = 0; j < m; ++j)
    if (!errors[j].empty()) agg += "run " + std::to_string(j + 1) + ": " + errors[j] + "; ";
  if (!agg.empty()) throw std::runtime_error(s.name + ": " + agg);

  for (std::size_t i = 0; i < n; ++i)
  {
    out.rows.push_back({out.agent_ids[i], std::move(values[i])});
    out.reached_runs.push_back(static_cast<int>(std::count(reached[i].begin(), reached[i].end(), 1)));
  }
  return out;
}

/// Clusters the DTW rows and scores every agent.
inline IsReport score_runs(const ScenarioRuns& runs, const traj::ClusterConfig& cluster)
{
  const traj::ModeTable table = traj::build_mode_table(runs.rows, cluster);
  IsReport rep;
  rep.scenario = runs.scenario;
  rep.label = runs.label;
  rep.method = cluster.method;
  std::vector<double> vals;
  for (int i = 0; i < table.n; ++i)
  {
    AgentScore a;
    a.id = table.agent_ids[static_cast<std::size_t>(i)];
    a.is_bits = interaction_score(table, i);
    a.mode_count = table.mode_counts[static_cast<std::size_t>(i)];
    a.outliers = table.outliers[static_cast<std::size_t>(i)];
    const int ok = runs.reached_runs[static_cast<std::size_t>(i)];
    a.reached_goal = ok == runs.m;
    a.reached_fraction = static_cast<double>(ok) / runs.m;
    rep.per_agent.push_back(a);
    vals.push_back(a.is_bits);
  }
  std::tie(rep.mean, rep.std) = mean_std(vals);
  return rep;
}

/// Solo runs, sweep, DTW, clustering and per-agent IS for one scenario.
inline IsReport is_scenario(const scene::Scenario& s, const IsConfig& cfg)
{
  return score_runs(run_scenario(s, cfg), cfg.cluster);
}

struct DomainScore
{
  double mean = 0.0;
  double std = 0.0;
  std::size_t agents = 0;
};

/// Pools per-agent IS over all scenarios of a domain.
inline DomainScore is_domain(std::span<const IsReport> reports, bool exclude_failed = false)
{
  if (reports.empty()) throw std::invalid_argument("is_domain: empty domain");
  std::vector<double> pooled;
  for (const auto& r : reports)
    for (const auto& a : r.per_agent)
      if (!exclude_failed || a.reached_goal) pooled.push_back(a.is_bits);
  const auto [mean, sd] = mean_std(pooled);
  return {mean, sd, pooled.size()};
}

inline DomainScore is_domain(const scene::DomainSample& domain, const IsConfig& cfg)
{
  std::vector<IsReport> reports;
  for (const auto& s : domain.scenarios) reports.push_back(is_scenario(s, cfg));
  return is_domain(reports);
}

struct BlConfig
{
  double eps_d = kDefaultEpsD;
  double eps_t = kDefaultEpsT;
  /// Speed used to timestamp waypoints.
  double speed = sim::theta_first().max_speed;
};

struct BlReport
{
  std::string scenario;
  std::string label;
  std::vector<int> agent_ids;
  std::vector<int> counts;
  std::vector<int> unplanned;
  double mean = 0.0;
  double std = 0.0;
};

/// Spatio-temporal proximity of planned waypoints. An agent's count is the
/// number of its waypoints close in space and time to some other agent's.
inline BlReport baseline_bl(const scene::Scenario& s, const BlConfig& cfg, double cell_size = nav::kDefaultCellSize)
{
  if (!(cfg.eps_d > 0.0) || !(cfg.eps_t > 0.0)) throw std::invalid_argument("baseline_bl: thresholds must be > 0");
  // Cell centers only, as planned; the exact goal is a steering aid.
  const sim::RoutePlan plan = sim::plan_routes(s, cell_size, nav::kDefaultPlanningInflation, false);
  const std::size_t n = s.tasks.size();
  struct Stamped
  {
    Vec2 p;
    double t;
  };
  std::vector<std::vector<Stamped>> wps(n);
  BlReport rep;
  rep.scenario = s.name;
  rep.label = s.config.label;
  for (std::size_t i = 0; i < n; ++i)
  {
    rep.agent_ids.push_back(s.tasks[i].id);
    if (!plan.routes[i])
    {
      rep.unplanned.push_back(s.tasks[i].id);
      continue;
    }
    const auto& path = *plan.routes[i];
    for (std::size_t k = 0; k < path.waypoints.size(); ++k)
      wps[i].push_back({path.waypoints[k], s.tasks[i].start_time + path.cumulative_length[k] / cfg.speed});
  }
  // A waypoint counts once, however many detections it takes part in.
  std::vector<std::vector<std::uint8_t>> hit(n);
  for (std::size_t i = 0; i < n; ++i) hit[i].assign(wps[i].size(), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t a = 0; a < wps[i].size(); ++a)
        for (std::size_t b = 0; b < wps[j].size(); ++b)
          if (distance(wps[i][a].p, wps[j][b].p) < cfg.eps_d && std::abs(wps[i][a].t - wps[j][b].t) < cfg.eps_t)
          {
            hit[i][a] = 1;
            hit[j][b] = 1;
          }
  rep.counts.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) rep.counts[i] = static_cast<int>(std::ranges::count(hit[i], 1));
  std::vector<double> vals(rep.counts.begin(), rep.counts.end());
  std::tie(rep.mean, rep.std) = mean_std(vals);
  return rep;
}

inline nlohmann::ordered_json config_json(const IsConfig& cfg)
{
  nlohmann::ordered_json c;
  c["m"] = cfg.space.m;
  c["alpha"] = cfg.cluster.alpha;
  c["dt"] = cfg.dt;
  c["seed"] = cfg.seed;
  c["cluster"] = traj::to_string(cfg.cluster.method);
  if (cfg.cluster.method == traj::ClusterMethod::dbscan)
  {
    c["eps"] = cfg.cluster.eps;
    c["min_samples"] = cfg.cluster.min_samples;
  }
  c["cell_size"] = cfg.cell_size;
  return c;
}

inline nlohmann::ordered_json to_json(const IsReport& r, const IsConfig& cfg)
{
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["label"] = r.label;
  j["method"] = "is";
  nlohmann::ordered_json agents = nlohmann::ordered_json::array();
  for (const auto& a : r.per_agent)
  {
    nlohmann::ordered_json aj;
    aj["id"] = a.id;
    aj["is_bits"] = a.is_bits;
    aj["mode_count"] = a.mode_count;
    if (r.method == traj::ClusterMethod::dbscan) aj["outliers"] = a.outliers;
    aj["reached_goal"] = a.reached_goal;
    aj["reached_fraction"] = a.reached_fraction;
    agents.push_back(std::move(aj));
  }
  j["per_agent"] = std::move(agents);
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["config"] = config_json(cfg);
  return j;
}

inline nlohmann::ordered_json to_json(const BlReport& r, const BlConfig& cfg, double cell_size)
{
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["label"] = r.label;
  j["method"] = "bl";
  nlohmann::ordered_json agents = nlohmann::ordered_json::array();
  std::vector<int> unplanned = r.unplanned;
  for (std::size_t i = 0; i < r.agent_ids.size(); ++i)
  {
    nlohmann::ordered_json aj;
    aj["id"] = r.agent_ids[i];
    aj["bl_count"] = r.counts[i];
    aj["reached_goal"] = std::ranges::find(unplanned, r.agent_ids[i]) == unplanned.end();
    agents.push_back(std::move(aj));
  }
  j["per_agent"] = std::move(agents);
  j["mean"] = r.mean;
  j["std"] = r.std;
  nlohmann::ordered_json c;
  c["eps_d"] = cfg.eps_d;
  c["eps_t"] = cfg.eps_t;
  c["speed"] = cfg.speed;
  c["cell_size"] = cell_size;
  j["config"] = std::move(c);
  return j;
}

}  // namespace isdq::score
