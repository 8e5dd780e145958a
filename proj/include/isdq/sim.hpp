#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "isdq/geometry.hpp"
#include "isdq/nav.hpp"
#include "isdq/scene.hpp"

namespace isdq::sim
{

inline constexpr double kDefaultDt = 0.1;
inline constexpr double kAgentMass = 80.0;
inline constexpr double kAgentCutoff = 5.0;
inline constexpr double kWallCutoff = 3.0;
inline constexpr double kTieBreakSpeed = 1e-3;
inline constexpr double kTieBreakAngle = 1.0 * 3.14159265358979323846 / 180.0;
/// Index of the solo-run parameter within the interpolated family.
inline constexpr int kSoloParamIndex = 50;

/// Social-force parameters. Force terms are stored per unit mass.
struct SfParams
{
  double max_speed = 2.6;
  /// Relaxation constant of the goal-directed drive, in seconds.
  double acceleration = 0.5;
  double agent_repulsion_importance = 0.0;
  double agent_body_force_over_mass = 1500.0;
  double wall_body_force_over_mass = 1500.0;
  double sliding_friction_over_mass = 3000.0;
  double repulsion_agent_B = 0.01;
  double repulsion_agent_A_over_mass = 5.0;
  double repulsion_wall_B = 0.20;
  double repulsion_wall_A_over_mass = 63.33;
  double mass = kAgentMass;

  bool operator==(const SfParams&) const = default;
};

/// Low agent-repulsion endpoint.
inline SfParams theta_first() { return SfParams{}; }

/// High agent-repulsion endpoint.
inline SfParams theta_last()
{
  SfParams p;
  p.agent_repulsion_importance = 10.0;
  p.repulsion_agent_B = 0.28;
  p.repulsion_agent_A_over_mass = 60.0;
  return p;
}

struct ParamSpace
{
  SfParams theta_1 = theta_first();
  SfParams theta_m = theta_last();
  int m = 300;
};

inline void validate(const ParamSpace& space)
{
  if (space.m < 2) throw std::invalid_argument("ParamSpace: m must be >= 2");
  const SfParams& a = space.theta_1;
  const SfParams& b = space.theta_m;
  if (a.max_speed != b.max_speed || a.acceleration != b.acceleration ||
      a.agent_body_force_over_mass != b.agent_body_force_over_mass ||
      a.wall_body_force_over_mass != b.wall_body_force_over_mass ||
      a.sliding_friction_over_mass != b.sliding_friction_over_mass || a.repulsion_wall_B != b.repulsion_wall_B ||
      a.repulsion_wall_A_over_mass != b.repulsion_wall_A_over_mass || a.mass != b.mass)
    throw std::invalid_argument("ParamSpace: endpoints may differ only in the agent-repulsion fields");
}

/// theta^j = theta^1 + (j-1)/(m-1) * (theta^m - theta^1), j in 1..m.
inline SfParams interpolate_params(const ParamSpace& space, int j)
{
  if (space.m < 2) throw std::invalid_argument("interpolate_params: m must be >= 2");
  if (j < 1 || j > space.m) throw std::out_of_range("interpolate_params: j must lie in 1..m");
  if (j == 1) return space.theta_1;
  if (j == space.m) return space.theta_m;
  const double w = static_cast<double>(j - 1) / static_cast<double>(space.m - 1);
  auto lerp = [w](double a, double b) { return a + w * (b - a); };
  const SfParams& a = space.theta_1;
  const SfParams& b = space.theta_m;
  SfParams p = a;
  p.max_speed = lerp(a.max_speed, b.max_speed);
  p.acceleration = lerp(a.acceleration, b.acceleration);
  p.agent_repulsion_importance = lerp(a.agent_repulsion_importance, b.agent_repulsion_importance);
  p.agent_body_force_over_mass = lerp(a.agent_body_force_over_mass, b.agent_body_force_over_mass);
  p.wall_body_force_over_mass = lerp(a.wall_body_force_over_mass, b.wall_body_force_over_mass);
  p.sliding_friction_over_mass = lerp(a.sliding_friction_over_mass, b.sliding_friction_over_mass);
  p.repulsion_agent_B = lerp(a.repulsion_agent_B, b.repulsion_agent_B);
  p.repulsion_agent_A_over_mass = lerp(a.repulsion_agent_A_over_mass, b.repulsion_agent_A_over_mass);
  p.repulsion_wall_B = lerp(a.repulsion_wall_B, b.repulsion_wall_B);
  p.repulsion_wall_A_over_mass = lerp(a.repulsion_wall_A_over_mass, b.repulsion_wall_A_over_mass);
  return p;
}

inline SfParams theta_star(const ParamSpace& space)
{
  return interpolate_params(space, std::min(kSoloParamIndex, space.m));
}

struct Sample
{
  double t = 0.0;
  Vec2 position;
  bool operator==(const Sample&) const = default;
};

struct Trajectory
{
  int agent_id = 0;
  std::vector<Sample> samples;
  bool reached_goal = false;
  bool operator==(const Trajectory&) const = default;
};

struct SimResult
{
  std::vector<Trajectory> trajectories;
  int param_index = 0;
  std::uint64_t seed = 0;
  double dt = kDefaultDt;
  /// Agents whose route could not be planned; they never move.
  std::vector<int> unplanned;
  bool operator==(const SimResult&) const = default;
};

struct AgentState
{
  Vec2 position;
  Vec2 velocity;
  double radius = scene::kDefaultRadius;
};

/// Wall contribution of one polygon on an agent.
inline Vec2 wall_force(const AgentState& ego, const Polygon& poly, const SfParams& p)
{
  const Vec2 q = closest_on_boundary(ego.position, poly);
  Vec2 diff = ego.position - q;
  double d = norm(diff);
  const bool inside = point_in_polygon(ego.position, poly);
  Vec2 n = d > 1e-12 ? diff / d : Vec2{};
  if (inside)
  {
    n = -n;
    d = -d;
  }
  if (d > kWallCutoff) return {};
  const double overlap = std::max(0.0, ego.radius - d);
  const Vec2 t = perp(n);
  Vec2 f{};
  if (p.repulsion_wall_B > 0.0) f += n * (p.repulsion_wall_A_over_mass * std::exp((ego.radius - d) / p.repulsion_wall_B));
  f += n * (p.wall_body_force_over_mass * overlap);
  f -= t * (p.sliding_friction_over_mass * overlap * dot(ego.velocity, t));
  return f;
}

/// Exponential + contact interaction of neighbor `other` on `ego`.
inline Vec2 agent_force(const AgentState& ego, const AgentState& other, const SfParams& p)
{
  const Vec2 diff = ego.position - other.position;
  const double d = norm(diff);
  if (d > kAgentCutoff) return {};
  const Vec2 n = d > 1e-12 ? diff / d : Vec2{1.0, 0.0};
  const double r = ego.radius + other.radius;
  const double overlap = std::max(0.0, r - d);
  const Vec2 t = perp(n);
  Vec2 f{};
  if (p.agent_repulsion_importance > 0.0 && p.repulsion_agent_B > 0.0)
    f += n * (p.agent_repulsion_importance * p.repulsion_agent_A_over_mass * std::exp((r - d) / p.repulsion_agent_B));
  f += n * (p.agent_body_force_over_mass * overlap);
  f += t * (p.sliding_friction_over_mass * overlap * dot(other.velocity - ego.velocity, t));
  return f;
}

/// Goal-directed relaxation toward max_speed along the target direction.
inline Vec2 drive_force(const AgentState& ego, const SfParams& p, const Vec2& target)
{
  const Vec2 desired = normalized(target - ego.position) * p.max_speed;
  return (desired - ego.velocity) / p.acceleration;
}

/// Acceleration on `ego` (per unit mass) from its drive, its neighbors and
/// the obstacle polygons.
inline Vec2 sf_step_force(const AgentState& ego, std::span<const AgentState> neighbors,
                          const scene::ObstacleConfig& config, const SfParams& params, const Vec2& target)
{
  Vec2 a = drive_force(ego, params, target);
  for (const auto& nb : neighbors) a += agent_force(ego, nb, params);
  for (const auto& poly : config.polygons) a += wall_force(ego, poly, params);
  return a;
}

struct SimOptions
{
  double dt = kDefaultDt;
  std::uint64_t seed = 0;
  /// Visibility ignores other agents (solo runs).
  bool ignore_agents = false;
  /// Lateral nudge for exact head-on approaches.
  bool tie_break = true;
};

/// Routes planned once per scenario and reused across parameter runs.
struct RoutePlan
{
  std::vector<std::optional<nav::PlannedPath>> routes;
};

inline RoutePlan plan_routes(const scene::Scenario& s, double cell_size = nav::kDefaultCellSize,
                             double inflation = nav::kDefaultPlanningInflation, bool append_goal = true)
{
  const nav::OccupancyGrid grid = nav::rasterize(s.config, cell_size, inflation);
  RoutePlan plan;
  for (const auto& t : s.tasks)
  {
    try
    {
      plan.routes.emplace_back(nav::plan_route(grid, t.start, t.goal, append_goal));
    }
    catch (const NoPathError&)
    {
      plan.routes.emplace_back(std::nullopt);
    }
  }
  return plan;
}

namespace detail
{
inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void clamp_speed(Vec2& v, double max_speed)
{
  const double s = norm(v);
  if (s > max_speed) v *= max_speed / s;
}

/// Pushes a center that ended inside an obstacle back onto its boundary.
inline void resolve_penetration(Vec2& pos, Vec2& vel, const nav::ObstacleIndex& obstacles, const Rect& bounds)
{
  const auto polys = obstacles.polygons();
  for (std::size_t k = 0; k < polys.size(); ++k)
  {
    if (!obstacles.box(k).contains(pos)) continue;
    if (!point_in_polygon(pos, polys[k])) continue;
    const Vec2 q = closest_on_boundary(pos, polys[k]);
    const Vec2 outward = normalized(q - pos);
    pos = q + outward * 1e-6;
    const double vn = dot(vel, outward);
    if (vn < 0.0) vel -= outward * vn;
  }
  pos.x = std::clamp(pos.x, bounds.xmin, bounds.xmax);
  pos.y = std::clamp(pos.y, bounds.ymin, bounds.ymax);
}
}  // namespace detail

/// Runs one decentralized simulation with every agent sharing `params`.
inline SimResult simulate(const scene::Scenario& s, const RoutePlan& plan, const SfParams& params,
                          const SimOptions& opt, int param_index = 0)
{
  if (!(opt.dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  const std::size_t n = s.tasks.size();
  if (plan.routes.size() != n) throw std::invalid_argument("simulate: route plan does not match the scenario");
  const nav::ObstacleIndex obstacles(s.config);
  const double side = (detail::splitmix64(opt.seed) & 1U) ? 1.0 : -1.0;

  struct Runtime
  {
    AgentState state;
    nav::WaypointTracker tracker;
    long start_step = 0;
    int steps = 0;
    bool active = false;
    bool done = false;
  };

  SimResult result;
  result.param_index = param_index;
  result.seed = opt.seed;
  result.dt = opt.dt;
  result.trajectories.resize(n);
  std::vector<Runtime> agents(n);
  long last_step = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto& task = s.tasks[i];
    auto& a = agents[i];
    result.trajectories[i].agent_id = task.id;
    a.state = {task.start, {}, task.radius};
    a.start_step = static_cast<long>(std::ceil(task.start_time / opt.dt - 1e-9));
    if (!plan.routes[i])
    {
      result.unplanned.push_back(task.id);
      result.trajectories[i].samples.push_back({a.start_step * opt.dt, task.start});
      a.done = true;
      continue;
    }
    a.tracker = nav::WaypointTracker(plan.routes[i]->waypoints, /*retreat=*/true);
    last_step = std::max(last_step, a.start_step + task.max_steps);
  }

  std::vector<Vec2> accel(n);
  std::vector<AgentState> neighbors;
  std::vector<nav::Disc> discs;
  neighbors.reserve(n);
  discs.reserve(n);
  for (long step = 0; step <= last_step; ++step)
  {
    bool any_pending = false;
    for (std::size_t i = 0; i < n; ++i)
    {
      auto& a = agents[i];
      if (a.done || a.active) continue;
      if (a.start_step == step)
      {
        a.active = true;
        result.trajectories[i].samples.push_back({step * opt.dt, a.state.position});
        if (distance(a.state.position, s.tasks[i].goal) <= s.tasks[i].radius)
        {
          a.active = false;
          a.done = true;
          result.trajectories[i].reached_goal = true;
        }
      }
      else
        any_pending = true;
    }

    bool any_active = false;
    for (std::size_t i = 0; i < n; ++i)
    {
      auto& a = agents[i];
      if (!a.active) continue;
      any_active = true;
      neighbors.clear();
      discs.clear();
      for (std::size_t k = 0; k < n; ++k)
      {
        if (k == i || !agents[k].active) continue;
        const AgentState& o = agents[k].state;
        if (norm_sq(o.position - a.state.position) <= kAgentCutoff * kAgentCutoff) neighbors.push_back(o);
        discs.push_back({o.position, o.radius});
      }
      const Vec2 target = a.tracker.current_target(a.state.position, obstacles, discs, opt.ignore_agents);
      Vec2 acc = drive_force(a.state, params, target);
      for (const auto& nb : neighbors) acc += agent_force(a.state, nb, params);
      const auto polys = obstacles.polygons();
      for (std::size_t k = 0; k < polys.size(); ++k)
      {
        const Rect& bb = obstacles.box(k);
        const Vec2& p = a.state.position;
        if (p.x < bb.xmin - kWallCutoff || p.x > bb.xmax + kWallCutoff || p.y < bb.ymin - kWallCutoff ||
            p.y > bb.ymax + kWallCutoff)
          continue;
        acc += wall_force(a.state, polys[k], params);
      }
      accel[i] = acc;

      if (opt.tie_break)
      {
        const Vec2 heading = norm_sq(a.state.velocity) > 1e-18 ? normalized(a.state.velocity)
                                                                : normalized(target - a.state.position);
        for (const auto& nb : neighbors)
        {
          const Vec2 rel_pos = nb.position - a.state.position;
          const Vec2 rel_vel = a.state.velocity - nb.velocity;
          const double rp = norm(rel_pos);
          const double rv = norm(rel_vel);
          if (rp < 1e-12 || rv < 1e-12) continue;
          const double c = dot(rel_pos, rel_vel) / (rp * rv);
          if (c >= std::cos(kTieBreakAngle))
          {
            // Nudge to the seed-chosen side of the ego heading.
            accel[i] += perp(heading) * (side * kTieBreakSpeed / opt.dt);
            break;
          }
        }
      }
    }
    if (!any_active && !any_pending) break;

    const double t_next = (step + 1) * opt.dt;
    for (std::size_t i = 0; i < n; ++i)
    {
      auto& a = agents[i];
      if (!a.active) continue;
      a.state.velocity += accel[i] * opt.dt;
      detail::clamp_speed(a.state.velocity, params.max_speed);
      a.state.position += a.state.velocity * opt.dt;
      detail::resolve_penetration(a.state.position, a.state.velocity, obstacles, s.config.bounds);
      a.steps += 1;
      auto& traj = result.trajectories[i];
      traj.samples.push_back({t_next, a.state.position});
      if (distance(a.state.position, s.tasks[i].goal) <= s.tasks[i].radius)
      {
        traj.reached_goal = true;
        a.active = false;
        a.done = true;
      }
      else if (a.steps >= s.tasks[i].max_steps)
      {
        a.active = false;
        a.done = true;
      }
    }
  }
  return result;
}

/// Plans routes and simulates. Planning failures flag the agent instead of
/// aborting the run.
inline SimResult simulate(const scene::Scenario& s, const SfParams& params, double dt, std::uint64_t seed,
                          double cell_size = nav::kDefaultCellSize)
{
  SimOptions opt;
  opt.dt = dt;
  opt.seed = seed;
  return simulate(s, plan_routes(s, cell_size), params, opt);
}

inline scene::Scenario solo_scenario(const scene::Scenario& s, int task_id)
{
  scene::Scenario solo;
  solo.name = s.name;
  solo.config = s.config;
  solo.tasks.push_back(s.task(task_id));
  return solo;
}

/// The agent simulated alone among the obstacles, visibility ignoring agents.
inline Trajectory solo_trajectory(const scene::Scenario& s, int task_id, const SfParams& theta_star, double dt,
                                  double cell_size = nav::kDefaultCellSize)
{
  const scene::Scenario solo = solo_scenario(s, task_id);
  const RoutePlan plan = plan_routes(solo, cell_size);
  if (!plan.routes.front()) throw NoPathError("solo_trajectory: no path for task " + std::to_string(task_id));
  SimOptions opt;
  opt.dt = dt;
  opt.ignore_agents = true;
  opt.tie_break = false;
  return simulate(solo, plan, theta_star, opt).trajectories.front();
}

/// Runs the m parameter samples. Runs are independent; with `threads` > 1
/// they execute concurrently, output always ordered by j.
inline std::vector<SimResult> sweep(const scene::Scenario& s, const ParamSpace& space, double dt, std::uint64_t seed,
                                    unsigned threads = 1, double cell_size = nav::kDefaultCellSize)
{
  validate(space);
  const RoutePlan plan = plan_routes(s, cell_size);
  std::vector<SimResult> results(static_cast<std::size_t>(space.m));
  std::vector<std::string> errors(static_cast<std::size_t>(space.m));
  SimOptions opt;
  opt.dt = dt;
  opt.seed = seed;
  auto run = [&](int j) {
    try
    {
      results[static_cast<std::size_t>(j - 1)] = simulate(s, plan, interpolate_params(space, j), opt, j);
    }
    catch (const std::exception& e)
    {
      errors[static_cast<std::size_t>(j - 1)] = e.what();
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(space.m)));
  if (threads == 1)
  {
    for (int j = 1; j <= space.m; ++j) run(j);
  }
  else
  {
    std::atomic<int> next{1};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int j = next++; j <= space.m; j = next++) run(j);
      });
  }
  std::string agg;
  for (int j = 1; j <= space.m; ++j)
    if (!errors[static_cast<std::size_t>(j - 1)].empty())
      agg += "run " + std::to_string(j) + ": " + errors[static_cast<std::size_t>(j - 1)] + "; ";
  if (!agg.empty()) throw std::runtime_error("sweep failed: " + agg);
  return results;
}

/// Debounced agent-agent overlap entries per agent (each event counts for
/// both agents). Trajectories must share the dt lattice.
inline std::vector<int> count_collisions(const SimResult& result, std::span<const double> radii)
{
  const std::size_t n = result.trajectories.size();
  if (radii.size() != n) throw std::invalid_argument("count_collisions: one radius per trajectory required");
  std::vector<std::map<long, Vec2>> at(n);
  long first = std::numeric_limits<long>::max(), last = std::numeric_limits<long>::min();
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& smp : result.trajectories[i].samples)
    {
      const long k = std::lround(smp.t / result.dt);
      at[i][k] = smp.position;
      first = std::min(first, k);
      last = std::max(last, k);
    }
  std::vector<int> counts(n, 0);
  std::vector<std::uint8_t> overlapping(n * n, 0);
  for (long k = first; k <= last; ++k)
    for (std::size_t i = 0; i < n; ++i)
    {
      auto pi = at[i].find(k);
      if (pi == at[i].end()) continue;
      for (std::size_t j = i + 1; j < n; ++j)
      {
        auto pj = at[j].find(k);
        auto& state = overlapping[i * n + j];
        if (pj == at[j].end())
        {
          state = 0;
          continue;
        }
        const bool now = distance(pi->second, pj->second) < radii[i] + radii[j];
        if (now && !state)
        {
          ++counts[i];
          ++counts[j];
        }
        state = now ? 1 : 0;
      }
    }
  return counts;
}

/// Shortest round-trip decimal text for a double.
inline std::string format_number(double v)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// CSV rows ordered by (param_index, agent_id, t).
inline void write_trajectory_csv(std::ostream& out, const std::string& scenario, std::span<const SimResult> runs,
                                 bool header = true)
{
  if (header) out << "scenario,param_index,agent_id,t,x,y,reached_goal\n";
  std::vector<const SimResult*> ordered;
  for (const auto& r : runs) ordered.push_back(&r);
  std::ranges::stable_sort(ordered, {}, &SimResult::param_index);
  for (const SimResult* r : ordered)
  {
    std::vector<const Trajectory*> trajs;
    for (const auto& t : r->trajectories) trajs.push_back(&t);
    std::ranges::stable_sort(trajs, {}, &Trajectory::agent_id);
    for (const Trajectory* t : trajs)
      for (const auto& smp : t->samples)
        out << scenario << ',' << r->param_index << ',' << t->agent_id << ',' << format_number(smp.t) << ','
            << format_number(smp.position.x) << ',' << format_number(smp.position.y) << ','
            << (t->reached_goal ? 1 : 0) << '\n';
  }
}

/// One run of one scenario, as read back from a trajectory CSV.
struct CsvRun
{
  std::string scenario;
  int param_index = 0;
  std::vector<Trajectory> trajectories;
};

/// Inverse of write_trajectory_csv. Runs come back in file order.
inline std::vector<CsvRun> read_trajectory_csv(std::istream& in)
{
  std::vector<CsvRun> runs;
  std::string line;
  int line_no = 0;
  auto field = [&](std::istringstream& ss, std::string& out) {
    if (!std::getline(ss, out, ','))
      throw std::runtime_error("trajectory csv line " + std::to_string(line_no) + ": missing field");
  };
  auto number = [&](const std::string& txt) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(txt.data(), txt.data() + txt.size(), v);
    if (ec != std::errc{} || ptr != txt.data() + txt.size())
      throw std::runtime_error("trajectory csv line " + std::to_string(line_no) + ": bad number '" + txt + "'");
    return v;
  };
  while (std::getline(in, line))
  {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("scenario,")) continue;
    std::istringstream ss(line);
    std::string name, j, id, t, x, y, reached;
    field(ss, name);
    field(ss, j);
    field(ss, id);
    field(ss, t);
    field(ss, x);
    field(ss, y);
    field(ss, reached);
    const int pj = static_cast<int>(number(j));
    const int aid = static_cast<int>(number(id));
    if (runs.empty() || runs.back().scenario != name || runs.back().param_index != pj) runs.push_back({name, pj, {}});
    auto& trajs = runs.back().trajectories;
    if (trajs.empty() || trajs.back().agent_id != aid) trajs.push_back({aid, {}, reached == "1"});
    trajs.back().samples.push_back({number(t), {number(x), number(y)}});
  }
  return runs;
}

}  // namespace isdq::sim
