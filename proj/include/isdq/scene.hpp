#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isdq/geometry.hpp"

namespace isdq
{

/// Malformed input text (JSON syntax or schema).
class ParseError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a scenario invariant.
class ValidationError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isdq

namespace isdq::scene
{

inline constexpr double kDefaultRadius = 0.3;
inline constexpr int kDefaultMaxSteps = 2000;
inline constexpr double kDefaultStartTime = 0.0;

/// Obstacle configuration: a labeled polygon set inside a world rectangle.
struct ObstacleConfig
{
  std::string label;
  std::vector<Polygon> polygons;
  Rect bounds;

  bool operator==(const ObstacleConfig&) const = default;
};

struct Task
{
  int id = 0;
  Vec2 start;
  Vec2 goal;
  double start_time = kDefaultStartTime;
  int max_steps = kDefaultMaxSteps;
  double radius = kDefaultRadius;
  /// Permits start == goal.
  bool degenerate = false;

  bool operator==(const Task&) const = default;
};

struct Scenario
{
  std::string name;
  ObstacleConfig config;
  std::vector<Task> tasks;

  std::size_t size() const { return tasks.size(); }
  const Task& task(int id) const
  {
    for (const auto& t : tasks)
      if (t.id == id) return t;
    throw std::out_of_range("no task with id " + std::to_string(id));
  }
  bool operator==(const Scenario&) const = default;
};

struct DomainSample
{
  std::string name;
  std::vector<Scenario> scenarios;
};

/// True if a disc of `radius` at `p` overlaps any obstacle or leaves the bounds.
inline bool in_collision(const ObstacleConfig& config, const Vec2& p, double radius)
{
  if (!config.bounds.contains(p)) return true;
  for (const auto& poly : config.polygons)
    if (polygon_distance(p, poly) < radius) return true;
  return false;
}

/// Throws ValidationError naming the offending field or task.
inline void validate(const ObstacleConfig& config)
{
  if (config.label.empty()) throw ValidationError("config.label: must be non-empty");
  const Rect& b = config.bounds;
  if (!(std::isfinite(b.xmin) && std::isfinite(b.ymin) && std::isfinite(b.xmax) && std::isfinite(b.ymax)) ||
      !(b.xmin < b.xmax && b.ymin < b.ymax))
    throw ValidationError("config.bounds: must be a finite rectangle with xmin<xmax and ymin<ymax");
  for (std::size_t k = 0; k < config.polygons.size(); ++k)
  {
    const auto& poly = config.polygons[k];
    const std::string where = "config.polygons[" + std::to_string(k) + "]";
    if (poly.size() < 3) throw ValidationError(where + ": needs at least 3 vertices");
    for (const auto& v : poly)
    {
      if (!is_finite(v)) throw ValidationError(where + ": non-finite vertex");
      if (!b.contains(v)) throw ValidationError(where + ": vertex outside bounds");
    }
    if (!is_simple_polygon(poly)) throw ValidationError(where + ": polygon is not simple");
    if (signed_area(poly) <= 0.0) throw ValidationError(where + ": polygon must be counterclockwise");
  }
}

inline void validate(const Scenario& s)
{
  validate(s.config);
  if (s.tasks.empty()) throw ValidationError("tasks: scenario needs at least one task");
  std::set<int> ids;
  std::set<std::pair<std::pair<double, double>, double>> starts;
  for (const auto& t : s.tasks)
  {
    const std::string where = "task " + std::to_string(t.id);
    if (!ids.insert(t.id).second) throw ValidationError(where + ": duplicate id");
    if (!is_finite(t.start)) throw ValidationError(where + ": start is not finite");
    if (!is_finite(t.goal)) throw ValidationError(where + ": goal is not finite");
    if (!(t.radius > 0.0) || !std::isfinite(t.radius)) throw ValidationError(where + ": radius must be > 0");
    if (!(t.start_time >= 0.0) || !std::isfinite(t.start_time))
      throw ValidationError(where + ": start_time must be >= 0");
    if (t.max_steps <= 0) throw ValidationError(where + ": max_steps must be positive");
    if (in_collision(s.config, t.start, t.radius))
      throw ValidationError(where + ": start is out of bounds or inside an obstacle");
    if (in_collision(s.config, t.goal, t.radius))
      throw ValidationError(where + ": goal is out of bounds or inside an obstacle");
    if (t.start == t.goal && !t.degenerate) throw ValidationError(where + ": start equals goal");
    if (!starts.insert({{t.start.x, t.start.y}, t.start_time}).second)
      throw ValidationError(where + ": shares its start position and start_time with another task");
  }
}

/// Tasks sorted by id; the canonical in-memory order.
inline Scenario canonical(Scenario s)
{
  std::ranges::sort(s.tasks, {}, &Task::id);
  return s;
}

}  // namespace isdq::scene
