#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "isdq/geometry.hpp"
#include "isdq/scene.hpp"

namespace isdq
{

class NoPathError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isdq

namespace isdq::nav
{

inline constexpr double kDefaultCellSize = 0.5;
/// Clearance used when rasterizing for planning.
inline constexpr double kDefaultPlanningInflation = 0.1;

struct OccupancyGrid
{
  double cell_size = kDefaultCellSize;
  Vec2 origin;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> blocked;

  int index(int ix, int iy) const { return iy * width + ix; }
  bool in_range(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width && iy < height; }
  bool is_blocked(int ix, int iy) const { return blocked[static_cast<std::size_t>(index(ix, iy))] != 0; }
  Vec2 center(int ix, int iy) const
  {
    return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size};
  }
  Rect cell_rect(int ix, int iy) const
  {
    return {origin.x + ix * cell_size, origin.y + iy * cell_size, origin.x + (ix + 1) * cell_size,
            origin.y + (iy + 1) * cell_size};
  }
  /// Cell containing p, clamped to the grid.
  std::pair<int, int> cell_of(const Vec2& p) const
  {
    int ix = static_cast<int>(std::floor((p.x - origin.x) / cell_size));
    int iy = static_cast<int>(std::floor((p.y - origin.y) / cell_size));
    return {std::clamp(ix, 0, width - 1), std::clamp(iy, 0, height - 1)};
  }
};

/// A cell is blocked iff the obstacle polygon grown by `inflate_radius`
/// overlaps the cell rectangle (interior overlap when the radius is zero).
inline OccupancyGrid rasterize(const scene::ObstacleConfig& config, double cell_size, double inflate_radius)
{
  if (!(cell_size > 0.0)) throw std::invalid_argument("rasterize: cell_size must be > 0");
  OccupancyGrid g;
  g.cell_size = cell_size;
  g.origin = {config.bounds.xmin, config.bounds.ymin};
  g.width = std::max(1, static_cast<int>(std::ceil(config.bounds.width() / cell_size - 1e-9)));
  g.height = std::max(1, static_cast<int>(std::ceil(config.bounds.height() / cell_size - 1e-9)));
  g.blocked.assign(static_cast<std::size_t>(g.width) * g.height, 0);
  for (const auto& poly : config.polygons)
  {
    const Rect bb = bounding_box(poly);
    const int x0 = std::max(0, static_cast<int>(std::floor((bb.xmin - inflate_radius - g.origin.x) / cell_size)) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor((bb.ymin - inflate_radius - g.origin.y) / cell_size)) - 1);
    const int x1 = std::min(g.width - 1, static_cast<int>(std::floor((bb.xmax + inflate_radius - g.origin.x) / cell_size)) + 1);
    const int y1 = std::min(g.height - 1, static_cast<int>(std::floor((bb.ymax + inflate_radius - g.origin.y) / cell_size)) + 1);
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix)
      {
        auto& cell = g.blocked[static_cast<std::size_t>(g.index(ix, iy))];
        if (cell) continue;
        const Rect r = g.cell_rect(ix, iy);
        if (rect_polygon_interiors_overlap(r, poly) ||
            (inflate_radius > 0.0 && rect_polygon_distance(r, poly) < inflate_radius))
          cell = 1;
      }
  }
  return g;
}

/// Path cost a + b*sqrt(2) for `a` straight and `b` diagonal moves, compared
/// exactly so that every optimal planner reports the same value.
struct GridCost
{
  std::int64_t straight = 0;
  std::int64_t diagonal = 0;

  double value() const { return static_cast<double>(straight) + static_cast<double>(diagonal) * std::numbers::sqrt2; }
  GridCost operator+(const GridCost& o) const { return {straight + o.straight, diagonal + o.diagonal}; }
  bool operator==(const GridCost&) const = default;
  friend bool operator<(const GridCost& l, const GridCost& r)
  {
    // l < r  <=>  da < db*sqrt2 with da = l.a - r.a, db = r.b - l.b
    const std::int64_t da = l.straight - r.straight;
    const std::int64_t db = r.diagonal - l.diagonal;
    if (da < 0 && db >= 0) return true;
    if (da >= 0 && db <= 0) return false;
    if (da >= 0) return da * da < 2 * db * db;  // db > 0
    return da * da > 2 * db * db;               // da < 0, db < 0
  }
};

/// Octile distance between cells.
inline GridCost octile(int dx, int dy)
{
  dx = std::abs(dx);
  dy = std::abs(dy);
  return {std::max(dx, dy) - std::min(dx, dy), std::min(dx, dy)};
}

struct PlannedPath
{
  std::vector<Vec2> waypoints;
  std::vector<double> cumulative_length;
  GridCost cost;

  double length() const { return cumulative_length.empty() ? 0.0 : cumulative_length.back(); }
};

/// Neighbor enumeration shared by the planner and its oracle. A diagonal move
/// is allowed unless both orthogonal cells it passes between are blocked.
template <typename Fn>
void for_each_neighbor(const OccupancyGrid& g, int ix, int iy, Fn&& fn)
{
  static constexpr int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  for (int k = 0; k < 8; ++k)
  {
    const int nx = ix + dxs[k];
    const int ny = iy + dys[k];
    if (!g.in_range(nx, ny) || g.is_blocked(nx, ny)) continue;
    const bool diag = k >= 4;
    if (diag && g.is_blocked(nx, iy) && g.is_blocked(ix, ny)) continue;
    fn(nx, ny, diag ? GridCost{0, 1} : GridCost{1, 0});
  }
}

namespace detail
{
inline PlannedPath trace_path(const OccupancyGrid& g, const std::vector<int>& parent, int goal, GridCost cost)
{
  std::vector<int> cells;
  for (int c = goal; c >= 0; c = parent[static_cast<std::size_t>(c)]) cells.push_back(c);
  PlannedPath path;
  path.cost = cost;
  double acc = 0.0;
  for (auto it = cells.rbegin(); it != cells.rend(); ++it)
  {
    const Vec2 p = g.center(*it % g.width, *it / g.width);
    if (!path.waypoints.empty()) acc += distance(path.waypoints.back(), p);
    path.waypoints.push_back(p);
    path.cumulative_length.push_back(acc);
  }
  return path;
}
}  // namespace detail

/// Cost-minimal 8-connected A* with the octile heuristic. Ties on f are
/// broken by lower cell index, so the result is reproducible.
inline PlannedPath plan_astar(const OccupancyGrid& g, const Vec2& start, const Vec2& goal)
{
  const auto [sx, sy] = g.cell_of(start);
  const auto [gx, gy] = g.cell_of(goal);
  if (g.is_blocked(sx, sy)) throw NoPathError("plan_astar: start cell is blocked");
  if (g.is_blocked(gx, gy)) throw NoPathError("plan_astar: goal cell is blocked");
  const int s = g.index(sx, sy);
  const int t = g.index(gx, gy);
  const std::size_t n = g.blocked.size();

  struct Node
  {
    GridCost f;
    int cell;
    bool operator>(const Node& o) const
    {
      if (o.f < f) return true;
      if (f < o.f) return false;
      return cell > o.cell;
    }
  };
  std::vector<GridCost> best(n);
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::uint8_t> closed(n, 0);
  std::vector<int> parent(n, -1);
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  best[static_cast<std::size_t>(s)] = {};
  seen[static_cast<std::size_t>(s)] = 1;
  open.push({octile(gx - sx, gy - sy), s});
  while (!open.empty())
  {
    const Node cur = open.top();
    open.pop();
    const auto cu = static_cast<std::size_t>(cur.cell);
    if (closed[cu]) continue;
    closed[cu] = 1;
    if (cur.cell == t) return detail::trace_path(g, parent, t, best[cu]);
    const int cx = cur.cell % g.width;
    const int cy = cur.cell / g.width;
    for_each_neighbor(g, cx, cy, [&](int nx, int ny, GridCost step) {
      const int nc = g.index(nx, ny);
      const auto nu = static_cast<std::size_t>(nc);
      if (closed[nu]) return;
      const GridCost cand = best[cu] + step;
      if (!seen[nu] || cand < best[nu])
      {
        seen[nu] = 1;
        best[nu] = cand;
        parent[nu] = cur.cell;
        open.push({cand + octile(gx - nx, gy - ny), nc});
      }
    });
  }
  throw NoPathError("plan_astar: goal unreachable");
}

/// A disc-shaped agent as seen by visibility and sensing queries.
struct Disc
{
  Vec2 center;
  double radius = 0.0;
};

/// Obstacle polygons with cached bounding boxes for repeated queries.
class ObstacleIndex
{
 public:
  ObstacleIndex() = default;
  explicit ObstacleIndex(const scene::ObstacleConfig& config) : polygons_(&config.polygons)
  {
    boxes_.reserve(config.polygons.size());
    for (const auto& p : config.polygons) boxes_.push_back(bounding_box(p));
  }

  std::span<const Polygon> polygons() const { return polygons_ ? std::span<const Polygon>(*polygons_) : std::span<const Polygon>{}; }
  const Rect& box(std::size_t k) const { return boxes_[k]; }

  bool segment_blocked(const Vec2& a, const Vec2& b) const
  {
    if (!polygons_) return false;
    const double xmin = std::min(a.x, b.x), xmax = std::max(a.x, b.x);
    const double ymin = std::min(a.y, b.y), ymax = std::max(a.y, b.y);
    for (std::size_t k = 0; k < boxes_.size(); ++k)
    {
      const Rect& bb = boxes_[k];
      if (xmax < bb.xmin || xmin > bb.xmax || ymax < bb.ymin || ymin > bb.ymax) continue;
      if (segment_hits_polygon(a, b, (*polygons_)[k])) return true;
    }
    return false;
  }

 private:
  const std::vector<Polygon>* polygons_ = nullptr;
  std::vector<Rect> boxes_;
};

inline bool segment_hits_discs(std::span<const Disc> agents, const Vec2& from, const Vec2& to)
{
  for (const auto& d : agents)
    if (point_segment_distance(d.center, from, to) <= d.radius) return true;
  return false;
}

inline bool line_of_sight(const ObstacleIndex& obstacles, std::span<const Disc> agents, const Vec2& from,
                          const Vec2& to, bool ignore_agents)
{
  if (obstacles.segment_blocked(from, to)) return false;
  if (!ignore_agents && segment_hits_discs(agents, from, to)) return false;
  return true;
}

/// True iff segment from->to touches no obstacle polygon and, unless
/// `ignore_agents`, no agent disc. Tangency counts as occluded.
inline bool line_of_sight(const scene::ObstacleConfig& config, std::span<const Disc> agents, const Vec2& from,
                          const Vec2& to, bool ignore_agents)
{
  return line_of_sight(ObstacleIndex(config), agents, from, to, ignore_agents);
}

struct EgoState
{
  Vec2 position;
  /// Radians, world frame.
  double heading = 0.0;
};

struct RangeMap
{
  int resolution = 0;
  double max_range = 0.0;
  std::vector<double> distances;
};

/// Ray r points at heading + 2*pi*r/resolution; each reading is the distance
/// to the nearest obstacle edge or agent surface, clamped to max_range.
inline RangeMap range_map(const scene::ObstacleConfig& config, std::span<const Disc> agents, const EgoState& ego,
                          int resolution, double max_range)
{
  if (resolution < 1) throw std::invalid_argument("range_map: resolution must be >= 1");
  RangeMap rm{resolution, max_range, std::vector<double>(static_cast<std::size_t>(resolution), max_range)};
  for (int r = 0; r < resolution; ++r)
  {
    const double angle = ego.heading + 2.0 * std::numbers::pi * r / resolution;
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    double best = max_range;
    for (const auto& poly : config.polygons)
      for (std::size_t i = 0, n = poly.size(); i < n; ++i)
        if (auto t = ray_segment(ego.position, dir, poly[i], poly[(i + 1) % n])) best = std::min(best, *t);
    for (const auto& d : agents)
      if (auto t = ray_circle(ego.position, dir, d.center, d.radius)) best = std::min(best, *t);
    rm.distances[static_cast<std::size_t>(r)] = std::clamp(best, 0.0, max_range);
  }
  return rm;
}

/// Follows a planned route by targeting the farthest visible waypoint.
/// Waypoints before the last returned target are dropped, so the target index
/// never decreases. With `retreat`, an agent pushed back behind a wall, so that
/// no remaining waypoint is in sight, falls back to the latest earlier one that is.
class WaypointTracker
{
 public:
  WaypointTracker() = default;
  explicit WaypointTracker(std::vector<Vec2> waypoints, bool retreat = false)
      : waypoints_(std::move(waypoints)), retreat_(retreat)
  {
    if (waypoints_.empty()) throw std::invalid_argument("WaypointTracker: empty path");
  }

  Vec2 current_target(const Vec2& ego, const ObstacleIndex& obstacles, std::span<const Disc> agents,
                      bool ignore_agents)
  {
    for (std::size_t k = waypoints_.size(); k-- > first_;)
    {
      if (line_of_sight(obstacles, agents, ego, waypoints_[k], ignore_agents))
      {
        first_ = k;
        return waypoints_[k];
      }
    }
    if (retreat_ && first_ > 0 && !any_unblocked(ego, obstacles, first_, waypoints_.size()))
    {
      // Walls, not agents, hide the rest of the route.
      for (std::size_t k = first_; k-- > 0;)
      {
        if (!obstacles.segment_blocked(ego, waypoints_[k]))
        {
          first_ = k;
          return waypoints_[k];
        }
      }
    }
    // Nothing visible: head for the nearest remaining waypoint.
    std::size_t nearest = first_;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = first_; k < waypoints_.size(); ++k)
    {
      const double d = norm_sq(waypoints_[k] - ego);
      if (d < best)
      {
        best = d;
        nearest = k;
      }
    }
    first_ = nearest;
    return waypoints_[nearest];
  }

  Vec2 current_target(const Vec2& ego, const scene::ObstacleConfig& config, std::span<const Disc> agents,
                      bool ignore_agents)
  {
    return current_target(ego, ObstacleIndex(config), agents, ignore_agents);
  }

  std::size_t current_index() const { return first_; }
  std::span<const Vec2> waypoints() const { return waypoints_; }

 private:
  std::vector<Vec2> waypoints_;
  bool any_unblocked(const Vec2& ego, const ObstacleIndex& obstacles, std::size_t from, std::size_t to) const
  {
    for (std::size_t k = from; k < to; ++k)
      if (!obstacles.segment_blocked(ego, waypoints_[k])) return true;
    return false;
  }

  std::size_t first_ = 0;
  bool retreat_ = false;
};

/// Nearest free cell center to p (breadth-first by ring), for snapping task
/// endpoints that fall in inflated cells.
inline std::optional<Vec2> nearest_free_center(const OccupancyGrid& g, const Vec2& p)
{
  const auto [cx, cy] = g.cell_of(p);
  if (!g.is_blocked(cx, cy)) return p;
  const int max_ring = std::max(g.width, g.height);
  for (int ring = 1; ring <= max_ring; ++ring)
  {
    std::optional<Vec2> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int iy = cy - ring; iy <= cy + ring; ++iy)
      for (int ix = cx - ring; ix <= cx + ring; ++ix)
      {
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        if (!g.in_range(ix, iy) || g.is_blocked(ix, iy)) continue;
        const Vec2 c = g.center(ix, iy);
        const double d = norm_sq(c - p);
        if (d < best_d)
        {
          best_d = d;
          best = c;
        }
      }
    if (best) return best;
  }
  return std::nullopt;
}

/// Plans a task's route: A* between (snapped) endpoints with the exact goal
/// appended as the final waypoint.
inline PlannedPath plan_route(const OccupancyGrid& g, const Vec2& start, const Vec2& goal, bool append_goal = true)
{
  const auto s = nearest_free_center(g, start);
  const auto t = nearest_free_center(g, goal);
  if (!s || !t) throw NoPathError("plan_route: no free cell near task endpoints");
  PlannedPath path = plan_astar(g, *s, *t);
  if (append_goal && path.waypoints.back() != goal)
  {
    path.cumulative_length.push_back(path.length() + distance(path.waypoints.back(), goal));
    path.waypoints.push_back(goal);
  }
  return path;
}

}  // namespace isdq::nav
