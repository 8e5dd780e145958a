#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isdq/geometry.hpp"
#include "isdq/scene.hpp"

namespace isdq::scene
{

/// Deterministic uniform doubles from a 64-bit Mersenne Twister; the
/// conversion is spelled out so that results do not depend on the standard
/// library's distribution implementation.
class Rng
{
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  Vec2 point(const Rect& r) { return {uniform(r.xmin, r.xmax), uniform(r.ymin, r.ymax)}; }

 private:
  std::mt19937_64 eng_;
};

inline const std::vector<std::string>& exsd_benchmarks()
{
  static const std::vector<std::string> ids = {"evac1", "evac2", "bottleneck", "concentric", "hallway2", "hallway4"};
  return ids;
}

namespace detail
{
inline constexpr double kSpawnSpacing = 0.8;

inline Task make_task(int id, Vec2 start, Vec2 goal)
{
  Task t;
  t.id = id;
  t.start = start;
  t.goal = goal;
  return t;
}

inline bool far_from_all(const Vec2& p, std::span<const Vec2> taken, double spacing)
{
  for (const auto& q : taken)
    if (norm_sq(p - q) < spacing * spacing) return false;
  return true;
}

/// Rejection-samples a free point in `region` at least `spacing` from `taken`.
inline Vec2 sample_free(Rng& rng, const ObstacleConfig& cfg, const Rect& region, std::span<const Vec2> taken,
                        double spacing, double radius = kDefaultRadius)
{
  for (int attempt = 0; attempt < 10000; ++attempt)
  {
    const Vec2 p = rng.point(region);
    if (in_collision(cfg, p, radius + 0.05)) continue;
    if (!far_from_all(p, taken, spacing)) continue;
    return p;
  }
  throw std::runtime_error("generator: could not place an agent (region too crowded)");
}

/// Room on the left, exit wall with a centered door, open area on the right.
inline Scenario evacuation(const std::string& label, double door, Rng& rng, int index)
{
  constexpr double room_w = 12.0, height = 12.5, wall_t = 0.5, exit_w = 10.0;
  constexpr double door_y = 6.25;
  Scenario s;
  s.name = label + "-" + std::to_string(index);
  s.config.label = label;
  s.config.bounds = {0.0, 0.0, room_w + wall_t + exit_w, height};
  const double x0 = room_w, x1 = room_w + wall_t;
  s.config.polygons.push_back(rect_polygon(x0, 0.0, x1, door_y - door / 2));
  s.config.polygons.push_back(rect_polygon(x0, door_y + door / 2, x1, height));
  const Rect spawn{1.0, 1.0, room_w - 1.0, height - 1.0};
  const Rect goal_region{x1 + 5.0, 2.0, x1 + exit_w - 1.0, height - 2.0};
  std::vector<Vec2> starts, goals;
  for (int i = 0; i < 30; ++i)
  {
    starts.push_back(sample_free(rng, s.config, spawn, starts, kSpawnSpacing));
    goals.push_back(sample_free(rng, s.config, goal_region, goals, kSpawnSpacing));
    s.tasks.push_back(make_task(i, starts.back(), goals.back()));
  }
  return s;
}

/// Open area feeding a long 4.2 m corridor.
inline Scenario bottleneck(Rng& rng, int index)
{
  constexpr double room_w = 12.0, height = 12.5, corridor_len = 20.0, width = 4.2, mid = 6.25;
  Scenario s;
  s.name = "bottleneck-" + std::to_string(index);
  s.config.label = "bottleneck";
  s.config.bounds = {0.0, 0.0, room_w + corridor_len + 8.0, height};
  s.config.polygons.push_back(rect_polygon(room_w, 0.0, room_w + corridor_len, mid - width / 2));
  s.config.polygons.push_back(rect_polygon(room_w, mid + width / 2, room_w + corridor_len, height));
  const Rect spawn{1.0, 1.0, room_w - 1.0, height - 1.0};
  const Rect goal_region{room_w + corridor_len + 2.0, mid - 4.0, room_w + corridor_len + 7.0, mid + 4.0};
  std::vector<Vec2> starts, goals;
  for (int i = 0; i < 30; ++i)
  {
    starts.push_back(sample_free(rng, s.config, spawn, starts, kSpawnSpacing));
    goals.push_back(sample_free(rng, s.config, goal_region, goals, kSpawnSpacing));
    s.tasks.push_back(make_task(i, starts.back(), goals.back()));
  }
  return s;
}

inline Scenario concentric(Rng& rng, int index)
{
  constexpr int n = 20;
  constexpr double margin = 2.0;
  const double radius = rng.uniform(7.0, 9.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi / n);
  Scenario s;
  s.name = "concentric-" + std::to_string(index);
  s.config.label = "concentric";
  const double half = 9.0 + margin;
  s.config.bounds = {-half, -half, half, half};
  for (int i = 0; i < n; ++i)
  {
    const double a = phase + 2.0 * std::numbers::pi * i / n;
    const Vec2 p{radius * std::cos(a), radius * std::sin(a)};
    s.tasks.push_back(make_task(i, p, -p));
  }
  return s;
}

/// Straight 16 m wide hallway; each agent walks to the opposite end.
inline Scenario hallway_two_way(Rng& rng, int index)
{
  constexpr double length = 30.0, width = 16.0, wall_t = 0.5, end_zone = 4.0;
  Scenario s;
  s.name = "hallway2-" + std::to_string(index);
  s.config.label = "hallway2";
  s.config.bounds = {0.0, 0.0, length, width + 2 * wall_t};
  s.config.polygons.push_back(rect_polygon(0.0, 0.0, length, wall_t));
  s.config.polygons.push_back(rect_polygon(0.0, width + wall_t, length, width + 2 * wall_t));
  const Rect left{0.8, wall_t + 0.8, end_zone, width + wall_t - 0.8};
  const Rect right{length - end_zone, wall_t + 0.8, length - 0.8, width + wall_t - 0.8};
  std::vector<Vec2> starts, goals;
  for (int i = 0; i < 30; ++i)
  {
    const bool rightward = rng.uniform() < 0.5;
    starts.push_back(sample_free(rng, s.config, rightward ? left : right, starts, kSpawnSpacing));
    goals.push_back(sample_free(rng, s.config, rightward ? right : left, goals, kSpawnSpacing));
    s.tasks.push_back(make_task(i, starts.back(), goals.back()));
  }
  return s;
}

/// Crossing of two 16 m hallways; agents go from one arm to another.
inline Scenario hallway_four_way(Rng& rng, int index)
{
  constexpr double arm = 8.0, width = 16.0;
  constexpr double size = 2 * arm + width;
  Scenario s;
  s.name = "hallway4-" + std::to_string(index);
  s.config.label = "hallway4";
  s.config.bounds = {0.0, 0.0, size, size};
  s.config.polygons.push_back(rect_polygon(0.0, 0.0, arm, arm));
  s.config.polygons.push_back(rect_polygon(arm + width, 0.0, size, arm));
  s.config.polygons.push_back(rect_polygon(0.0, arm + width, arm, size));
  s.config.polygons.push_back(rect_polygon(arm + width, arm + width, size, size));
  const double lo = arm + 0.8, hi = arm + width - 0.8, depth = 4.0;
  const Rect arms[4] = {
      {0.8, lo, depth, hi},                // west
      {size - depth, lo, size - 0.8, hi},  // east
      {lo, 0.8, hi, depth},                // south
      {lo, size - depth, hi, size - 0.8},  // north
  };
  std::vector<Vec2> starts, goals;
  for (int i = 0; i < 32; ++i)
  {
    const int from = i % 4;
    int to = rng.integer(0, 2);
    if (to >= from) ++to;
    starts.push_back(sample_free(rng, s.config, arms[from], starts, kSpawnSpacing));
    goals.push_back(sample_free(rng, s.config, arms[to], goals, kSpawnSpacing));
    s.tasks.push_back(make_task(i, starts.back(), goals.back()));
  }
  return s;
}
}  // namespace detail

/// Benchmark scenarios with sampled starts and goals.
inline std::vector<Scenario> gen_exsd(const std::string& benchmark, std::uint64_t seed, int count)
{
  if (count < 1) throw std::invalid_argument("gen_exsd: count must be >= 1");
  Rng rng(seed);
  std::vector<Scenario> out;
  for (int k = 0; k < count; ++k)
  {
    if (benchmark == "evac1")
      out.push_back(detail::evacuation("evac1", 2.4, rng, k));
    else if (benchmark == "evac2")
      out.push_back(detail::evacuation("evac2", 1.4, rng, k));
    else if (benchmark == "bottleneck")
      out.push_back(detail::bottleneck(rng, k));
    else if (benchmark == "concentric")
      out.push_back(detail::concentric(rng, k));
    else if (benchmark == "hallway2")
      out.push_back(detail::hallway_two_way(rng, k));
    else if (benchmark == "hallway4")
      out.push_back(detail::hallway_four_way(rng, k));
    else
      throw std::invalid_argument("gen_exsd: unknown benchmark '" + benchmark + "'");
    validate(out.back());
  }
  return out;
}

struct EgrdParams
{
  int n_agents = 25;
  /// Agent count varies uniformly within n_agents +- spread.
  int spread = 3;
  int obstacle_count = 10;
  double obstacle_size = 1.0;
  Rect bounds{0.0, 0.0, 20.0, 20.0};
};

/// Random unit-square obstacles and random start/goal pairs. Every scenario
/// gets its own configuration label.
inline std::vector<Scenario> gen_egrd(std::uint64_t seed, int count, const EgrdParams& p = {})
{
  if (count < 1) throw std::invalid_argument("gen_egrd: count must be >= 1");
  Rng rng(seed);
  std::vector<Scenario> out;
  for (int k = 0; k < count; ++k)
  {
    Scenario s;
    s.name = "egrd-" + std::to_string(k);
    s.config.label = "egrd-" + std::to_string(seed) + "-" + std::to_string(k);
    s.config.bounds = p.bounds;
    const Rect inner{p.bounds.xmin + 1.0, p.bounds.ymin + 1.0, p.bounds.xmax - 1.0 - p.obstacle_size,
                     p.bounds.ymax - 1.0 - p.obstacle_size};
    int attempts = 0;
    while (static_cast<int>(s.config.polygons.size()) < p.obstacle_count)
    {
      if (++attempts > 100000) throw std::runtime_error("gen_egrd: could not place obstacles");
      const Vec2 c = rng.point(inner);
      const Rect r{c.x, c.y, c.x + p.obstacle_size, c.y + p.obstacle_size};
      bool clear = true;
      for (const auto& poly : s.config.polygons)
      {
        const Rect b = bounding_box(poly);
        if (r.xmin < b.xmax + 1.0 && b.xmin < r.xmax + 1.0 && r.ymin < b.ymax + 1.0 && b.ymin < r.ymax + 1.0)
          clear = false;
      }
      if (clear) s.config.polygons.push_back(rect_polygon(r.xmin, r.ymin, r.xmax, r.ymax));
    }
    const int n = std::max(1, p.n_agents + rng.integer(-p.spread, p.spread));
    const Rect region{p.bounds.xmin + 0.5, p.bounds.ymin + 0.5, p.bounds.xmax - 0.5, p.bounds.ymax - 0.5};
    std::vector<Vec2> starts, goals;
    for (int i = 0; i < n; ++i)
    {
      starts.push_back(detail::sample_free(rng, s.config, region, starts, detail::kSpawnSpacing));
      Vec2 g;
      do
        g = detail::sample_free(rng, s.config, region, goals, detail::kSpawnSpacing);
      while (distance(g, starts.back()) < 2.0);
      goals.push_back(g);
      s.tasks.push_back(detail::make_task(i, starts.back(), g));
    }
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline const std::vector<std::string>& hypothesis_tests()
{
  static const std::vector<std::string> ids = {"temporal_accumulation", "consequent_interaction",
                                               "movement_direction"};
  return ids;
}

/// Dimensions of the comparative test scenarios.
struct HypothesisParams
{
  double parallel_length = 60.0;
  double parallel_lateral = 1.5;
  double line_length = 16.0;
  double line_first = 6.0;
  double line_spacing = 1.4;
  double v_spread = 0.6;
  int line_agents = 7;
  double hex_inner = 1.0;
  double hex_outer = 7.0;
};

/// The (scenario 1, scenario 2) pair of a comparative test.
inline std::pair<Scenario, Scenario> gen_hypothesis(const std::string& test, const HypothesisParams& p = {})
{
  Scenario a, b;
  if (test == "temporal_accumulation")
  {
    // Side by side vs head-on along the same line.
    const double len = p.parallel_length, lateral = p.parallel_lateral;
    const Rect bounds{-2.0, -5.0, len + 2.0, 5.0};
    a.config = {"open", {}, bounds};
    b.config = a.config;
    a.tasks = {detail::make_task(0, {0.0, -lateral / 2}, {len, -lateral / 2}),
               detail::make_task(1, {0.0, lateral / 2}, {len, lateral / 2})};
    b.tasks = {detail::make_task(0, {0.0, 0.0}, {len, 0.0}), detail::make_task(1, {len, 0.0}, {0.0, 0.0})};
  }
  else if (test == "consequent_interaction")
  {
    // Agent 0 walks right; the others walk left, keeping their queue or V shape.
    const double first = p.line_first, spacing = p.line_spacing, spread = p.v_spread;
    const int others = p.line_agents;
    const double len = std::max(p.line_length, first + spacing * (others - 1) + 3.0);
    const double shift = first + 2.0;
    const Rect bounds{-shift - 1.0, -2.0 - spread * others, len + 2.0, 2.0 + spread * others};
    a.config = {"open", {}, bounds};
    b.config = a.config;
    a.tasks.push_back(detail::make_task(0, {0.0, 0.0}, {len, 0.0}));
    b.tasks.push_back(a.tasks.front());
    for (int k = 0; k < others; ++k)
    {
      const double x = first + spacing * k;
      a.tasks.push_back(detail::make_task(k + 1, {x, 0.0}, {x - shift, 0.0}));
      // V opening to the right: apex first, then alternating arms.
      const int rung = (k + 1) / 2;
      const double y = (k == 0) ? 0.0 : (k % 2 ? 1.0 : -1.0) * spread * rung;
      const double xv = first + spacing * rung;
      b.tasks.push_back(detail::make_task(k + 1, {xv, y}, {xv - shift, y}));
    }
  }
  else if (test == "movement_direction")
  {
    // Tight hexagon to an outer ring, and the reverse.
    const double inner = p.hex_inner, outer = p.hex_outer;
    const Rect bounds{-outer - 2.0, -outer - 2.0, outer + 2.0, outer + 2.0};
    a.config = {"open", {}, bounds};
    b.config = a.config;
    for (int k = 0; k < 6; ++k)
    {
      const double ang = std::numbers::pi / 3.0 * k;
      const Vec2 d{std::cos(ang), std::sin(ang)};
      a.tasks.push_back(detail::make_task(k, d * inner, d * outer));
      b.tasks.push_back(detail::make_task(k, d * outer, d * inner));
    }
  }
  else
    throw std::invalid_argument("gen_hypothesis: unknown test '" + test + "'");
  a.name = test + "-1";
  b.name = test + "-2";
  validate(a);
  validate(b);
  return {std::move(a), std::move(b)};
}

struct GapStudyParams
{
  double block_width = 6.0;
  double block_height = 4.0;
  double world = 24.0;
};

/// Two blocks separated by a horizontal gap around the world center. Agent 0
/// crosses diagonally up through the gap while three agents cross diagonally
/// down; only the gap changes between scenarios.
inline std::vector<Scenario> gen_gap_study(std::span<const double> gaps, const GapStudyParams& p = {})
{
  std::vector<Scenario> out;
  const double c = p.world / 2;
  for (double gap : gaps)
  {
    if (!(gap >= 2 * kDefaultRadius)) throw std::invalid_argument("gen_gap_study: gap smaller than an agent");
    if (gap / 2 + p.block_width > c) throw std::invalid_argument("gen_gap_study: gap too wide for the world");
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), gap);
    Scenario s;
    s.name = "gap-" + std::string(buf, end);
    s.config.label = s.name;
    s.config.bounds = {0.0, 0.0, p.world, p.world};
    const double y0 = c - p.block_height / 2, y1 = c + p.block_height / 2;
    s.config.polygons.push_back(rect_polygon(c - gap / 2 - p.block_width, y0, c - gap / 2, y1));
    s.config.polygons.push_back(rect_polygon(c + gap / 2, y0, c + gap / 2 + p.block_width, y1));
    s.tasks.push_back(detail::make_task(0, {c - 8.0, c - 8.0}, {c + 8.0, c + 8.0}));
    const Vec2 offsets[3] = {{-0.8, 0.8}, {0.8, -0.8}, {0.0, 0.0}};
    for (int k = 0; k < 3; ++k)
    {
      const Vec2 o = offsets[k];
      s.tasks.push_back(detail::make_task(k + 1, Vec2{c + 7.0, c + 7.0} + o, Vec2{c - 7.0, c - 7.0} + o));
    }
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace isdq::scene
