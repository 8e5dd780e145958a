#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isdq/nav.hpp"
#include "oracles.hpp"

using namespace isdq;
using namespace isdq::nav;

namespace
{
OccupancyGrid empty_grid(int w, int h, double cell = 1.0)
{
  OccupancyGrid g;
  g.cell_size = cell;
  g.width = w;
  g.height = h;
  g.blocked.assign(static_cast<std::size_t>(w * h), 0);
  return g;
}

}  // namespace

TEST(Rasterize, EmptyAndFullCover)
{
  scene::ObstacleConfig empty{"e", {}, {0, 0, 5, 5}};
  const auto g = rasterize(empty, 0.5, 0.0);
  EXPECT_EQ(g.width, 10);
  EXPECT_EQ(std::ranges::count(g.blocked, 1), 0);
  scene::ObstacleConfig full{"f", {rect_polygon(0, 0, 5, 5)}, {0, 0, 5, 5}};
  EXPECT_EQ(std::ranges::count(rasterize(full, 0.5, 0.0).blocked, 0), 0);
}

TEST(Rasterize, UnitSquareCoversFourCells)
{
  scene::ObstacleConfig c{"sq", {rect_polygon(2, 2, 3, 3)}, {0, 0, 5, 5}};
  const auto g = rasterize(c, 0.5, 0.0);
  int count = 0;
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (g.is_blocked(x, y))
      {
        ++count;
        EXPECT_TRUE(x >= 4 && x <= 5 && y >= 4 && y <= 5) << x << "," << y;
      }
  EXPECT_EQ(count, 4);
}

TEST(Astar, SmallFixtures)
{
  auto g = empty_grid(3, 3);
  auto p = plan_astar(g, g.center(1, 1), g.center(1, 1));
  EXPECT_EQ(p.waypoints.size(), 1u);
  EXPECT_EQ(p.length(), 0.0);
  p = plan_astar(g, g.center(0, 0), g.center(2, 2));
  EXPECT_DOUBLE_EQ(p.cost.value(), 2 * std::numbers::sqrt2);
  g.blocked[4] = 1;
  p = plan_astar(g, g.center(0, 0), g.center(2, 2));
  EXPECT_DOUBLE_EQ(p.cost.value(), 2 + std::numbers::sqrt2);
  EXPECT_DOUBLE_EQ(p.cost.value(), oracle::dijkstra(g, 0, 8));
}

TEST(Astar, MatchesDijkstraOnRandomGrids)
{
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution wall(0.3);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial)
  {
    auto g = empty_grid(20, 20);
    for (auto& b : g.blocked) b = wall(rng) ? 1 : 0;
    std::uniform_int_distribution<int> cell(0, 399);
    const int s = cell(rng), t = cell(rng);
    g.blocked[static_cast<std::size_t>(s)] = 0;
    g.blocked[static_cast<std::size_t>(t)] = 0;
    const double oracle = oracle::dijkstra(g, s, t);
    const Vec2 a = g.center(s % 20, s / 20), b = g.center(t % 20, t / 20);
    if (std::isinf(oracle))
    {
      EXPECT_THROW(plan_astar(g, a, b), NoPathError);
      continue;
    }
    const auto p = plan_astar(g, a, b);
    ++solved;
    EXPECT_NEAR(p.cost.value(), oracle, 1e-9) << "trial " << trial;
    for (const auto& w : p.waypoints)
    {
      const auto [x, y] = g.cell_of(w);
      EXPECT_FALSE(g.is_blocked(x, y));
    }
  }
  EXPECT_GT(solved, 100);
}

TEST(Astar, UnreachableAndBlockedEndpoints)
{
  auto g = empty_grid(5, 1);
  g.blocked[2] = 1;
  EXPECT_THROW(plan_astar(g, g.center(0, 0), g.center(4, 0)), NoPathError);
  EXPECT_THROW(plan_astar(g, g.center(2, 0), g.center(4, 0)), NoPathError);
}

TEST(LineOfSight, Cases)
{
  scene::ObstacleConfig open{"o", {}, {0, 0, 10, 10}};
  EXPECT_TRUE(line_of_sight(open, {}, {1, 1}, {9, 9}, false));
  scene::ObstacleConfig wall{"w", {rect_polygon(4, 0, 5, 10)}, {0, 0, 10, 10}};
  EXPECT_FALSE(line_of_sight(wall, {}, {1, 5}, {9, 5}, false));
  // Disc tangent to the segment: occluded.
  const std::vector<Disc> tangent{{{5, 1.5}, 0.5}};
  EXPECT_FALSE(line_of_sight(open, tangent, {1, 1}, {9, 1}, false));
  EXPECT_TRUE(line_of_sight(open, tangent, {1, 1}, {9, 1}, true));
  const std::vector<Disc> clear{{{5, 1.51}, 0.5}};
  EXPECT_TRUE(line_of_sight(open, clear, {1, 1}, {9, 1}, false));
}

TEST(RangeMap, Readings)
{
  scene::ObstacleConfig open{"o", {}, {-10, -10, 10, 10}};
  const auto empty = range_map(open, {}, {{0, 0}, 0.0}, 16, 5.0);
  for (double d : empty.distances) EXPECT_EQ(d, 5.0);

  scene::ObstacleConfig wall{"w", {rect_polygon(2, -5, 3, 5)}, {-10, -10, 10, 10}};
  EXPECT_NEAR(range_map(wall, {}, {{0, 0}, 0.0}, 8, 10.0).distances[0], 2.0, 1e-12);

  const std::vector<Disc> nb{{{1, 0}, 0.3}};
  EXPECT_NEAR(range_map(open, nb, {{0, 0}, 0.0}, 8, 10.0).distances[0], 0.7, 1e-12);
  EXPECT_THROW(range_map(open, {}, {{0, 0}, 0.0}, 0, 1.0), std::invalid_argument);
}

TEST(RangeMap, RotationPermutesRays)
{
  // Rotating world and heading by a multiple of the ray step permutes nothing
  // once rays are indexed relative to the heading.
  const Polygon box = rect_polygon(2, -1, 3, 1);
  const std::vector<Disc> agents{{{-1.5, 0.5}, 0.3}};
  scene::ObstacleConfig a{"a", {box}, {-10, -10, 10, 10}};
  const int res = 12;
  const double step = 2 * std::numbers::pi / res;
  const auto base = range_map(a, agents, {{0, 0}, 0.0}, res, 8.0);
  for (int k = 1; k < res; ++k)
  {
    const double ang = k * step;
    Polygon rbox;
    for (const auto& v : box) rbox.push_back(rotated(v, ang));
    const std::vector<Disc> ragents{{rotated(agents[0].center, ang), 0.3}};
    scene::ObstacleConfig b{"b", {rbox}, {-10, -10, 10, 10}};
    const auto rot = range_map(b, ragents, {{0, 0}, ang}, res, 8.0);
    for (int r = 0; r < res; ++r) EXPECT_NEAR(rot.distances[r], base.distances[r], 1e-9) << k << "/" << r;
  }
}

TEST(Tracker, FarthestVisibleAndMonotone)
{
  scene::ObstacleConfig open{"o", {}, {-1, -1, 20, 10}};
  std::vector<Vec2> line;
  for (int k = 0; k <= 10; ++k) line.push_back({double(k), 0});
  WaypointTracker straight(line);
  EXPECT_EQ(straight.current_target({0, 0}, open, {}, false), line.back());

  // A wall hides everything past index 2 from the start.
  scene::ObstacleConfig occl{"w", {rect_polygon(2.5, -1, 3, 4)}, {-1, -4, 20, 10}};
  std::vector<Vec2> bend{{0, 0}, {1, 0}, {2, 0}, {3.5, 0}, {3.5, 3}, {6, 3}};
  WaypointTracker t(bend);
  t.current_target({0, 0}, occl, {}, false);
  EXPECT_EQ(t.current_index(), 2u);

  // Once index k is targeted, earlier waypoints are gone even when visible.
  WaypointTracker m(line);
  m.current_target({5, 0}, occl, {}, false);
  const std::size_t k = m.current_index();
  std::size_t last = k;
  for (double x = 5; x >= 0; x -= 0.5)
  {
    m.current_target({x, 0}, occl, {}, false);
    EXPECT_GE(m.current_index(), last);
    last = m.current_index();
  }
}

TEST(Tracker, IndexNonDecreasingOnRandomWalks)
{
  scene::ObstacleConfig c{"w", {rect_polygon(3, 1, 4, 6)}, {0, 0, 10, 10}};
  std::vector<Vec2> route{{1, 3}, {2, 0.5}, {4.5, 0.5}, {5, 3}, {8, 8}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 9.8);
  for (int trial = 0; trial < 50; ++trial)
  {
    WaypointTracker t(route);
    std::size_t last = 0;
    for (int step = 0; step < 40; ++step)
    {
      Vec2 p{u(rng), u(rng)};
      if (p.x > 3 && p.x < 4 && p.y > 1 && p.y < 6) continue;
      t.current_target(p, c, {}, false);
      EXPECT_GE(t.current_index(), last);
      last = t.current_index();
    }
  }
}

TEST(Tracker, RetreatFallsBackBehindWall)
{
  // Wall with a door at y in [4,6]; the agent targeted the far side, then got
  // pushed back so only the approach waypoint is in sight.
  scene::ObstacleConfig c{"door", {rect_polygon(5, 0, 5.5, 4), rect_polygon(5, 6, 5.5, 10)}, {0, 0, 12, 10}};
  std::vector<Vec2> route{{1, 1}, {4, 5}, {6.5, 5}, {10, 5}, {10, 9}};
  WaypointTracker t(route, true);
  t.current_target({6, 5}, c, {}, false);
  EXPECT_GE(t.current_index(), 3u);
  t.current_target({4.5, 1}, c, {}, false);
  EXPECT_EQ(t.current_index(), 1u);
}

TEST(PlanRoute, SnapsEndpointsAndAppendsGoal)
{
  scene::ObstacleConfig c{"w", {rect_polygon(4, 0, 5, 8)}, {0, 0, 10, 10}};
  const auto g = rasterize(c, 0.5, 0.3);
  const Vec2 start{3.5, 1}, goal{5.6, 1};
  const auto p = plan_route(g, start, goal);
  EXPECT_EQ(p.waypoints.back(), goal);
  const auto cells = plan_route(g, start, goal, false);
  EXPECT_NE(cells.waypoints.back(), goal);
  for (std::size_t k = 1; k < p.cumulative_length.size(); ++k)
    EXPECT_GE(p.cumulative_length[k], p.cumulative_length[k - 1]);
}
