#pragma once

// Slow reference implementations shared by the unit tests and the acceptance run.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <vector>

#include "isdq/nav.hpp"
#include "isdq/traj.hpp"

namespace oracle
{

inline long double entropy(const std::map<std::vector<int>, int>& counts, int m)
{
  long double h = 0;
  for (const auto& [key, c] : counts)
  {
    const long double p = static_cast<long double>(c) / m;
    h -= p * std::log2(p);
  }
  return h;
}

struct Entropies
{
  long double x, rest, joint;
};

/// H(K_i), H(K_{-i}) and H(K) from raw row counts.
inline Entropies entropies(const isdq::traj::ModeTable& t, int i)
{
  std::map<std::vector<int>, int> cx, cr, cj;
  for (int j = 0; j < t.m; ++j)
  {
    std::vector<int> row, rest;
    for (int c = 0; c < t.n; ++c)
    {
      row.push_back(t.at(j, c));
      if (c != i) rest.push_back(t.at(j, c));
    }
    ++cx[{t.at(j, i)}];
    ++cr[rest];
    ++cj[row];
  }
  return {entropy(cx, t.m), entropy(cr, t.m), entropy(cj, t.m)};
}

/// I(K_i; K_{-i}) = H(K_i) + H(K_{-i}) - H(K).
inline long double mutual_information(const isdq::traj::ModeTable& t, int i)
{
  const Entropies e = entropies(t, i);
  return e.x + e.rest - e.joint;
}

/// Plain Dijkstra with floating costs; a diagonal step is barred only when
/// both cells it squeezes between are blocked.
inline double dijkstra(const isdq::nav::OccupancyGrid& g, int s, int t)
{
  const int n = g.width * g.height;
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  auto blocked = [&](int x, int y) { return g.blocked[static_cast<std::size_t>(y * g.width + x)] != 0; };
  dist[static_cast<std::size_t>(s)] = 0.0;
  q.push({0.0, s});
  while (!q.empty())
  {
    const auto [d, c] = q.top();
    q.pop();
    if (d > dist[static_cast<std::size_t>(c)]) continue;
    const int x = c % g.width, y = c / g.width;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
      {
        if (!dx && !dy) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= g.width || ny >= g.height || blocked(nx, ny)) continue;
        if (dx && dy && blocked(nx, y) && blocked(x, ny)) continue;
        const double nd = d + ((dx && dy) ? std::numbers::sqrt2 : 1.0);
        auto& slot = dist[static_cast<std::size_t>(ny * g.width + nx)];
        if (nd < slot)
        {
          slot = nd;
          q.push({nd, ny * g.width + nx});
        }
      }
  }
  return dist[static_cast<std::size_t>(t)];
}

/// Minimum over every monotone warp path, by exhaustive recursion.
inline double warp(const std::vector<isdq::Vec2>& a, const std::vector<isdq::Vec2>& b)
{
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> double {
    const double c = isdq::distance(a[i], b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) return c;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < a.size()) best = std::min(best, go(i + 1, j));
    if (j + 1 < b.size()) best = std::min(best, go(i, j + 1));
    if (i + 1 < a.size() && j + 1 < b.size()) best = std::min(best, go(i + 1, j + 1));
    return c + best;
  };
  return go(0, 0);
}

}  // namespace oracle
