#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "isdq/scene.hpp"

namespace isdq::diversity
{

inline constexpr int kDefaultCellsPerSide = 10;

/// Uniform cells over a scenario's bounds, scaled so the longer side is 1.
struct CellGrid
{
  int cells_per_side = kDefaultCellsPerSide;

  int cell(const Vec2& p, const Rect& bounds) const
  {
    const double scale = std::max(bounds.width(), bounds.height());
    auto axis = [&](double v, double lo) {
      const int k = static_cast<int>(std::floor((v - lo) / scale * cells_per_side));
      return std::clamp(k, 0, cells_per_side - 1);
    };
    return axis(p.y, bounds.ymin) * cells_per_side + axis(p.x, bounds.xmin);
  }
};

struct DqReport
{
  std::string domain;
  double h_env = 0.0;
  double h_id_given_env = 0.0;
  double h_joint = 0.0;
  double dq = 0.0;
  int cells_per_side = kDefaultCellsPerSide;
  std::map<std::string, int> label_counts;
};

/// Entropy in bits of the empirical distribution given by `counts`.
template <typename Map>
double entropy_of_counts(const Map& counts)
{
  double total = 0.0;
  for (const auto& [k, c] : counts) total += static_cast<double>(c);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto& [k, c] : counts)
  {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

inline double env_entropy(std::span<const std::string> labels)
{
  if (labels.empty()) throw std::invalid_argument("env_entropy: empty label list");
  std::map<std::string, int> counts;
  for (const auto& l : labels) ++counts[l];
  return entropy_of_counts(counts);
}

/// A task's (start, goal) located in its scenario's bounds.
struct PlacedTask
{
  Vec2 start;
  Vec2 goal;
  Rect bounds;
};

/// Joint entropy of (start cell, goal cell) over pooled tasks.
inline double start_goal_entropy(std::span<const PlacedTask> tasks, const CellGrid& grid)
{
  if (tasks.empty()) throw std::invalid_argument("start_goal_entropy: no tasks");
  if (grid.cells_per_side < 1) throw std::invalid_argument("start_goal_entropy: cells_per_side must be >= 1");
  std::map<std::pair<int, int>, int> counts;
  for (const auto& t : tasks) ++counts[{grid.cell(t.start, t.bounds), grid.cell(t.goal, t.bounds)}];
  return entropy_of_counts(counts);
}

/// H(I,D,E) = H(E) + sum_l p(e_l) H(I,D | e_l); DQ = -H(I,D,E).
inline DqReport dq(const scene::DomainSample& domain, const CellGrid& grid = {})
{
  if (domain.scenarios.empty()) throw std::invalid_argument("dq: empty domain");
  DqReport r;
  r.domain = domain.name;
  r.cells_per_side = grid.cells_per_side;
  std::map<std::string, std::vector<PlacedTask>> pooled;
  std::vector<std::string> labels;
  for (const auto& s : domain.scenarios)
  {
    labels.push_back(s.config.label);
    ++r.label_counts[s.config.label];
    auto& bucket = pooled[s.config.label];
    for (const auto& t : s.tasks) bucket.push_back({t.start, t.goal, s.config.bounds});
  }
  r.h_env = env_entropy(labels);
  const double total = static_cast<double>(domain.scenarios.size());
  for (const auto& [label, tasks] : pooled)
    r.h_id_given_env += r.label_counts[label] / total * start_goal_entropy(tasks, grid);
  r.h_joint = r.h_env + r.h_id_given_env;
  r.dq = -r.h_joint;
  return r;
}

inline nlohmann::ordered_json to_json(const DqReport& r)
{
  nlohmann::ordered_json j;
  j["domain"] = r.domain;
  j["h_env"] = r.h_env;
  j["h_id_given_env"] = r.h_id_given_env;
  j["h_joint"] = r.h_joint;
  j["dq"] = r.dq;
  j["cells_per_side"] = r.cells_per_side;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [label, c] : r.label_counts) counts[label] = c;
  j["label_counts"] = std::move(counts);
  return j;
}

}  // namespace isdq::diversity
