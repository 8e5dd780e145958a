#pragma once

#include <algorithm>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "isdq/sim.hpp"

namespace isdq::rank
{

inline constexpr double kDefaultLambda = 0.1;

struct RankConfig
{
  double lambda = kDefaultLambda;
};

struct NamedValue
{
  std::string name;
  double value = 0.0;
};

struct PairEstimate
{
  std::string source;
  std::string target;
  double is_mean = 0.0;
  double dq = 0.0;
  double isdq = 0.0;
};

inline double isdq(double is_mean, double dq_value, const RankConfig& cfg = {})
{
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("isdq: lambda must be >= 0");
  return is_mean + cfg.lambda * dq_value;
}

namespace detail
{
inline const NamedValue& argmin(std::span<const NamedValue> v, const char* what)
{
  if (v.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  const NamedValue* best = &v.front();
  for (const auto& x : v)
    if (x.value < best->value || (x.value == best->value && x.name < best->name)) best = &x;
  return *best;
}
}  // namespace detail

/// Source with the smallest DQ.
inline std::string select_source(std::span<const NamedValue> sources)
{
  return detail::argmin(sources, "select_source").name;
}

/// Target with the smallest mean IS.
inline std::string select_target(std::span<const NamedValue> targets)
{
  return detail::argmin(targets, "select_target").name;
}

/// All source x target estimates, ascending by isdq, ties by (source, target).
inline std::vector<PairEstimate> rank_pairs(std::span<const NamedValue> sources, std::span<const NamedValue> targets,
                                            const RankConfig& cfg = {})
{
  if (sources.empty() || targets.empty()) throw std::invalid_argument("rank_pairs: empty input");
  std::vector<PairEstimate> out;
  for (const auto& s : sources)
    for (const auto& t : targets) out.push_back({s.name, t.name, t.value, s.value, isdq(t.value, s.value, cfg)});
  std::ranges::sort(out, [](const PairEstimate& a, const PairEstimate& b) {
    return std::tie(a.isdq, a.source, a.target) < std::tie(b.isdq, b.source, b.target);
  });
  return out;
}

inline nlohmann::ordered_json to_json(std::span<const PairEstimate> pairs, const RankConfig& cfg)
{
  nlohmann::ordered_json j;
  j["lambda"] = cfg.lambda;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  int rank = 1;
  for (const auto& p : pairs)
  {
    nlohmann::ordered_json pj;
    pj["source"] = p.source;
    pj["target"] = p.target;
    pj["is_mean"] = p.is_mean;
    pj["dq"] = p.dq;
    pj["isdq"] = p.isdq;
    pj["rank"] = rank++;
    list.push_back(std::move(pj));
  }
  j["pairs"] = std::move(list);
  return j;
}

inline void write_csv(std::ostream& out, std::span<const PairEstimate> pairs)
{
  out << "source,target,is_mean,dq,isdq,rank\n";
  int rank = 1;
  for (const auto& p : pairs)
    out << p.source << ',' << p.target << ',' << sim::format_number(p.is_mean) << ',' << sim::format_number(p.dq)
        << ',' << sim::format_number(p.isdq) << ',' << rank++ << '\n';
}

}  // namespace isdq::rank
