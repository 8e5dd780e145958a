#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "isdq/scene.hpp"

namespace isdq::scene
{

namespace detail
{
using ojson = nlohmann::ordered_json;

inline Vec2 read_vec2(const ojson& j, const std::string& where)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ojson write_vec2(const Vec2& v) { return ojson::array({v.x, v.y}); }

template <typename T>
T read_field(const ojson& obj, const char* key, const std::string& where, const T& fallback, bool required)
{
  auto it = obj.find(key);
  if (it == obj.end())
  {
    if (required) throw ParseError(where + "." + key + ": missing");
    return fallback;
  }
  try
  {
    if constexpr (std::is_same_v<T, int>)
    {
      if (!it->is_number_integer()) throw ParseError(where + "." + key + ": expected integer");
    }
    else if constexpr (std::is_same_v<T, double>)
    {
      if (!it->is_number()) throw ParseError(where + "." + key + ": expected number");
    }
    else if constexpr (std::is_same_v<T, std::string>)
    {
      if (!it->is_string()) throw ParseError(where + "." + key + ": expected string");
    }
    return it->template get<T>();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

inline Scenario from_json(const ojson& doc)
{
  if (!doc.is_object()) throw ParseError("document: expected a JSON object");
  Scenario s;
  s.name = read_field<std::string>(doc, "name", "scenario", "", true);

  auto cfg_it = doc.find("config");
  if (cfg_it == doc.end() || !cfg_it->is_object()) throw ParseError("config: missing or not an object");
  const ojson& cfg = *cfg_it;
  s.config.label = read_field<std::string>(cfg, "label", "config", "", true);
  auto b_it = cfg.find("bounds");
  if (b_it == cfg.end() || !b_it->is_array() || b_it->size() != 4)
    throw ParseError("config.bounds: expected [xmin, ymin, xmax, ymax]");
  for (const auto& v : *b_it)
    if (!v.is_number()) throw ParseError("config.bounds: expected numbers");
  s.config.bounds = {(*b_it)[0].get<double>(), (*b_it)[1].get<double>(), (*b_it)[2].get<double>(),
                     (*b_it)[3].get<double>()};
  if (auto p_it = cfg.find("polygons"); p_it != cfg.end())
  {
    if (!p_it->is_array()) throw ParseError("config.polygons: expected an array");
    for (std::size_t k = 0; k < p_it->size(); ++k)
    {
      const auto& pj = (*p_it)[k];
      const std::string where = "config.polygons[" + std::to_string(k) + "]";
      if (!pj.is_array()) throw ParseError(where + ": expected an array of points");
      Polygon poly;
      for (std::size_t v = 0; v < pj.size(); ++v)
        poly.push_back(read_vec2(pj[v], where + "[" + std::to_string(v) + "]"));
      s.config.polygons.push_back(std::move(poly));
    }
  }

  auto t_it = doc.find("tasks");
  if (t_it == doc.end() || !t_it->is_array()) throw ParseError("tasks: missing or not an array");
  for (std::size_t k = 0; k < t_it->size(); ++k)
  {
    const auto& tj = (*t_it)[k];
    const std::string where = "tasks[" + std::to_string(k) + "]";
    if (!tj.is_object()) throw ParseError(where + ": expected an object");
    Task t;
    t.id = read_field<int>(tj, "id", where, 0, true);
    const std::string tw = "task " + std::to_string(t.id);
    if (!tj.contains("start")) throw ParseError(tw + ".start: missing");
    if (!tj.contains("goal")) throw ParseError(tw + ".goal: missing");
    t.start = read_vec2(tj["start"], tw + ".start");
    t.goal = read_vec2(tj["goal"], tw + ".goal");
    t.start_time = read_field<double>(tj, "start_time", tw, kDefaultStartTime, false);
    t.max_steps = read_field<int>(tj, "max_steps", tw, kDefaultMaxSteps, false);
    t.radius = read_field<double>(tj, "radius", tw, kDefaultRadius, false);
    if (auto d = tj.find("degenerate"); d != tj.end())
    {
      if (!d->is_boolean()) throw ParseError(tw + ".degenerate: expected boolean");
      t.degenerate = d->get<bool>();
    }
    s.tasks.push_back(t);
  }
  return canonical(std::move(s));
}

inline ojson to_json(const Scenario& input)
{
  const Scenario s = canonical(input);
  ojson doc;
  doc["name"] = s.name;
  ojson cfg;
  cfg["label"] = s.config.label;
  const Rect& b = s.config.bounds;
  cfg["bounds"] = ojson::array({b.xmin, b.ymin, b.xmax, b.ymax});
  ojson polys = ojson::array();
  for (const auto& poly : s.config.polygons)
  {
    ojson pj = ojson::array();
    for (const auto& v : poly) pj.push_back(write_vec2(v));
    polys.push_back(std::move(pj));
  }
  cfg["polygons"] = std::move(polys);
  doc["config"] = std::move(cfg);
  ojson tasks = ojson::array();
  for (const auto& t : s.tasks)
  {
    ojson tj;
    tj["id"] = t.id;
    tj["start"] = write_vec2(t.start);
    tj["goal"] = write_vec2(t.goal);
    tj["start_time"] = t.start_time;
    tj["max_steps"] = t.max_steps;
    tj["radius"] = t.radius;
    if (t.degenerate) tj["degenerate"] = true;
    tasks.push_back(std::move(tj));
  }
  doc["tasks"] = std::move(tasks);
  return doc;
}
}  // namespace detail

/// Parses and validates a scenario document.
inline Scenario load_scenario(std::string_view text)
{
  detail::ojson doc;
  try
  {
    doc = detail::ojson::parse(text);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  Scenario s = detail::from_json(doc);
  validate(s);
  return s;
}

/// Canonical serialization: tasks in id order, fixed key order, shortest
/// round-trip number formatting, trailing newline.
inline std::string save_scenario(const Scenario& s) { return detail::to_json(s).dump(2) + "\n"; }

inline Scenario load_scenario_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

inline void save_scenario_file(const Scenario& s, const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << save_scenario(s);
}

}  // namespace isdq::scene
