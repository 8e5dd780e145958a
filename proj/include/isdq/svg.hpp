#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isdq/scene.hpp"
#include "isdq/sim.hpp"
#include "isdq/traj.hpp"

namespace isdq::svg
{

struct Style
{
  double width_px = 800.0;
  double margin_px = 24.0;
};

namespace detail
{
inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
inline constexpr const char* kOutlier = "#b0b0b0";

inline std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

inline std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s)
  {
    switch (c)
    {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* color(int k) { return k <= 0 ? kOutlier : kPalette[(k - 1) % 10]; }

/// World to pixel mapping with y pointing up.
struct Frame
{
  Rect world;
  double scale = 1.0;
  double margin = 0.0;
  double width = 0.0;
  double height = 0.0;

  Frame(const Rect& w, const Style& st) : world(w), margin(st.margin_px)
  {
    const double span = std::max(w.width(), w.height());
    if (!(span > 0.0)) throw std::invalid_argument("svg: degenerate bounds");
    scale = (st.width_px - 2 * margin) / span;
    width = w.width() * scale + 2 * margin;
    height = w.height() * scale + 2 * margin;
  }
  double px(double x) const { return margin + (x - world.xmin) * scale; }
  double py(double y) const { return height - margin - (y - world.ymin) * scale; }
  std::string point(const Vec2& p) const { return fmt(px(p.x)) + "," + fmt(py(p.y)); }
};

inline std::string header(double w, double h)
{
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}
}  // namespace detail

/// Obstacles, starts (circles), goals (triangles) and one polyline per
/// (agent, run). With `modes`, each polyline takes the color of its mode
/// index; otherwise the color of its agent.
inline std::string scenario_view(const scene::Scenario& s, std::span<const sim::CsvRun> runs = {},
                                 const traj::ModeTable* modes = nullptr, const Style& st = {})
{
  using detail::fmt;
  const detail::Frame f(s.config.bounds, st);
  std::string out = detail::header(f.width, f.height);
  out += "<title>" + detail::escape(s.name) + "</title>\n";
  out += "<rect x=\"" + fmt(f.px(s.config.bounds.xmin)) + "\" y=\"" + fmt(f.py(s.config.bounds.ymax)) +
         "\" width=\"" + fmt(s.config.bounds.width() * f.scale) + "\" height=\"" +
         fmt(s.config.bounds.height() * f.scale) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& poly : s.config.polygons)
  {
    out += "<polygon class=\"obstacle\" fill=\"#333333\" points=\"";
    for (std::size_t k = 0; k < poly.size(); ++k) out += (k ? " " : "") + f.point(poly[k]);
    out += "\"/>\n";
  }

  std::map<int, int> column;
  if (modes)
    for (int i = 0; i < modes->n; ++i) column[modes->agent_ids[static_cast<std::size_t>(i)]] = i;
  std::map<int, int> agent_rank;
  for (std::size_t i = 0; i < s.tasks.size(); ++i) agent_rank[s.tasks[i].id] = static_cast<int>(i);
  for (const auto& run : runs)
    for (const auto& t : run.trajectories)
    {
      int k = agent_rank.contains(t.agent_id) ? agent_rank[t.agent_id] + 1 : 1;
      if (modes)
      {
        const auto it = column.find(t.agent_id);
        const int j = run.param_index - 1;
        if (it == column.end() || j < 0 || j >= modes->m)
          throw std::invalid_argument("svg: no mode index for agent " + std::to_string(t.agent_id) + " in run " +
                                      std::to_string(run.param_index));
        k = modes->at(j, it->second);
      }
      out += "<polyline fill=\"none\" stroke-width=\"1\" stroke-opacity=\"0.6\" stroke=\"" +
             std::string(detail::color(k)) + "\" points=\"";
      for (std::size_t q = 0; q < t.samples.size(); ++q) out += (q ? " " : "") + f.point(t.samples[q].position);
      out += "\"/>\n";
    }

  for (std::size_t i = 0; i < s.tasks.size(); ++i)
  {
    const auto& task = s.tasks[i];
    const char* c = detail::color(static_cast<int>(i) + 1);
    out += "<circle class=\"start\" cx=\"" + fmt(f.px(task.start.x)) + "\" cy=\"" + fmt(f.py(task.start.y)) +
           "\" r=\"" + fmt(task.radius * f.scale) + "\" fill=\"" + c + "\"/>\n";
    const double r = std::max(task.radius * f.scale, 3.0);
    const double gx = f.px(task.goal.x), gy = f.py(task.goal.y);
    out += "<polygon class=\"goal\" fill=\"" + std::string(c) + "\" points=\"" + fmt(gx) + "," + fmt(gy - r) + " " +
           fmt(gx - r) + "," + fmt(gy + r) + " " + fmt(gx + r) + "," + fmt(gy + r) + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

struct BoxStats
{
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
inline BoxStats box_stats(std::span<const double> values)
{
  if (values.empty()) throw std::invalid_argument("box_stats: empty group");
  std::vector<double> v(values.begin(), values.end());
  std::ranges::sort(v);
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {v.front(), q(0.25), q(0.5), q(0.75), v.back()};
}

struct BoxGroup
{
  std::string name;
  std::vector<double> values;
};

/// One box per group, whiskers at min and max, in the given order.
inline std::string box_plot(std::span<const BoxGroup> groups, const std::string& y_label, const Style& st = {})
{
  using detail::fmt;
  if (groups.empty()) throw std::invalid_argument("box_plot: no groups");
  std::vector<BoxStats> stats;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& g : groups)
  {
    stats.push_back(box_stats(g.values));
    lo = std::min(lo, stats.back().min);
    hi = std::max(hi, stats.back().max);
  }
  if (hi - lo < 1e-9)
  {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double left = st.margin_px + 40.0, bottom = st.margin_px + 30.0;
  const double w = st.width_px, h = st.width_px * 0.6;
  const double plot_w = w - left - st.margin_px, plot_h = h - bottom - st.margin_px;
  auto y = [&](double v) { return st.margin_px + (hi - v) / (hi - lo) * plot_h; };
  const double slot = plot_w / static_cast<double>(groups.size());

  std::string out = detail::header(w, h);
  out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(st.margin_px) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
         fmt(st.margin_px + plot_h) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(st.margin_px + plot_h) + "\" x2=\"" + fmt(left + plot_w) +
         "\" y2=\"" + fmt(st.margin_px + plot_h) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k)
  {
    const double v = lo + (hi - lo) * k / 4.0;
    out += "<text x=\"" + fmt(left - 4) + "\" y=\"" + fmt(y(v) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + fmt(v) + "</text>\n";
  }
  out += "<text x=\"12\" y=\"" + fmt(st.margin_px + plot_h / 2) + "\" font-size=\"12\" transform=\"rotate(-90 12 " +
         fmt(st.margin_px + plot_h / 2) + ")\" text-anchor=\"middle\">" + detail::escape(y_label) + "</text>\n";
  for (std::size_t g = 0; g < groups.size(); ++g)
  {
    const BoxStats& b = stats[g];
    const double cx = left + slot * (static_cast<double>(g) + 0.5), bw = slot * 0.5;
    out += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(y(b.max)) + "\" x2=\"" + fmt(cx) + "\" y2=\"" + fmt(y(b.min)) +
           "\" stroke=\"black\"/>\n";
    out += "<rect class=\"box\" x=\"" + fmt(cx - bw / 2) + "\" y=\"" + fmt(y(b.q3)) + "\" width=\"" + fmt(bw) +
           "\" height=\"" + fmt(y(b.q1) - y(b.q3)) + "\" fill=\"" + detail::color(static_cast<int>(g) + 1) +
           "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + fmt(cx - bw / 2) + "\" y1=\"" + fmt(y(b.median)) + "\" x2=\"" + fmt(cx + bw / 2) +
           "\" y2=\"" + fmt(y(b.median)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(st.margin_px + plot_h + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + detail::escape(groups[g].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace isdq::svg
