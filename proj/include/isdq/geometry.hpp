#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace isdq
{

/// 2-D point / vector in meters.
struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o)
  {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s)
  {
    x *= s;
    y *= s;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
constexpr double norm_sq(const Vec2& v) { return dot(v, v); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
/// Counterclockwise perpendicular.
constexpr Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

/// Unit vector, or zero when `v` is (numerically) zero.
inline Vec2 normalized(const Vec2& v)
{
  const double n = norm(v);
  if (n < 1e-12) return {};
  return v / n;
}

inline Vec2 rotated(const Vec2& v, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Axis-aligned rectangle.
struct Rect
{
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(const Vec2& p) const
  {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  bool operator==(const Rect&) const = default;
};

using Polygon = std::vector<Vec2>;

inline Polygon rect_polygon(double xmin, double ymin, double xmax, double ymax)
{
  return {{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
}

inline double signed_area(std::span<const Vec2> poly)
{
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

inline Rect bounding_box(std::span<const Vec2> poly)
{
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : poly)
  {
    r.xmin = std::min(r.xmin, p.x);
    r.ymin = std::min(r.ymin, p.y);
    r.xmax = std::max(r.xmax, p.x);
    r.ymax = std::max(r.ymax, p.y);
  }
  return r;
}

/// Closest point to `p` on segment [a, b].
inline Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b)
{
  const Vec2 ab = b - a;
  const double len2 = norm_sq(ab);
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
  return distance(p, closest_on_segment(p, a, b));
}

namespace detail
{
inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c)
{
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p)
{
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}
}  // namespace detail

/// Closed segment intersection test (touching counts).
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

inline double segment_segment_distance(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
  if (segments_intersect(p1, p2, q1, q2)) return 0.0;
  return std::min({point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                   point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

/// Even-odd point-in-polygon; points on the boundary may go either way.
inline bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly)
{
  bool inside = false;
  for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++)
  {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y))
    {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

/// Closest point on the polygon boundary.
inline Vec2 closest_on_boundary(const Vec2& p, std::span<const Vec2> poly)
{
  Vec2 best = poly.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
  {
    const Vec2 c = closest_on_segment(p, poly[i], poly[(i + 1) % n]);
    const double d = norm_sq(p - c);
    if (d < best_d)
    {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline double boundary_distance(const Vec2& p, std::span<const Vec2> poly)
{
  return distance(p, closest_on_boundary(p, poly));
}

/// Distance from point to the polygon as a filled region (0 inside).
inline double polygon_distance(const Vec2& p, std::span<const Vec2> poly)
{
  if (point_in_polygon(p, poly)) return 0.0;
  return boundary_distance(p, poly);
}

/// True if the closed segment touches the polygon (boundary or interior).
inline bool segment_hits_polygon(const Vec2& a, const Vec2& b, std::span<const Vec2> poly)
{
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
    if (segments_intersect(a, b, poly[i], poly[(i + 1) % n])) return true;
  return point_in_polygon(a, poly);
}

/// True if no two non-adjacent edges intersect and adjacent edges only share
/// their common vertex.
inline bool is_simple_polygon(std::span<const Vec2> poly)
{
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
  {
    const Vec2& a1 = poly[i];
    const Vec2& a2 = poly[(i + 1) % n];
    if (a1 == a2) return false;
    for (std::size_t j = i + 1; j < n; ++j)
    {
      const Vec2& b1 = poly[j];
      const Vec2& b2 = poly[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent)
      {
        // Adjacent edges must not fold back onto each other.
        const Vec2& shared = (j == i + 1) ? a2 : a1;
        const Vec2& other_a = (j == i + 1) ? a1 : a2;
        const Vec2& other_b = (j == i + 1) ? b2 : b1;
        if (detail::orientation(other_a, shared, other_b) == 0 &&
            dot(other_a - shared, other_b - shared) > 0)
          return false;
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2)) return false;
    }
  }
  return std::abs(signed_area(poly)) > 0.0;
}

/// Smallest t >= 0 with origin + t*dir on segment [a, b]; `dir` must be unit.
inline std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir, const Vec2& a, const Vec2& b)
{
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  const Vec2 ao = a - origin;
  if (std::abs(denom) < 1e-15)
  {
    // Parallel: hit only if collinear; take the nearer endpoint ahead.
    if (std::abs(cross(ao, dir)) > 1e-12) return std::nullopt;
    const double ta = dot(a - origin, dir);
    const double tb = dot(b - origin, dir);
    if (ta < 0 && tb < 0) return std::nullopt;
    if (ta < 0 || tb < 0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

/// Smallest t >= 0 with origin + t*dir on the circle; `dir` must be unit.
inline std::optional<double> ray_circle(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius)
{
  const Vec2 oc = origin - center;
  const double b = dot(oc, dir);
  const double c = norm_sq(oc) - radius * radius;
  if (c <= 0.0) return 0.0;  // origin inside the disc
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  if (t < 0.0) return std::nullopt;
  return t;
}

/// Distance between a closed rectangle and a polygon region (0 if they touch).
inline double rect_polygon_distance(const Rect& r, std::span<const Vec2> poly)
{
  const Polygon rp = rect_polygon(r.xmin, r.ymin, r.xmax, r.ymax);
  if (point_in_polygon(rp[0], poly)) return 0.0;
  for (const auto& v : poly)
    if (r.contains(v)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      d = std::min(d, segment_segment_distance(poly[i], poly[(i + 1) % n], rp[k], rp[(k + 1) % 4]));
  return d;
}

/// True if the open interiors of the rectangle and polygon overlap.
inline bool rect_polygon_interiors_overlap(const Rect& r, std::span<const Vec2> poly)
{
  constexpr double shrink = 1e-9;
  const Rect s{r.xmin + shrink, r.ymin + shrink, r.xmax - shrink, r.ymax - shrink};
  if (s.xmin >= s.xmax || s.ymin >= s.ymax) return false;
  return rect_polygon_distance(s, poly) == 0.0;
}

}  // namespace isdq
