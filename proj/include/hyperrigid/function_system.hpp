#pragma once

// span{1, u, f} on [a, b], sampled on a uniform grid. Everything here is
// grid-relative: "strictly convex" means strictly positive second
// differences at this resolution, "extreme" means a strict hull vertex.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"

namespace hyperrigid {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct GraphSample {
  std::vector<Point2> points;  // x strictly increasing, y finite
};

class FunctionSystem {
 public:
  using Function = std::function<double(double)>;

  FunctionSystem(double a, double b, Function f, std::size_t m = 101) : a_(a), b_(b), f_(std::move(f)), m_(m) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
      throw DomainError("FunctionSystem: need finite a < b");
    if (m < 3) throw DomainError("FunctionSystem: grid needs at least 3 points");
    if (!f_) throw DomainError("FunctionSystem: empty function");
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t m() const noexcept { return m_; }
  const Function& f() const noexcept { return f_; }

  double grid_point(std::size_t i) const {
    if (i + 1 == m_) return b_;
    return a_ + static_cast<double>(i) * (b_ - a_) / static_cast<double>(m_ - 1);
  }

  std::vector<double> grid() const {
    std::vector<double> xs(m_);
    for (std::size_t i = 0; i < m_; ++i) xs[i] = grid_point(i);
    return xs;
  }

  // Same function on a different grid.
  FunctionSystem with_resolution(std::size_t m) const { return FunctionSystem(a_, b_, f_, m); }

  // Evaluation errors from f propagate; non-finite values are a DomainError.
  double value(double x) const {
    const double y = f_(x);
    if (!std::isfinite(y)) throw DomainError("function is not finite at x=" + std::to_string(x));
    return y;
  }

  GraphSample sample() const {
    GraphSample g;
    g.points.reserve(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double x = grid_point(i);
      g.points.push_back({x, value(x)});
    }
    return g;
  }

 private:
  double a_, b_;
  Function f_;
  std::size_t m_;
};

inline constexpr double kHullTol = 1e-9;
inline constexpr double kConvexityTol = 1e-10;

namespace detail {

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double coordinate_scale(const std::vector<Point2>& pts) {
  double s = 0.0;
  for (const auto& p : pts) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  return s > 0.0 ? s : 1.0;
}

}  // namespace detail

// Andrew monotone chain. Returns indices into `points`, counterclockwise,
// starting at the lexicographic minimum. A middle point whose distance to
// the chord of its neighbours is <= tol_hull * scale is not a vertex.
inline std::vector<std::size_t> convex_hull(const std::vector<Point2>& points, double tol_hull = kHullTol) {
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("convex_hull: no points");
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("convex_hull: non-finite coordinate");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return points[i].x < points[j].x || (points[i].x == points[j].x && points[i].y < points[j].y);
  });
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::size_t i, std::size_t j) {
                          return points[i].x == points[j].x && points[i].y == points[j].y;
                        }),
            idx.end());
  if (idx.size() <= 2) return idx;

  const double thr = tol_hull * detail::coordinate_scale(points);
  // Pop while the turn h[-2] -> h[-1] -> p is not strictly counterclockwise.
  auto not_left = [&](std::size_t o, std::size_t a, std::size_t b) {
    const double dx = points[b].x - points[o].x, dy = points[b].y - points[o].y;
    return detail::cross(points[o], points[a], points[b]) <= thr * std::hypot(dx, dy);
  };

  std::vector<std::size_t> hull;
  hull.reserve(2 * idx.size());
  for (std::size_t k : idx) {
    while (hull.size() >= 2 && not_left(hull[hull.size() - 2], hull.back(), k)) hull.pop_back();
    hull.push_back(k);
  }
  const std::size_t lower = hull.size() + 1;
  for (std::size_t r = idx.size() - 1; r-- > 0;) {
    const std::size_t k = idx[r];
    while (hull.size() >= lower && not_left(hull[hull.size() - 2], hull.back(), k)) hull.pop_back();
    hull.push_back(k);
  }
  hull.pop_back();  // start point repeated
  return hull;
}

enum class Convexity { StrictlyConvex, StrictlyConcave, Neither };

inline const char* to_string(Convexity c) {
  switch (c) {
    case Convexity::StrictlyConvex: return "StrictlyConvex";
    case Convexity::StrictlyConcave: return "StrictlyConcave";
    default: return "Neither";
  }
}

struct ConvexityResult {
  Convexity kind = Convexity::Neither;
  // For Neither: (x_{i-1}, x_i, x_{i+1}) where the second difference is
  // within tol of zero, or failing that the first sign change.
  std::optional<std::array<double, 3>> witness;
  std::vector<double> second_differences;
  double tol = 0.0;
};

// tol < 0 means the default kConvexityTol * max|f| (at least kConvexityTol).
inline ConvexityResult classify_convexity(const FunctionSystem& fs, double tol = -1.0) {
  const GraphSample g = fs.sample();
  const auto& p = g.points;
  const std::size_t m = p.size();
  ConvexityResult r;
  if (tol < 0.0) {
    double scale = 1.0;
    for (const auto& q : p) scale = std::max(scale, std::abs(q.y));
    tol = kConvexityTol * scale;
  }
  r.tol = tol;
  r.second_differences.resize(m - 2);
  bool convex = true, concave = true;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double d = p[i - 1].y - 2.0 * p[i].y + p[i + 1].y;
    r.second_differences[i - 1] = d;
    convex = convex && d > tol;
    concave = concave && d < -tol;
  }
  if (convex) {
    r.kind = Convexity::StrictlyConvex;
    return r;
  }
  if (concave) {
    r.kind = Convexity::StrictlyConcave;
    return r;
  }
  auto triple = [&](std::size_t i) { return std::array<double, 3>{p[i - 1].x, p[i].x, p[i + 1].x}; };
  const auto& d = r.second_differences;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (std::abs(d[k]) <= tol) {
      r.witness = triple(k + 1);
      return r;
    }
  for (std::size_t k = 1; k < d.size(); ++k)
    if ((d[k] > 0) != (d[k - 1] > 0)) {
      r.witness = triple(k + 1);
      return r;
    }
  return r;  // unreachable when m >= 3
}

struct BoundaryFlag {
  double x = 0.0;
  double fx = 0.0;
  bool boundary = false;
};

// Grid point is flagged iff it is a vertex of the hull of the graph or of the
// reflected graph {(x, -f(x))}. The endpoints are always flagged.
inline std::vector<BoundaryFlag> choquet_boundary(const FunctionSystem& fs, double tol_hull = kHullTol) {
  const GraphSample g = fs.sample();
  std::vector<BoundaryFlag> out(g.points.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {g.points[i].x, g.points[i].y, false};

  for (std::size_t i : convex_hull(g.points, tol_hull)) out[i].boundary = true;
  std::vector<Point2> reflected = g.points;
  for (auto& q : reflected) q.y = -q.y;
  for (std::size_t i : convex_hull(reflected, tol_hull)) out[i].boundary = true;
  out.front().boundary = true;
  out.back().boundary = true;
  return out;
}

// Grid m is nested in grid 2m-1; the shared points must keep their flags.
inline bool boundary_stable_under_refinement(const FunctionSystem& fs, double tol_hull = kHullTol) {
  const auto coarse = choquet_boundary(fs, tol_hull);
  const auto fine = choquet_boundary(fs.with_resolution(2 * fs.m() - 1), tol_hull);
  for (std::size_t i = 0; i < coarse.size(); ++i)
    if (coarse[i].boundary != fine[2 * i].boundary) return false;
  return true;
}

}  // namespace hyperrigid
