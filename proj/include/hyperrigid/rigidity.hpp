#pragma once

// Counterexamples to rigidity: a grid point of the graph that is a convex
// combination of other graph points gives a diagonal A (dimension <= 7) and
// a UCP map fixing A and f(A) that is not multiplicative on polynomials in A.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hyperrigid/choi.hpp"
#include "hyperrigid/errors.hpp"
#include "hyperrigid/function_system.hpp"
#include "hyperrigid/linalg.hpp"
#include "hyperrigid/matrix.hpp"

namespace hyperrigid {

inline constexpr double kWitnessTol = 1e-10;
inline constexpr std::size_t kMaxSupport = 6;

struct SupportPoint {
  double x = 0.0;
  double t = 0.0;
};

struct CaratheodoryWitness {
  double x0 = 0.0;
  std::vector<SupportPoint> support;
};

struct CounterexampleReport {
  CaratheodoryWitness witness;
  HermitianMatrix A;
  HermitianMatrix fA;
  choi::ChoiMatrix phi;
  double residual_fix_A = 0.0;
  double residual_fix_fA = 0.0;
  double deviation = 0.0;  // ||phi(A^2) - phi(A)^2||
};

namespace detail {

struct Candidate {
  std::size_t i0;
  std::vector<std::size_t> idx;
  std::vector<double> t;
};

// Chords between two extreme points passing (within tol) through a
// non-extreme point. Largest spread wins, then leftmost x0.
inline std::optional<Candidate> best_chord(const std::vector<Point2>& p, const std::vector<bool>& extreme, double tol) {
  std::vector<std::size_t> ext;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (extreme[i]) ext.push_back(i);
  std::optional<Candidate> best;
  double best_var = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (extreme[i]) continue;
    for (std::size_t jj = 0; jj < ext.size(); ++jj) {
      const std::size_t j = ext[jj];
      if (p[j].x >= p[i].x) break;
      for (std::size_t kk = ext.size(); kk-- > jj + 1;) {
        const std::size_t k = ext[kk];
        if (p[k].x <= p[i].x) break;
        const double span = p[k].x - p[j].x;
        const double tj = (p[k].x - p[i].x) / span;
        const double tk = 1.0 - tj;
        if (std::abs(tj * p[j].y + tk * p[k].y - p[i].y) > tol) continue;
        const double var = tj * tk * span * span;
        if (var > best_var * (1.0 + 1e-12)) {
          best_var = var;
          best = Candidate{i, {j, k}, {tj, tk}};
        }
      }
    }
  }
  return best;
}

// Barycentric coordinates of a point inside a fan triangle of the hull.
inline std::optional<Candidate> triangle_support(const std::vector<Point2>& p, const std::vector<std::size_t>& hull,
                                                 std::size_t i0) {
  if (hull.size() < 3) return std::nullopt;
  const Point2& q = p[i0];
  for (std::size_t k = 1; k + 1 < hull.size(); ++k) {
    const std::size_t ia = hull[0], ib = hull[k], ic = hull[k + 1];
    const double area = cross(p[ia], p[ib], p[ic]);
    if (area <= 0.0) continue;
    const double la = cross(q, p[ib], p[ic]) / area;
    const double lb = cross(p[ia], q, p[ic]) / area;
    const double lc = 1.0 - la - lb;
    const double eps = 1e-12;
    if (la < -eps || lb < -eps || lc < -eps) continue;
    Candidate c{i0, {}, {}};
    for (auto [idx, w] : {std::pair{ia, la}, std::pair{ib, lb}, std::pair{ic, lc}})
      if (w > 1e-14) {
        c.idx.push_back(idx);
        c.t.push_back(w);
      }
    double total = 0.0;
    for (double w : c.t) total += w;
    for (double& w : c.t) w /= total;
    return c;
  }
  return std::nullopt;
}

inline bool residuals_ok(const std::vector<Point2>& p, const Candidate& c, double tol) {
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < c.idx.size(); ++k) {
    sx += c.t[k] * p[c.idx[k]].x;
    sy += c.t[k] * p[c.idx[k]].y;
  }
  return std::abs(sx - p[c.i0].x) <= tol && std::abs(sy - p[c.i0].y) <= tol;
}

}  // namespace detail

// Absent when every sampled graph point is extreme.
inline std::optional<CaratheodoryWitness> find_nonextreme_point(const FunctionSystem& fs,
                                                                double tol_hull = kHullTol) {
  const GraphSample g = fs.sample();
  const auto& p = g.points;
  const auto flags = choquet_boundary(fs, tol_hull);
  std::vector<bool> extreme(p.size());
  bool any = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    extreme[i] = flags[i].boundary;
    any = any || !extreme[i];
  }
  if (!any) return std::nullopt;

  auto to_witness = [&](const detail::Candidate& c) {
    CaratheodoryWitness w{p[c.i0].x, {}};
    for (std::size_t k = 0; k < c.idx.size(); ++k) w.support.push_back({p[c.idx[k]].x, c.t[k]});
    std::sort(w.support.begin(), w.support.end(), [](auto& a, auto& b) { return a.x < b.x; });
    return w;
  };

  if (auto chord = detail::best_chord(p, extreme, kWitnessTol)) return to_witness(*chord);

  const auto hull = convex_hull(p, tol_hull);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (extreme[i]) continue;
    auto c = detail::triangle_support(p, hull, i);
    if (c && detail::residuals_ok(p, *c, kWitnessTol)) return to_witness(*c);
  }
  return std::nullopt;
}

inline void check_witness(const CaratheodoryWitness& w, const FunctionSystem::Function& f) {
  const auto& s = w.support;
  if (s.empty() || s.size() > kMaxSupport)
    throw PreconditionError("witness support must have 1.." + std::to_string(kMaxSupport) + " points");
  double mass = 0.0, mx = 0.0, mf = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!(s[k].t > 0.0)) throw PreconditionError("witness weights must be positive");
    if (s[k].x == w.x0) throw PreconditionError("support point coincides with x0");
    for (std::size_t l = 0; l < k; ++l)
      if (s[l].x == s[k].x) throw PreconditionError("support points must be distinct");
    mass += s[k].t;
    mx += s[k].t * s[k].x;
    mf += s[k].t * f(s[k].x);
  }
  if (std::abs(mass - 1.0) > 1e-12) throw PreconditionError("witness weights do not sum to 1");
  if (std::abs(mx - w.x0) > kWitnessTol)
    throw PreconditionError("witness does not reproduce x0 (residual " + std::to_string(std::abs(mx - w.x0)) + ")");
  const double f0 = f(w.x0);
  if (std::abs(mf - f0) > kWitnessTol)
    throw PreconditionError("witness does not reproduce f(x0) (residual " + std::to_string(std::abs(mf - f0)) + ")");
}

// A = diag(x0, x1..xn); phi = D o E, D replaces the first diagonal entry by
// the t-average of the others and E is the diagonal pinching.
inline CounterexampleReport build_counterexample(const CaratheodoryWitness& w, const FunctionSystem::Function& f) {
  check_witness(w, f);
  const std::size_t n = w.support.size() + 1;
  std::vector<double> diag{w.x0}, fdiag{f(w.x0)};
  for (const auto& s : w.support) {
    diag.push_back(s.x);
    fdiag.push_back(f(s.x));
  }
  std::vector<double> weights(n * n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    weights[k] = w.support[k - 1].t;
    weights[k * n + k] = 1.0;
  }

  CounterexampleReport r{w, HermitianMatrix::diagonal(diag), HermitianMatrix::diagonal(fdiag), {}, 0, 0, 0};
  r.phi = choi::compose(choi::choi_of_diagonal_map(n, n, weights), choi::choi_of_pinching(n));

  const ComplexMatrix& a = r.A.matrix();
  const ComplexMatrix phi_a = choi::apply(r.phi, a);
  r.residual_fix_A = operator_norm(phi_a - a);
  r.residual_fix_fA = operator_norm(choi::apply(r.phi, r.fA.matrix()) - r.fA.matrix());
  r.deviation = operator_norm(choi::apply(r.phi, a * a) - phi_a * phi_a);
  return r;
}

enum class Rigidity { RigidCandidate, NotRigid };

inline const char* to_string(Rigidity r) { return r == Rigidity::NotRigid ? "NotRigid" : "RigidCandidate"; }

struct RigidityVerdict {
  Rigidity kind = Rigidity::RigidCandidate;
  std::optional<CounterexampleReport> report;
};

inline RigidityVerdict rigidity_verdict(const FunctionSystem& fs, double tol_hull = kHullTol) {
  RigidityVerdict v;
  if (auto w = find_nonextreme_point(fs, tol_hull)) {
    v.kind = Rigidity::NotRigid;
    v.report = build_counterexample(*w, fs.f());
  }
  return v;
}

}  // namespace hyperrigid
