#pragma once

// Extension minimax on a finite set X: for a state phi of a function system S,
//   sup{phi(s) : s = s* in S, s <= x}  =  min{rho(x) : rho extends phi}
// and the mirrored inf/max pair, all as exact LPs. Also the upper envelope
// inf{s(p) : s in S, s >= u} at a point p.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"
#include "hyperrigid/function_system.hpp"
#include "hyperrigid/lp.hpp"

namespace hyperrigid::minimax {

// Rows are basis functions sampled on the points; row 0 is the unit.
class FiniteFunctionSystem {
 public:
  FiniteFunctionSystem(std::vector<double> points, std::vector<std::vector<double>> basis)
      : points_(std::move(points)), basis_(std::move(basis)) {
    if (points_.empty()) throw DomainError("FiniteFunctionSystem: no points");
    if (basis_.empty()) throw DomainError("FiniteFunctionSystem: no basis functions");
    for (const auto& row : basis_)
      if (row.size() != points_.size())
        throw DimensionError("FiniteFunctionSystem: basis row has " + std::to_string(row.size()) + " values for " +
                             std::to_string(points_.size()) + " points");
    for (double v : basis_[0])
      if (v != 1.0) throw DomainError("FiniteFunctionSystem: first basis row must be the unit");
    for (std::size_t i = 0; i < points_.size(); ++i)
      for (std::size_t j = i + 1; j < points_.size(); ++j) {
        bool same = true;
        for (const auto& row : basis_) same = same && row[i] == row[j];
        if (same)
          throw DomainError("FiniteFunctionSystem: points " + std::to_string(points_[i]) + " and " +
                            std::to_string(points_[j]) + " are not separated by the basis");
      }
  }

  // {1, g_1, g_2, ...} sampled on the points
  static FiniteFunctionSystem from_functions(std::vector<double> points,
                                             const std::vector<std::function<double(double)>>& gs) {
    std::vector<std::vector<double>> basis{std::vector<double>(points.size(), 1.0)};
    for (const auto& g : gs) {
      std::vector<double> row;
      for (double x : points) {
        const double y = g(x);
        if (!std::isfinite(y)) throw DomainError("FiniteFunctionSystem: basis function not finite at " + std::to_string(x));
        row.push_back(y);
      }
      basis.push_back(std::move(row));
    }
    return {std::move(points), std::move(basis)};
  }

  // span{1, x, f} on the grid
  static FiniteFunctionSystem from(const FunctionSystem& fs) {
    return from_functions(fs.grid(), {[](double x) { return x; }, [&fs](double x) { return fs.value(x); }});
  }

  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<std::vector<double>>& basis() const noexcept { return basis_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return basis_.size(); }

  std::vector<double> evaluation(std::size_t j) const {
    if (j >= size()) throw DomainError("FiniteFunctionSystem: point index " + std::to_string(j) + " out of range");
    std::vector<double> phi;
    for (const auto& row : basis_) phi.push_back(row[j]);
    return phi;
  }

 private:
  std::vector<double> points_;
  std::vector<std::vector<double>> basis_;
};

struct Bound {
  double value = 0.0;
  std::vector<double> witness;  // coefficients of s, or the measure rho
  lp::LpSolution lp;
};

namespace detail {

inline void check_args(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x) {
  if (phi.size() != fs.dim())
    throw DimensionError("minimax: phi has " + std::to_string(phi.size()) + " values for " + std::to_string(fs.dim()) +
                         " basis functions");
  if (x.size() != fs.size())
    throw DimensionError("minimax: x has " + std::to_string(x.size()) + " values for " + std::to_string(fs.size()) +
                         " points");
}

// extreme value of sum rho_j x_j over probability measures representing phi
inline Bound extension(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x,
                       bool maximize) {
  check_args(fs, phi, x);
  lp::LpProblem p;
  p.c = x;
  p.maximize = maximize;
  p.a_eq = fs.basis();  // row 0 gives total mass phi(1)
  p.b_eq = phi;
  Bound out;
  out.lp = lp::simplex_solve(p);
  if (out.lp.status == lp::LpStatus::Infeasible)
    throw PreconditionError("minimax: phi is not a state (no representing probability measure on X)");
  if (out.lp.status != lp::LpStatus::Optimal) throw ConvergenceError("minimax: extension LP unbounded");
  out.value = out.lp.value;
  out.witness = out.lp.x;
  return out;
}

// sup phi(s) over s <= x (lower), or inf phi(s) over s >= x
inline Bound dominated(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x,
                       bool lower) {
  check_args(fs, phi, x);
  extension(fs, phi, x, false);  // state check
  const std::size_t k = fs.dim(), n = fs.size();
  lp::LpProblem p;
  p.c = phi;
  p.maximize = lower;
  p.free.assign(k, true);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(k);
    for (std::size_t i = 0; i < k; ++i) row[i] = lower ? fs.basis()[i][j] : -fs.basis()[i][j];
    p.a_ub.push_back(std::move(row));
    p.b_ub.push_back(lower ? x[j] : -x[j]);
  }
  Bound out;
  out.lp = lp::simplex_solve(p);
  if (out.lp.status == lp::LpStatus::Unbounded)
    throw DomainError("minimax: domination LP unbounded (S too rich for the constraints)");
  if (out.lp.status != lp::LpStatus::Optimal) throw ConvergenceError("minimax: domination LP infeasible");
  out.value = out.lp.value;
  out.witness = out.lp.x;
  return out;
}

}  // namespace detail

inline Bound sup_dominated(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x) {
  return detail::dominated(fs, phi, x, true);
}
inline Bound inf_dominating(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x) {
  return detail::dominated(fs, phi, x, false);
}
inline Bound min_extension(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x) {
  return detail::extension(fs, phi, x, false);
}
inline Bound max_extension(const FiniteFunctionSystem& fs, const std::vector<double>& phi, const std::vector<double>& x) {
  return detail::extension(fs, phi, x, true);
}

struct MinimaxReport {
  double sup_dominated = 0.0, min_extension = 0.0;
  double inf_dominating = 0.0, max_extension = 0.0;
  double lower_gap = 0.0, upper_gap = 0.0;
  double tol = 0.0;
  bool ok = false;
};

inline MinimaxReport verify_minimax(const FiniteFunctionSystem& fs, const std::vector<double>& phi,
                                    const std::vector<double>& x, double tol = 1e-8) {
  MinimaxReport r;
  r.tol = tol;
  r.sup_dominated = sup_dominated(fs, phi, x).value;
  r.min_extension = min_extension(fs, phi, x).value;
  r.inf_dominating = inf_dominating(fs, phi, x).value;
  r.max_extension = max_extension(fs, phi, x).value;
  r.lower_gap = std::abs(r.sup_dominated - r.min_extension);
  r.upper_gap = std::abs(r.inf_dominating - r.max_extension);
  r.ok = r.lower_gap <= tol && r.upper_gap <= tol;
  return r;
}

// p is a boundary point iff delta_p is the only measure representing
// evaluation at p, i.e. the least mass any representing measure puts on p is 1.
inline bool is_boundary_point(const FiniteFunctionSystem& fs, std::size_t p_index, double tol = 1e-9) {
  std::vector<double> indicator(fs.size(), 0.0);
  indicator.at(p_index) = 1.0;
  return min_extension(fs, fs.evaluation(p_index), indicator).value >= 1.0 - tol;
}

struct EnvelopeReport {
  std::size_t p_index = 0;
  double point = 0.0;
  double envelope = 0.0;  // inf{s(p) : s >= u}
  double value = 0.0;     // u(p)
  double gap = 0.0;       // envelope - u(p), never negative
  bool boundary = false;
  std::vector<double> coefficients;  // an optimal s
};

inline EnvelopeReport boundary_envelope(const FiniteFunctionSystem& fs, std::size_t p_index,
                                        const std::vector<double>& u_values) {
  const std::vector<double> ev = fs.evaluation(p_index);
  const Bound b = inf_dominating(fs, ev, u_values);
  EnvelopeReport r;
  r.p_index = p_index;
  r.point = fs.points()[p_index];
  r.envelope = b.value;
  r.value = u_values[p_index];
  r.gap = b.value - r.value;
  r.boundary = is_boundary_point(fs, p_index);
  r.coefficients = b.witness;
  return r;
}

}  // namespace hyperrigid::minimax
