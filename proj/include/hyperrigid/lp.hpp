#pragma once

// Dense two-phase simplex with Bland's rule. Small problems only; the point
// is exact vertex answers and reproducible pivots, not speed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"

namespace hyperrigid::lp {

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

using Rows = std::vector<std::vector<double>>;

// optimize c.x  s.t.  a_ub x <= b_ub,  a_eq x = b_eq,  x_j >= 0 unless free[j]
struct LpProblem {
  std::vector<double> c;
  bool maximize = true;
  Rows a_ub;
  std::vector<double> b_ub;
  Rows a_eq;
  std::vector<double> b_eq;
  std::vector<bool> free;  // empty: all nonnegative
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  std::vector<double> x;
  // Duals of the problem as posed: for maximize, y_ub >= 0 and
  // a_ub^T y_ub + a_eq^T y_eq >= c (= c on free columns).
  std::vector<double> y_ub, y_eq;
  double dual_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  std::size_t pivots = 0;
};

inline constexpr std::size_t kMaxRows = 200;
inline constexpr std::size_t kMaxVars = 400;

namespace detail {

// Solve m x = rhs (square, dense) by partial pivoting. m is consumed.
inline std::vector<double> dense_solve(Rows m, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    if (std::abs(m[piv][k]) < 1e-300) throw ConvergenceError("simplex: singular basis");
    std::swap(m[k], m[piv]);
    std::swap(rhs[k], rhs[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i][k] / m[k][k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = rhs[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= m[k][j] * x[j];
    x[k] = s / m[k][k];
  }
  return x;
}

class Tableau {
 public:
  // rows of [a | b], basis given, objective row built by set_objective
  Tableau(Rows a, std::vector<double> b, std::vector<std::size_t> basis)
      : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)), cols_(a_.empty() ? 0 : a_[0].size()) {}

  void set_objective(const std::vector<double>& c) {
    c_ = c;
    z_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) z_[j] = -c[j];
    z0_ = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) z_[j] += cb * a_[i][j];
      z0_ += cb * b_[i];
    }
  }

  // Maximize; columns with allowed[j] false never enter. Returns false if unbounded.
  bool run(const std::vector<bool>& allowed, std::size_t& pivots, std::size_t max_pivots) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (allowed[j] && z_[j] < -kCostTol) {
          enter = j;  // Bland: lowest index
          break;
        }
      if (enter == cols_) return true;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < a_.size(); ++i)
        if (a_[i][enter] > kPivotTol) best = std::min(best, b_[i] / a_[i][enter]);
      if (!std::isfinite(best)) return false;
      // ties within rounding: lowest basic index leaves
      std::size_t leave = a_.size();
      const double slack = 1e-12 * (1.0 + std::abs(best));
      for (std::size_t i = 0; i < a_.size(); ++i)
        if (a_[i][enter] > kPivotTol && b_[i] / a_[i][enter] <= best + slack &&
            (leave == a_.size() || basis_[i] < basis_[leave]))
          leave = i;
      pivot(leave, enter);
      if (++pivots > max_pivots) throw ConvergenceError("simplex: pivot limit reached");
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    const double p = a_[r][e];
    for (double& v : a_[r]) v /= p;
    b_[r] /= p;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (i == r) continue;
      const double f = a_[i][e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) a_[i][j] -= f * a_[r][j];
      b_[i] -= f * b_[r];
      a_[i][e] = 0.0;
    }
    const double f = z_[e];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) z_[j] -= f * a_[r][j];
      z0_ -= f * b_[r];
      z_[e] = 0.0;
    }
    basis_[r] = e;
  }

  void drop_row(std::size_t r) {
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r));
    b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

  double objective() const { return z0_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const Rows& rows() const { return a_; }
  const std::vector<double>& rhs() const { return b_; }

  static constexpr double kCostTol = 1e-10;
  static constexpr double kPivotTol = 1e-11;

 private:
  Rows a_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::size_t cols_;
  std::vector<double> c_, z_;
  double z0_ = 0.0;
};

}  // namespace detail

inline LpSolution simplex_solve(const LpProblem& p) {
  const std::size_t n = p.c.size();
  const std::size_t mu = p.a_ub.size(), me = p.a_eq.size();
  if (p.b_ub.size() != mu || p.b_eq.size() != me) throw DimensionError("simplex_solve: rhs length mismatch");
  for (const auto& r : p.a_ub)
    if (r.size() != n) throw DimensionError("simplex_solve: inequality row has wrong length");
  for (const auto& r : p.a_eq)
    if (r.size() != n) throw DimensionError("simplex_solve: equality row has wrong length");
  if (!p.free.empty() && p.free.size() != n) throw DimensionError("simplex_solve: free flags have wrong length");
  if (mu + me > kMaxRows || n > kMaxVars)
    throw PreconditionError("simplex_solve: problem too large (" + std::to_string(mu + me) + " rows, " +
                            std::to_string(n) + " variables)");
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(p.c) || !finite(p.b_ub) || !finite(p.b_eq) ||
      !std::all_of(p.a_ub.begin(), p.a_ub.end(), finite) || !std::all_of(p.a_eq.begin(), p.a_eq.end(), finite))
    throw DomainError("simplex_solve: non-finite data");
  auto is_free = [&](std::size_t j) { return !p.free.empty() && p.free[j]; };

  // standard form columns: x+ (n), x- (free only), slacks (mu), artificials (m)
  std::vector<std::size_t> neg_col(n, 0);
  std::size_t ncols = n;
  for (std::size_t j = 0; j < n; ++j)
    if (is_free(j)) neg_col[j] = ncols++;
  const std::size_t slack0 = ncols;
  ncols += mu;
  const std::size_t m = mu + me;
  const std::size_t art0 = ncols;
  ncols += m;

  Rows a(m, std::vector<double>(ncols, 0.0));
  std::vector<double> b(m);
  std::vector<double> sign(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    const bool ub = i < mu;
    const auto& row = ub ? p.a_ub[i] : p.a_eq[i - mu];
    b[i] = ub ? p.b_ub[i] : p.b_eq[i - mu];
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = row[j];
      if (is_free(j)) a[i][neg_col[j]] = -row[j];
    }
    if (ub) a[i][slack0 + i] = 1.0;
    if (b[i] < 0.0) {
      sign[i] = -1.0;
      b[i] = -b[i];
      for (double& v : a[i]) v = -v;
    }
    a[i][art0 + i] = 1.0;
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = art0 + i;
  std::vector<std::size_t> row_id(m);  // original row of each tableau row
  for (std::size_t i = 0; i < m; ++i) row_id[i] = i;

  LpSolution sol;
  const std::size_t max_pivots = 50000;
  detail::Tableau t(a, b, basis);

  // phase 1: maximize -sum(artificials)
  std::vector<double> c1(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) c1[art0 + i] = -1.0;
  t.set_objective(c1);
  std::vector<bool> allowed(ncols, true);
  t.run(allowed, sol.pivots, max_pivots);
  double bscale = 1.0;
  for (double v : b) bscale = std::max(bscale, std::abs(v));
  if (-t.objective() > 1e-9 * bscale) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  // push artificials out of the basis; rows where that is impossible are redundant
  for (std::size_t i = 0; i < t.basis().size();) {
    if (t.basis()[i] < art0) {
      ++i;
      continue;
    }
    std::size_t e = art0;
    for (std::size_t j = 0; j < art0; ++j)
      if (std::abs(t.rows()[i][j]) > 1e-9) {
        e = j;
        break;
      }
    if (e == art0) {
      t.drop_row(i);
      row_id.erase(row_id.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      t.pivot(i, e);
      ++i;
    }
  }
  for (std::size_t j = art0; j < ncols; ++j) allowed[j] = false;

  // phase 2
  std::vector<double> c2(ncols, 0.0);
  const double dir = p.maximize ? 1.0 : -1.0;
  for (std::size_t j = 0; j < n; ++j) {
    c2[j] = dir * p.c[j];
    if (is_free(j)) c2[neg_col[j]] = -dir * p.c[j];
  }
  t.set_objective(c2);
  if (!t.run(allowed, sol.pivots, max_pivots)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  sol.status = LpStatus::Optimal;

  // Re-solve the final basis from the original data for accuracy.
  const std::vector<std::size_t>& bas = t.basis();
  const std::size_t r = bas.size();
  Rows bm(r, std::vector<double>(r)), bt(r, std::vector<double>(r));
  std::vector<double> rb(r), cb(r);
  for (std::size_t i = 0; i < r; ++i) {
    rb[i] = b[row_id[i]];
    cb[i] = c2[bas[i]];
    for (std::size_t k = 0; k < r; ++k) {
      bm[i][k] = a[row_id[i]][bas[k]];
      bt[k][i] = a[row_id[i]][bas[k]];
    }
  }
  const std::vector<double> xb = r ? detail::dense_solve(bm, rb) : std::vector<double>{};
  const std::vector<double> yb = r ? detail::dense_solve(bt, cb) : std::vector<double>{};
  std::vector<double> xs(ncols, 0.0);
  for (std::size_t i = 0; i < r; ++i) xs[bas[i]] = std::max(0.0, xb[i]);
  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) sol.x[j] = xs[j] - (is_free(j) ? xs[neg_col[j]] : 0.0);

  // duals of the problem as posed (flip for row sign and for minimize)
  std::vector<double> y(m, 0.0);
  for (std::size_t i = 0; i < r; ++i) y[row_id[i]] = yb[i] * sign[row_id[i]] * dir;
  sol.y_ub.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(mu));
  sol.y_eq.assign(y.begin() + static_cast<std::ptrdiff_t>(mu), y.end());

  sol.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.value += p.c[j] * sol.x[j];
  sol.dual_value = 0.0;
  for (std::size_t i = 0; i < mu; ++i) sol.dual_value += p.b_ub[i] * sol.y_ub[i];
  for (std::size_t i = 0; i < me; ++i) sol.dual_value += p.b_eq[i] * sol.y_eq[i];

  // residuals
  for (std::size_t i = 0; i < mu; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p.a_ub[i][j] * sol.x[j];
    const double slack = p.b_ub[i] - s;
    sol.primal_residual = std::max(sol.primal_residual, -slack);
    // sign convention: maximize wants y_ub >= 0, minimize y_ub <= 0
    sol.dual_residual = std::max(sol.dual_residual, -dir * sol.y_ub[i]);
    sol.complementarity = std::max(sol.complementarity, std::abs(sol.y_ub[i] * slack));
  }
  for (std::size_t i = 0; i < me; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p.a_eq[i][j] * sol.x[j];
    sol.primal_residual = std::max(sol.primal_residual, std::abs(s - p.b_eq[i]));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!is_free(j)) sol.primal_residual = std::max(sol.primal_residual, -sol.x[j]);
    double at_y = 0.0;
    for (std::size_t i = 0; i < mu; ++i) at_y += p.a_ub[i][j] * sol.y_ub[i];
    for (std::size_t i = 0; i < me; ++i) at_y += p.a_eq[i][j] * sol.y_eq[i];
    const double reduced = dir * (at_y - p.c[j]);  // >= 0 at a dual feasible point
    if (is_free(j)) {
      sol.dual_residual = std::max(sol.dual_residual, std::abs(reduced));
    } else {
      sol.dual_residual = std::max(sol.dual_residual, -reduced);
      sol.complementarity = std::max(sol.complementarity, std::abs(sol.x[j] * reduced));
    }
  }
  return sol;
}

}  // namespace hyperrigid::lp
