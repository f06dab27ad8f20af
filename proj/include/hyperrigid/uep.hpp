#pragma once

// Unique extension property, finite-dimensional and heuristic: look for a UCP
// map on M_n that fixes an operator system S pointwise but moves some probe
// matrix. The feasible set {C >= 0, tr_in C = 1, phi(g) = g for g in S} is
// first shrunk to the smallest face of the PSD cone it visibly lives in, then
// searched with Dykstra's alternating projections from perturbed copies of the
// identity channel (plus a factored polish), followed by a projected ascent on
// the probe deviation.
//
// NoViolationFound is evidence only: the search can miss a witness.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hyperrigid/choi.hpp"
#include "hyperrigid/errors.hpp"
#include "hyperrigid/linalg.hpp"
#include "hyperrigid/matrix.hpp"

namespace hyperrigid::uep {

// Hermitian elements of span(G u G^dagger) as a real span: orthonormal for
// Re tr(X^dagger Y), built from Re g and Im g of each generator.
inline std::vector<ComplexMatrix> hermitian_span_basis(const std::vector<ComplexMatrix>& generators) {
  std::vector<ComplexMatrix> basis;
  auto add = [&](ComplexMatrix h) {
    const double norm0 = h.frobenius_norm();
    if (norm0 == 0.0) return;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) h -= frobenius_inner(b, h).real() * b;
    const double norm = h.frobenius_norm();
    if (norm <= 1e-10 * std::max(1.0, norm0)) return;
    basis.push_back((1.0 / norm) * h);
  };
  for (const auto& g : generators) {
    add(hermitian_part(g));
    add(Complex(0.0, -0.5) * (g - g.adjoint()));
  }
  return basis;
}

// An operator system S in M_n: the span of the generators and their adjoints,
// which must contain the identity.
class OperatorSystemM {
 public:
  OperatorSystemM(std::size_t n, std::vector<ComplexMatrix> generators) : n_(n), generators_(std::move(generators)) {
    if (n == 0) throw DimensionError("OperatorSystemM: n must be positive");
    for (const auto& g : generators_)
      if (g.rows() != n || g.cols() != n)
        throw DimensionError("OperatorSystemM: generator has shape " + g.shape() + ", expected " +
                             std::to_string(n) + "x" + std::to_string(n));
    basis_ = hermitian_span_basis(generators_);
    const double res = residual(ComplexMatrix::identity(n));
    if (res > 1e-10)
      throw DomainError("OperatorSystemM: identity is not in the span (residual " + std::to_string(res) + ")");
  }

  std::size_t n() const noexcept { return n_; }
  const std::vector<ComplexMatrix>& generators() const noexcept { return generators_; }
  const std::vector<ComplexMatrix>& hermitian_basis() const noexcept { return basis_; }

  // Frobenius distance from x to the complex span of the generators.
  double residual(const ComplexMatrix& x) const {
    ComplexMatrix r = x;
    for (const auto& b : basis_) r -= frobenius_inner(b, r) * b;
    return r.frobenius_norm();
  }

 private:
  std::size_t n_;
  std::vector<ComplexMatrix> generators_;
  std::vector<ComplexMatrix> basis_;
};

struct UepParams {
  std::size_t restarts = 16;
  std::vector<double> epsilons{0.05, 0.2, 0.8};
  std::size_t max_iterations = 500;    // first Dykstra run of each restart
  std::size_t ascent_iterations = 50;   // Dykstra runs inside the ascent
  double change_tol = 1e-10;
  std::size_t ascent_steps = 40;
  bool polish = true;
  double violation_tol = 1e-4;
  double fix_tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency
};

enum class UepStatus { Violated, NoViolationFound };

inline const char* to_string(UepStatus s) { return s == UepStatus::Violated ? "Violated" : "NoViolationFound"; }

struct RestartDiagnostics {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::size_t iterations = 0;  // Dykstra iterations over all projections of this restart
  std::size_t ascent_steps = 0;
  bool hit_iteration_cap = false;
  double final_change = 0.0;
  double affine_residual = 0.0;   // constraint residual of the returned PSD point
  double deviation = 0.0;
  std::vector<double> affine_distance;  // first Dykstra run, one entry per iteration
};

struct UepReport {
  UepStatus status = UepStatus::NoViolationFound;
  std::optional<choi::ChoiMatrix> witness;
  choi::ChoiMatrix best_map;  // max-deviation point, whatever the status
  double deviation = 0.0;
  std::vector<ComplexMatrix> probes;
  std::size_t restarts = 0;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  std::size_t best_restart = 0;
  std::size_t frame_rank = 0;  // size of the face the search ran in (n^2 when unreduced)
  std::vector<RestartDiagnostics> restart_log;
  std::vector<double> probe_deviations;  // at the best point
  // Verification of the best point, done by the choi module.
  double witness_min_eigenvalue = 0.0;
  double witness_unitality_residual = 0.0;
  double witness_fix_residual = 0.0;
};

namespace detail {

// Hermitian N x N matrix <-> real vector of length N^2, orthonormal for the
// Frobenius inner product: diagonal entries, then sqrt2 Re / sqrt2 Im of the
// strict upper triangle.
struct HermitianCoords {
  std::size_t N;
  std::size_t size() const { return N * N; }

  std::vector<double> to(const ComplexMatrix& c) const {
    std::vector<double> x(N * N);
    std::size_t k = N;
    for (std::size_t p = 0; p < N; ++p) x[p] = c(p, p).real();
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) {
        const Complex z = 0.5 * (c(p, q) + std::conj(c(q, p)));
        x[k++] = std::sqrt(2.0) * z.real();
        x[k++] = std::sqrt(2.0) * z.imag();
      }
    return x;
  }

  ComplexMatrix from(const std::vector<double>& x) const {
    ComplexMatrix c(N, N);
    std::size_t k = N;
    for (std::size_t p = 0; p < N; ++p) c(p, p) = x[p];
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) {
        const Complex z(x[k] / std::sqrt(2.0), x[k + 1] / std::sqrt(2.0));
        k += 2;
        c(p, q) = z;
        c(q, p) = std::conj(z);
      }
    return c;
  }

  // Gradients of Re L and Im L for L(C) = sum_pq w_pq C_pq.
  void functional_rows(const ComplexMatrix& w, std::vector<double>& re, std::vector<double>& im) const {
    re.assign(N * N, 0.0);
    im.assign(N * N, 0.0);
    std::size_t k = N;
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t p = 0; p < N; ++p) {
      re[p] = w(p, p).real();
      im[p] = w(p, p).imag();
    }
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) {
        const Complex plus = w(p, q) + w(q, p), minus = w(p, q) - w(q, p);
        re[k] = s * plus.real();
        im[k] = s * plus.imag();
        re[k + 1] = -s * minus.imag();
        im[k + 1] = s * minus.real();
        k += 2;
      }
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// {x : <q_k, x> = r_k} with orthonormal q_k.
class AffineSet {
 public:
  void add(std::vector<double> row, double rhs) {
    const double n0 = norm2(row);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < q_.size(); ++k) {
        const double c = dot(q_[k], row);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] -= c * q_[k][i];
        rhs -= c * r_[k];
      }
    const double n = norm2(row);
    if (n <= 1e-10 * std::max(1.0, n0)) {
      if (std::abs(rhs) > 1e-8 * std::max(1.0, n0))
        throw DomainError("uep: constraints are inconsistent (malformed operator system?)");
      return;
    }
    for (double& v : row) v /= n;
    q_.push_back(std::move(row));
    r_.push_back(rhs / n);
  }

  std::vector<double> project(std::vector<double> x) const {
    for (std::size_t k = 0; k < q_.size(); ++k) {
      const double c = dot(q_[k], x) - r_[k];
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * q_[k][i];
    }
    return x;
  }

  // Component of a direction tangent to the affine set.
  std::vector<double> tangent(std::vector<double> d) const {
    for (const auto& q : q_) {
      const double c = dot(q, d);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= c * q[i];
    }
    return d;
  }

  std::size_t rank() const { return q_.size(); }
  const std::vector<std::vector<double>>& rows() const { return q_; }
  const std::vector<double>& rhs() const { return r_; }

 private:
  std::vector<std::vector<double>> q_;
  std::vector<double> r_;
};

// Unitality plus phi(g) = g for each Hermitian basis element g.
inline AffineSet build_constraints(const OperatorSystemM& s, const HermitianCoords& hc) {
  const std::size_t n = s.n();
  AffineSet aff;
  std::vector<double> re, im;
  auto add_entry = [&](const ComplexMatrix& g, std::size_t a, std::size_t b, Complex target) {
    ComplexMatrix w(n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w(i * n + a, j * n + b) = g(i, j);
    hc.functional_rows(w, re, im);
    aff.add(re, target.real());
    aff.add(im, target.imag());
  };
  const ComplexMatrix id = ComplexMatrix::identity(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) add_entry(id, a, b, a == b ? 1.0 : 0.0);
  for (const auto& g : s.hermitian_basis())
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) add_entry(g, a, b, g(a, b));
  return aff;
}

// Every feasible Choi matrix has its range inside span(v); the search runs on
// C = v X v^dagger with X of size r. Without a reduction v is empty.
struct Frame {
  std::size_t N = 0;
  std::size_t r = 0;
  ComplexMatrix v;

  bool reduced() const { return !v.empty(); }
  ComplexMatrix compress(const ComplexMatrix& c) const { return reduced() ? v.adjoint() * c * v : c; }
  ComplexMatrix lift(const ComplexMatrix& x) const { return reduced() ? v * x * v.adjoint() : x; }
  // weights of C -> sum w_pq C_pq as weights on X
  ComplexMatrix compress_functional(const ComplexMatrix& w) const {
    return reduced() ? (v.adjoint() * w.transpose() * v).transpose() : w;
  }
};

// The constraints seen from inside the frame.
inline AffineSet restrict_constraints(const AffineSet& aff, const HermitianCoords& hc, const Frame& f) {
  if (!f.reduced()) return aff;
  const HermitianCoords hr{f.r};
  AffineSet out;
  for (std::size_t k = 0; k < aff.rank(); ++k)
    out.add(hr.to(f.compress(hc.from(aff.rows()[k]))), aff.rhs()[k]);
  return out;
}

// Facial reduction: a PSD W in the span of the constraint functionals with
// <W, C> = 0 on the affine set kills the range of W for every feasible C.
// Such W are looked for by alternating projections with tr W = 1; each find
// shrinks the frame, and the search stops once none is found. Without this,
// feasible sets lying in a face of the cone (the usual case when S pins a
// commutative algebra) make Dykstra crawl.
inline Frame facial_reduction(const AffineSet& aff, const HermitianCoords& hc, std::size_t max_iterations = 3000) {
  Frame f{hc.N, hc.N, {}};
  const auto n = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(hc.N))));
  for (std::size_t round = 0; round < hc.N; ++round) {
    const AffineSet ar = restrict_constraints(aff, hc, f);
    const HermitianCoords hr{f.r};
    const auto& q = ar.rows();
    const auto& rhs = ar.rhs();
    const std::size_t dim = f.r * f.r;
    // u: the functional whose value is fixed to a nonzero number.
    std::vector<double> u(dim, 0.0);
    const double rn = norm2(rhs);
    for (std::size_t k = 0; k < q.size(); ++k)
      for (std::size_t i = 0; i < dim; ++i) u[i] += rhs[k] / rn * q[k][i];
    auto to_l = [&](const std::vector<double>& x) {
      std::vector<double> y(dim, 0.0);
      for (const auto& row : q) {
        const double c = dot(row, x);
        for (std::size_t i = 0; i < dim; ++i) y[i] += c * row[i];
      }
      const double c = dot(u, y);
      for (std::size_t i = 0; i < dim; ++i) y[i] -= c * u[i];
      return y;
    };
    const std::vector<double> id = hr.to(ComplexMatrix::identity(f.r));
    const std::vector<double> il = to_l(id);
    const double il2 = dot(il, il);
    if (il2 < 1e-18) break;
    auto project = [&](const std::vector<double>& x) {
      std::vector<double> y = to_l(x);
      const double c = (1.0 - dot(il, y)) / il2;
      for (std::size_t i = 0; i < dim; ++i) y[i] += c * il[i];
      return y;
    };

    std::vector<double> x = id, p(dim, 0.0), xp(dim), y;
    for (double& e : x) e /= static_cast<double>(f.r);
    ComplexMatrix basis;
    double dist = 0.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      for (std::size_t i = 0; i < dim; ++i) xp[i] = x[i] + p[i];
      EigenDecomposition e = basis.empty() ? eig_hermitian(hr.from(xp)) : eig_hermitian_warm(hr.from(xp), basis);
      basis = e.vectors;
      for (double& ev : e.values) ev = std::max(ev, 0.0);
      y = hr.to(reconstruct(e.vectors, e.values));
      for (std::size_t i = 0; i < dim; ++i) p[i] = xp[i] - y[i];
      x = project(y);
      dist = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dist += (x[i] - y[i]) * (x[i] - y[i]);
      dist = std::sqrt(dist);
      if (dist < 1e-12) break;
    }
    // An unconverged iterate is only trusted on its dominant directions.
    if (dist > 1e-3) break;
    const double cut = dist <= 1e-8 ? 1e-3 : 1e-1;

    const EigenDecomposition w = eig_hermitian(hr.from(y));
    const double top = w.values.back();
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < f.r; ++j)
      if (w.values[j] <= cut * top) keep.push_back(j);
    if (keep.empty() || keep.size() == f.r) break;
    ComplexMatrix k(f.r, keep.size());
    for (std::size_t i = 0; i < f.r; ++i)
      for (std::size_t j = 0; j < keep.size(); ++j) k(i, j) = w.vectors(i, keep[j]);
    Frame next{f.N, keep.size(), f.reduced() ? f.v * k : k};
    // The identity channel is always feasible, so it has to survive the cut.
    const ComplexMatrix cid = choi::choi_of_identity(n).matrix();
    if ((next.lift(next.compress(cid)) - cid).frobenius_norm() > 1e-8) break;
    try {
      restrict_constraints(aff, hc, next);
    } catch (const DomainError&) {
      break;
    }
    f = std::move(next);
  }
  return f;
}

struct Projector {
  const HermitianCoords& hc;
  const AffineSet& aff;
  std::size_t max_iterations;
  double change_tol;

  struct Result {
    std::vector<double> point;  // PSD iterate
    std::size_t iterations = 0;
    bool capped = false;
    double change = 0.0;
    double affine_residual = 0.0;
  };

  std::vector<double> psd(const std::vector<double>& x, ComplexMatrix& basis) const {
    const ComplexMatrix c = hc.from(x);
    EigenDecomposition e = basis.empty() ? eig_hermitian(c) : eig_hermitian_warm(c, basis);
    basis = e.vectors;
    for (double& v : e.values) v = std::max(v, 0.0);
    return hc.to(reconstruct(e.vectors, e.values));
  }

  // Dykstra from `start`; the affine set needs no correction term.
  Result run(const std::vector<double>& start, std::vector<double>* distance_log) const {
    Result r;
    std::vector<double> x = start, p(start.size(), 0.0), y, xp(start.size());
    ComplexMatrix basis;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + p[i];
      y = psd(xp, basis);
      for (std::size_t i = 0; i < x.size(); ++i) p[i] = xp[i] - y[i];
      std::vector<double> xn = aff.project(y);
      double change = 0.0, dist = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        change += (xn[i] - x[i]) * (xn[i] - x[i]);
        dist += (xn[i] - y[i]) * (xn[i] - y[i]);
      }
      x = std::move(xn);
      r.iterations = it + 1;
      r.change = std::sqrt(change);
      r.affine_residual = std::sqrt(dist);
      if (distance_log) distance_log->push_back(r.affine_residual);
      if (r.change < change_tol) break;
    }
    r.capped = r.change >= change_tol;
    r.point = std::move(y);
    return r;
  }
};

// Polishing in factored form C = K K^dagger: Levenberg-Marquardt on the
// affine residual. Near faces of the PSD cone, where the alternating
// projections slow down, this still converges, and the result is PSD by
// construction.
struct FactoredPolish {
  const HermitianCoords& hc;
  const AffineSet& aff;
  std::size_t max_steps = 200;
  static constexpr double kTarget = 1e-13;  // far below fix_tol
  std::vector<ComplexMatrix> q;

  FactoredPolish(const HermitianCoords& h, const AffineSet& a) : hc(h), aff(a) {
    for (const auto& row : aff.rows()) q.push_back(hc.from(row));
  }

  double residual(const ComplexMatrix& c, std::vector<double>& res) const {
    const std::vector<double> x = hc.to(c);
    res.resize(q.size());
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      res[k] = dot(aff.rows()[k], x) - aff.rhs()[k];
      s += res[k] * res[k];
    }
    return std::sqrt(s);
  }

  // Solves (m + mu) z = z by Cholesky; false if not positive definite.
  static bool solve_spd(std::vector<double> m, std::size_t dim, double mu, std::vector<double>& z) {
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] += mu;
    for (std::size_t j = 0; j < dim; ++j) {
      double d = m[j * dim + j];
      for (std::size_t k = 0; k < j; ++k) d -= m[j * dim + k] * m[j * dim + k];
      if (!(d > 0.0)) return false;
      d = std::sqrt(d);
      m[j * dim + j] = d;
      for (std::size_t i = j + 1; i < dim; ++i) {
        double v = m[i * dim + j];
        for (std::size_t k = 0; k < j; ++k) v -= m[i * dim + k] * m[j * dim + k];
        m[i * dim + j] = v / d;
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      double v = z[i];
      for (std::size_t k = 0; k < i; ++k) v -= m[i * dim + k] * z[k];
      z[i] = v / m[i * dim + i];
    }
    for (std::size_t i = dim; i-- > 0;) {
      double v = z[i];
      for (std::size_t k = i + 1; k < dim; ++k) v -= m[k * dim + i] * z[k];
      z[i] = v / m[i * dim + i];
    }
    return true;
  }

  std::vector<double> run(const std::vector<double>& y, double* final_residual = nullptr) const {
    const std::size_t N = hc.N, m = q.size();
    const EigenDecomposition e = eig_hermitian(hc.from(y));
    ComplexMatrix k(N, N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) k(i, j) = e.vectors(i, j) * std::sqrt(std::max(e.values[j], 0.0));

    std::vector<double> res;
    ComplexMatrix c = k * k.adjoint();
    double rn = residual(c, res);
    ComplexMatrix best_c = c;
    double best_rn = rn;
    std::vector<ComplexMatrix> g(m);
    std::vector<double> jj(m * m);
    for (std::size_t step = 0; step < max_steps && rn > kTarget; ++step) {
      // residual k has gradient 2 Q_k K in the real inner product
      for (std::size_t a = 0; a < m; ++a) g[a] = 2.0 * (q[a] * k);
      double trace = 0.0;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
          const double v = frobenius_inner(g[a], g[b]).real();
          jj[a * m + b] = v;
          jj[b * m + a] = v;
          if (a == b) trace += v;
        }
      double step_rn = std::numeric_limits<double>::infinity();
      ComplexMatrix step_c, step_k;
      for (double mu : {1e-13 * trace, 1e-2 * rn, 0.3 * rn, rn, 3.0 * rn, 1e2 * rn}) {
        std::vector<double> z = res;
        if (!solve_spd(jj, m, mu, z)) continue;
        ComplexMatrix kt = k;
        for (std::size_t a = 0; a < m; ++a) kt -= z[a] * g[a];
        ComplexMatrix ct = kt * kt.adjoint();
        std::vector<double> rt;
        const double r = residual(ct, rt);
        if (r < step_rn) {
          step_rn = r;
          step_k = std::move(kt);
          step_c = std::move(ct);
        }
      }
      if (!(step_rn < rn)) break;
      k = std::move(step_k);
      c = std::move(step_c);
      rn = residual(c, res);
      if (rn < best_rn) {
        best_rn = rn;
        best_c = c;
      }
    }
    if (final_residual) *final_residual = best_rn;
    return hc.to(hermitian_part(best_c));
  }
};

inline choi::ChoiMatrix to_choi(const HermitianCoords& hc, const Frame& f, std::size_t n, const std::vector<double>& x) {
  return choi::ChoiMatrix(n, n, hermitian_part(f.lift(hc.from(x))));
}

inline std::vector<double> probe_deviations(const choi::ChoiMatrix& phi, const std::vector<ComplexMatrix>& probes) {
  std::vector<double> d;
  for (const auto& t : probes) d.push_back(operator_norm(choi::apply(phi, t) - t));
  return d;
}

inline double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

// Top singular pair (u, v) of m: m v = sigma u.
inline double top_singular_pair(const ComplexMatrix& m, std::vector<Complex>& u, std::vector<Complex>& v) {
  const std::size_t n = m.cols();
  const auto e = eig_hermitian(hermitian_part(m.adjoint() * m));
  const double sigma = std::sqrt(std::max(0.0, e.values.back()));
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = e.vectors(i, n - 1);
  u.assign(m.rows(), Complex{});
  if (sigma == 0.0) return 0.0;
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = 0; b < n; ++b) u[a] += m(a, b) * v[b];
    u[a] /= sigma;
  }
  return sigma;
}

struct RestartResult {
  std::vector<double> point;  // reduced coordinates
  RestartDiagnostics diag;
};

// One restart in the reduced coordinates of the frame.
inline RestartResult run_restart(const OperatorSystemM& s, const std::vector<ComplexMatrix>& probes,
                                 const UepParams& prm, const Frame& frame, const HermitianCoords& hc,
                                 const AffineSet& aff, std::size_t index) {
  const std::size_t n = s.n(), R = frame.r;
  RestartResult out;
  RestartDiagnostics& d = out.diag;
  d.seed = prm.seed + index;
  d.epsilon = prm.epsilons[index % prm.epsilons.size()];

  // Random Hermitian direction, trace-orthogonal to the identity channel, unit norm.
  std::mt19937_64 rng(d.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix dir(R, R);
  for (std::size_t p = 0; p < R; ++p)
    for (std::size_t q = 0; q < R; ++q) dir(p, q) = Complex(gauss(rng), gauss(rng));
  dir = hermitian_part(dir);
  const ComplexMatrix cid = frame.compress(choi::choi_of_identity(n).matrix());
  dir -= (frobenius_inner(cid, dir).real() / frobenius_inner(cid, cid).real()) * cid;
  if (dir.frobenius_norm() > 0.0) dir *= 1.0 / dir.frobenius_norm();

  const Projector proj{hc, aff, prm.max_iterations, prm.change_tol};
  const Projector short_proj{hc, aff, prm.ascent_iterations, prm.change_tol};
  const FactoredPolish polish(hc, aff);
  // Dykstra, then the factored polish; the polished point is the candidate.
  auto settle = [&](const Projector& pr, const std::vector<double>& from, std::vector<double>* log,
                    double& residual, double& change) {
    auto r = pr.run(from, log);
    d.iterations += r.iterations;
    d.hit_iteration_cap = d.hit_iteration_cap || r.capped;
    change = r.change;
    residual = r.affine_residual;
    if (!prm.polish) return r.point;
    return polish.run(r.point, &residual);
  };
  auto deviation = [&](const std::vector<double>& x) { return max_of(probe_deviations(to_choi(hc, frame, n, x), probes)); };

  std::vector<double> start = hc.to(cid + (d.epsilon * static_cast<double>(n)) * dir);
  double best_res = 0.0, best_change = 0.0;
  std::vector<double> best = settle(proj, start, &d.affine_distance, best_res, best_change);
  double best_dev = deviation(best);

  // Projected ascent on |u^dagger (phi(T) - T) v| for the worst probe.
  double step = 0.5 * static_cast<double>(n);
  std::vector<Complex> u, v;
  const std::size_t N = n * n;
  for (std::size_t k = 0; k < prm.ascent_steps && !probes.empty(); ++k) {
    const auto phi = to_choi(hc, frame, n, best);
    const auto devs = probe_deviations(phi, probes);
    const std::size_t j = static_cast<std::size_t>(std::max_element(devs.begin(), devs.end()) - devs.begin());
    const ComplexMatrix& t = probes[j];
    if (top_singular_pair(choi::apply(phi, t) - t, u, v) < 1e-13) {
      // No preferred direction at a fixed point: any unit pair will do.
      auto unit = [&](std::vector<Complex>& z) {
        double s2 = 0.0;
        for (auto& c : z) {
          c = Complex(gauss(rng), gauss(rng));
          s2 += std::norm(c);
        }
        for (auto& c : z) c /= std::sqrt(s2);
      };
      unit(u);
      unit(v);
    }
    // d/dC Re u^dagger phi(T) v has weights T_ij conj(u_a) v_b at ((i,a),(j,b)).
    ComplexMatrix w(N, N);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t jj = 0; jj < n; ++jj)
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) w(i * n + a, jj * n + b) = t(i, jj) * std::conj(u[a]) * v[b];
    std::vector<double> gre, gim;
    hc.functional_rows(frame.compress_functional(w), gre, gim);
    std::vector<double> g = aff.tangent(gre);
    const double gn = norm2(g);
    if (gn < 1e-12) break;  // probe is pinned by the constraints
    ++d.ascent_steps;
    std::vector<double> trial = best;
    for (std::size_t i = 0; i < g.size(); ++i) trial[i] += step * g[i] / gn;
    double res2 = 0.0, change2 = 0.0;
    std::vector<double> cand = settle(short_proj, trial, nullptr, res2, change2);
    const double dev2 = deviation(cand);
    if (dev2 > best_dev + 1e-9) {
      best = std::move(cand);
      best_dev = dev2;
      best_res = res2;
      best_change = change2;
    } else {
      step *= 0.25;
      if (step < 1e-4) break;
    }
  }
  d.deviation = best_dev;
  d.affine_residual = best_res;
  d.final_change = best_change;
  out.point = std::move(best);
  return out;
}

}  // namespace detail

inline UepReport uep_check(const OperatorSystemM& s, const std::vector<ComplexMatrix>& probes,
                           const UepParams& prm = {}) {
  if (prm.restarts == 0) throw DomainError("uep_check: need at least one restart");
  if (prm.epsilons.empty()) throw DomainError("uep_check: empty perturbation schedule");
  for (double e : prm.epsilons)
    if (!(e > 0.0)) throw DomainError("uep_check: perturbation sizes must be positive");
  const std::size_t n = s.n();
  for (const auto& t : probes)
    if (t.rows() != n || t.cols() != n) throw DimensionError("uep_check: probe has shape " + t.shape());

  const detail::HermitianCoords full{n * n};
  const detail::AffineSet full_aff = detail::build_constraints(s, full);
  const detail::Frame frame = detail::facial_reduction(full_aff, full);
  const detail::HermitianCoords hc{frame.r};
  const detail::AffineSet aff = detail::restrict_constraints(full_aff, full, frame);

  std::vector<detail::RestartResult> results(prm.restarts);
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(prm.restarts, prm.threads ? prm.threads : std::thread::hardware_concurrency()));
  for (std::size_t begin = 0; begin < prm.restarts; begin += threads) {
    const std::size_t end = std::min(prm.restarts, begin + threads);
    if (end - begin == 1) {
      results[begin] = detail::run_restart(s, probes, prm, frame, hc, aff, begin);
      continue;
    }
    std::vector<std::future<detail::RestartResult>> jobs;
    for (std::size_t r = begin; r < end; ++r)
      jobs.push_back(std::async(std::launch::async, [&, r] { return detail::run_restart(s, probes, prm, frame, hc, aff, r); }));
    for (std::size_t r = begin; r < end; ++r) results[r] = jobs[r - begin].get();
  }

  UepReport rep;
  rep.probes = probes;
  rep.restarts = prm.restarts;
  for (std::size_t r = 0; r < results.size(); ++r) {
    rep.iterations += results[r].diag.iterations;
    if (results[r].diag.deviation > results[rep.best_restart].diag.deviation) rep.best_restart = r;
    rep.restart_log.push_back(results[r].diag);
  }
  const auto& best = results[rep.best_restart];
  rep.final_residual = best.diag.affine_residual;
  rep.frame_rank = frame.r;

  // Independent re-verification of the best point.
  const choi::ChoiMatrix phi = detail::to_choi(hc, frame, n, best.point);
  const auto ucp = choi::is_ucp(phi, prm.fix_tol);
  rep.witness_min_eigenvalue = ucp.min_eigenvalue;
  rep.witness_unitality_residual = ucp.unitality_residual;
  for (const auto& g : s.generators())
    rep.witness_fix_residual = std::max(rep.witness_fix_residual, operator_norm(choi::apply(phi, g) - g));
  rep.best_map = phi;
  rep.probe_deviations = detail::probe_deviations(phi, probes);
  rep.deviation = detail::max_of(rep.probe_deviations);
  if (rep.deviation > prm.violation_tol && ucp.ok && rep.witness_fix_residual <= prm.fix_tol) {
    rep.status = UepStatus::Violated;
    rep.witness = phi;
  }
  return rep;
}

// Theorem-style witness for a diagonal A with at least three distinct
// eigenvalues l1 < l2 < l3 (smallest, second smallest, largest): every
// diagonal slot holding l2 is replaced by t*(slot of l1) + (1-t)*(slot of l3)
// with t = (l3 - l2)/(l3 - l1), after pinching. Fixes 1 and A, moves A^2.
inline choi::ChoiMatrix convex_split_witness(const HermitianMatrix& a) {
  const std::size_t n = a.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && a(i, j) != Complex{}) throw DomainError("convex_split_witness: A must be diagonal");
  const auto d = a.diagonal_entries();
  std::vector<double> distinct = d;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw PreconditionError("convex_split_witness: A needs at least 3 points in its spectrum, has " +
                            std::to_string(distinct.size()));
  const double l1 = distinct.front(), l2 = distinct[1], l3 = distinct.back();
  const double t = (l3 - l2) / (l3 - l1);
  const std::size_t i1 = static_cast<std::size_t>(std::find(d.begin(), d.end(), l1) - d.begin());
  const std::size_t i3 = static_cast<std::size_t>(std::find(d.begin(), d.end(), l3) - d.begin());
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] == l2) {
      w[i * n + i1] = t;
      w[i * n + i3] = 1.0 - t;
    } else {
      w[i * n + i] = 1.0;
    }
  }
  return choi::compose(choi::choi_of_diagonal_map(n, n, w), choi::choi_of_pinching(n));
}

// Block-diagonal system span{g1_k (+) g2_k}, probes paired the same way.
// Both summands must already have reported NoViolationFound.
inline UepReport direct_sum_check(const OperatorSystemM& s1, const UepReport& r1, const OperatorSystemM& s2,
                                  const UepReport& r2, const UepParams& prm = {}) {
  if (r1.status != UepStatus::NoViolationFound || r2.status != UepStatus::NoViolationFound)
    throw PreconditionError("direct_sum_check: both summands must have reported NoViolationFound");
  if (s1.generators().size() != s2.generators().size())
    throw DimensionError("direct_sum_check: summands have different numbers of generators");
  if (r1.probes.size() != r2.probes.size())
    throw DimensionError("direct_sum_check: summands have different numbers of probes");
  std::vector<ComplexMatrix> gens, probes;
  for (std::size_t k = 0; k < s1.generators().size(); ++k)
    gens.push_back(direct_sum(s1.generators()[k], s2.generators()[k]));
  for (std::size_t k = 0; k < r1.probes.size(); ++k) probes.push_back(direct_sum(r1.probes[k], r2.probes[k]));
  return uep_check(OperatorSystemM(s1.n() + s2.n(), std::move(gens)), probes, prm);
}

}  // namespace hyperrigid::uep
