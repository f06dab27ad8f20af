#pragma once

// Worked operator examples: a midpoint discretization of the Volterra
// integration operator, the negative-element and annihilating-state
// constructions for span{V, V^dagger}, random unitary generators run through
// the UEP solver, and a numerical almost-domination test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"
#include "hyperrigid/linalg.hpp"
#include "hyperrigid/matrix.hpp"
#include "hyperrigid/uep.hpp"

namespace hyperrigid::lab {

struct VolterraDiscretization {
  std::size_t n = 0;
  ComplexMatrix V;
  HermitianMatrix A;  // (V + V^dagger) / 2
  HermitianMatrix B;  // (V - V^dagger) / 2i
};

// Midpoint rule on x_i = (i + 1/2) / n. The diagonal gets half a cell, which
// makes the real part exactly (1/2n) * ones.
inline VolterraDiscretization discretize_volterra(std::size_t n) {
  if (n < 2) throw PreconditionError("discretize_volterra: need n >= 2, got " + std::to_string(n));
  const double h = 1.0 / static_cast<double>(n);
  ComplexMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) v(i, j) = h;
    v(i, i) = 0.5 * h;
  }
  const ComplexMatrix b = Complex(0.0, -0.5) * (v - v.adjoint());
  return {n, v, HermitianMatrix::from_hermitian_part(v), HermitianMatrix::from_hermitian_part(b)};
}

struct EigenvalueMatch {
  int k = 0;
  double target = 0.0;  // -1/((2k+1) pi)
  double eigenvalue = 0.0;
  double relative_error = 0.0;
};

struct SchattenSum {
  double p = 0.0;
  double sum = 0.0;
};

struct VolterraSpectralReport {
  std::size_t n = 0;
  double real_part_residual = 0.0;  // max |eig(A) - {1/2, 0, ..., 0}|
  std::vector<EigenvalueMatch> matches;  // by decreasing |target|
  std::vector<SchattenSum> schatten;
  double min_abs_imag_eigenvalue = 0.0;
};

inline double volterra_target(int k) { return -1.0 / ((2.0 * k + 1.0) * std::numbers::pi); }

inline VolterraSpectralReport volterra_spectral_report(std::size_t n) {
  if (n < 16) throw PreconditionError("volterra_spectral_report: need n >= 16, got " + std::to_string(n));
  const auto vd = discretize_volterra(n);
  VolterraSpectralReport r;
  r.n = n;

  const std::vector<double> ea = eig_hermitian(vd.A).values;
  for (std::size_t i = 0; i < n; ++i) {
    const double want = i + 1 == n ? 0.5 : 0.0;
    r.real_part_residual = std::max(r.real_part_residual, std::abs(ea[i] - want));
  }

  const std::vector<double> eb = eig_hermitian(vd.B).values;
  r.min_abs_imag_eigenvalue = std::numeric_limits<double>::infinity();
  for (double e : eb) r.min_abs_imag_eigenvalue = std::min(r.min_abs_imag_eigenvalue, std::abs(e));
  // k = 0, -1, 1, -2, 2, ...: targets -1/pi, +1/pi, -1/3pi, +1/3pi, ...
  for (int j = 0; j < 10; ++j) {
    const int k = j % 2 == 0 ? j / 2 : -(j + 1) / 2;
    const double t = volterra_target(k);
    double best = eb.front();
    for (double e : eb)
      if (std::abs(e - t) < std::abs(best - t)) best = e;
    r.matches.push_back({k, t, best, std::abs(best - t) / std::abs(t)});
  }

  const std::vector<double> sv = singular_values(vd.V);
  for (double p : {1.0, 1.5, 2.0}) {
    double s = 0.0;
    for (double x : sv) s += std::pow(x, p);
    r.schatten.push_back({p, s});
  }
  return r;
}

struct NegativeElement {
  HermitianMatrix s;  // -cA + A^2 - B^2
  double margin = 0.0;  // -lambda_max(s)
  bool ok = false;      // margin > 0
};

// s = -cA + (A^2 - B^2) <= -B^2 whenever A^2 <= cA.
inline NegativeElement strictly_negative_element(const HermitianMatrix& a, const HermitianMatrix& b, double c) {
  if (a.dim() != b.dim())
    throw DimensionError("strictly_negative_element: A is " + a.matrix().shape() + ", B is " + b.matrix().shape());
  const std::vector<double> ea = eig_hermitian(a).values;
  const double tol = 1e-12 * (1.0 + std::abs(ea.back()) + std::abs(ea.front()));
  if (ea.front() < -tol)
    throw PreconditionError("strictly_negative_element: A is not PSD (eigenvalue " + std::to_string(ea.front()) + ")");
  // A^2 <= cA iff every eigenvalue a of A has a^2 <= c a
  for (double e : ea)
    if (e * e - c * e > tol * (1.0 + std::abs(c)))
      throw PreconditionError("strictly_negative_element: c = " + std::to_string(c) +
                              " is too small, A has eigenvalue " + std::to_string(e));
  const ComplexMatrix& am = a.matrix();
  const ComplexMatrix& bm = b.matrix();
  NegativeElement out;
  out.s = HermitianMatrix::from_hermitian_part(-c * am + am * am - bm * bm);
  out.margin = -max_eigenvalue(out.s);
  out.ok = out.margin > 0.0;
  return out;
}

struct StateVector {
  HermitianMatrix density;
};

inline Complex expectation(const StateVector& rho, const ComplexMatrix& x) {
  return frobenius_inner(rho.density.matrix(), x);
}

// A state killing A and B, hence V and V^dagger: mix the top and bottom
// eigenvectors of QBQ (Q projects off the range of A) so the B-values cancel.
inline StateVector infinity_obstruction_witness(const VolterraDiscretization& vd) {
  const std::size_t n = vd.n;
  const EigenDecomposition ea = eig_hermitian(vd.A);
  const double cut = 1e-10 * std::max(1.0, std::abs(ea.values.back()));
  ComplexMatrix q = ComplexMatrix::identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(ea.values[k]) <= cut) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) q(i, j) -= ea.vectors(i, k) * std::conj(ea.vectors(j, k));
  }
  const EigenDecomposition e = eig_hermitian(HermitianMatrix::from_hermitian_part(q * vd.B.matrix() * q));
  const double mu_minus = e.values.front(), mu_plus = e.values.back();
  const double tol = 1e-12 * (1.0 + vd.B.matrix().max_abs());
  if (!(mu_plus > tol && mu_minus < -tol))
    throw PreconditionError("infinity_obstruction_witness: compressed imaginary part is one-signed (spectrum [" +
                            std::to_string(mu_minus) + ", " + std::to_string(mu_plus) + "])");
  const double wp = -mu_minus / (mu_plus - mu_minus);
  const double wm = mu_plus / (mu_plus - mu_minus);
  ComplexMatrix rho(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      rho(i, j) = wp * e.vectors(i, n - 1) * std::conj(e.vectors(j, n - 1)) +
                  wm * e.vectors(i, 0) * std::conj(e.vectors(j, 0));
  return {HermitianMatrix::from_hermitian_part(rho)};
}

// Haar unitary: Gram-Schmidt QR of a complex Gaussian matrix. Columns come
// out with positive R diagonal, which is the phase normalization.
inline ComplexMatrix haar_unitary(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(n, n);
  for (auto& z : m.data()) z = Complex(g(rng), g(rng));
  for (std::size_t k = 0; k < n; ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(m(i, j)) * m(i, k);
        for (std::size_t i = 0; i < n; ++i) m(i, k) -= dot * m(i, j);
      }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(m(i, k));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) m(i, k) /= nrm;
  }
  return m;
}

// Dimension of {X : X U = U X for every U}. 1 means the U generate M_n.
inline std::size_t commutant_dimension(const std::vector<ComplexMatrix>& us) {
  if (us.empty()) throw PreconditionError("commutant_dimension: no matrices");
  const std::size_t n = us.front().rows();
  const std::size_t nn = n * n;
  ComplexMatrix gram(nn, nn);
  const ComplexMatrix id = ComplexMatrix::identity(n);
  for (const auto& u : us) {
    // vec(XU - UX) with row-major vec: (I kron U^T - U kron I) vec(X)
    const ComplexMatrix m = kron(id, u.transpose()) - kron(u, id);
    gram += m.adjoint() * m;
  }
  const std::vector<double> ev = eig_hermitian(HermitianMatrix::from_hermitian_part(gram)).values;
  const double tol = 1e-9 * std::max(1.0, ev.back());
  return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](double x) { return x <= tol; }));
}

struct UnitaryDemoReport {
  uep::UepReport uep;
  std::vector<ComplexMatrix> unitaries;
  std::uint64_t seed = 0;       // requested
  std::uint64_t seed_used = 0;  // draw that passed the commutant check
  std::size_t attempts = 0;
  std::size_t commutant_dim = 0;
  std::vector<std::size_t> rejected_commutant_dims;
};

// k Haar unitaries in M_n, S = span{1, U_j, U_j^dagger, sum U_j U_j^dagger}.
// Draws whose algebra is proper are redrawn with the next seed. The UEP
// restarts use the same seed as the accepted draw.
inline UnitaryDemoReport unitary_generator_demo(std::size_t n, std::size_t k, std::uint64_t seed,
                                                uep::UepParams prm = {}, std::size_t max_attempts = 8) {
  if (n < 1 || n > 6) throw PreconditionError("unitary_generator_demo: need 1 <= n <= 6, got " + std::to_string(n));
  if (k < 1 || k > 3) throw PreconditionError("unitary_generator_demo: need 1 <= k <= 3, got " + std::to_string(k));
  UnitaryDemoReport r;
  r.seed = seed;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const std::uint64_t s = seed + attempt;
    std::mt19937_64 rng(s);
    std::vector<ComplexMatrix> us;
    for (std::size_t j = 0; j < k; ++j) us.push_back(haar_unitary(n, rng));
    r.attempts = attempt + 1;
    const std::size_t cd = commutant_dimension(us);
    if (cd != 1) {
      r.rejected_commutant_dims.push_back(cd);
      continue;
    }
    ComplexMatrix uu(n, n);
    std::vector<ComplexMatrix> gens{ComplexMatrix::identity(n)};
    for (const auto& u : us) {
      gens.push_back(u);
      gens.push_back(u.adjoint());
      uu += u * u.adjoint();
    }
    gens.push_back(uu);
    std::vector<ComplexMatrix> probes;
    if (k >= 2) probes.push_back(us[0] * us[1]);
    probes.push_back(us[0] * us[0]);
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix h(n, n);
    for (auto& z : h.data()) z = Complex(g(rng), g(rng));
    probes.push_back(hermitian_part(h));

    prm.seed = s;
    r.uep = uep::uep_check(uep::OperatorSystemM(n, gens), probes, prm);
    r.unitaries = std::move(us);
    r.seed_used = s;
    r.commutant_dim = cd;
    return r;
  }
  std::string dims;
  for (std::size_t d : r.rejected_commutant_dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  throw PreconditionError("unitary_generator_demo: generated algebra is proper in all " + std::to_string(max_attempts) +
                          " draws (commutant dimensions " + dims + ")");
}

struct DominationParams {
  std::size_t max_iterations = 2000;  // BFGS steps over all smoothing stages
  double tau_start = 1e-1;            // relative to 1 + ||p||
  double tau_final = 1e-10;
};

struct DominationEntry {
  double epsilon = 0.0;
  double margin = 0.0;  // lambda_max(p - s - eps)
  bool success = false;  // margin <= 0
};

struct DominationReport {
  std::size_t basis_size = 0;
  std::vector<double> coefficients;
  HermitianMatrix s;
  double lambda_max = 0.0;  // lambda_max(p - s) at the best s found
  std::vector<DominationEntry> entries;
  bool success = false;
  std::size_t iterations = 0;
  bool hit_cap = false;
};

namespace detail {

struct SoftMax {
  double value = 0.0;   // tau log tr exp(M / tau)
  double lmax = 0.0;    // exact lambda_max(M)
  std::vector<double> grad;
};

inline SoftMax soft_lambda_max(const ComplexMatrix& p, const std::vector<ComplexMatrix>& basis,
                               const std::vector<double>& c, double tau) {
  ComplexMatrix m = p;
  for (std::size_t k = 0; k < basis.size(); ++k) m -= c[k] * basis[k];
  const EigenDecomposition e = eig_hermitian(HermitianMatrix::from_hermitian_part(m));
  const std::size_t n = e.values.size();
  const double top = e.values.back();
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += (w[i] = std::exp((e.values[i] - top) / tau));
  SoftMax out;
  out.lmax = top;
  out.value = top + tau * std::log(z);
  // dF/dc_k = -tr(h_k W), W = sum w_i v_i v_i^dagger / z
  ComplexMatrix wm(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i] / z;
    if (wi < 1e-18) continue;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) wm(a, b) += wi * e.vectors(a, i) * std::conj(e.vectors(b, i));
  }
  out.grad.resize(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) out.grad[k] = -frobenius_inner(basis[k], wm).real();
  return out;
}

}  // namespace detail

// Is p almost dominated by the real span of the Hermitian parts of the
// generators (no unit added)? Minimizes lambda_max(p - s) over that span by
// BFGS on a log-sum-exp smoothing with shrinking temperature. A success comes
// with an explicit s; a failure is only as good as the search.
inline DominationReport almost_dominated_check(const std::vector<ComplexMatrix>& generators, const HermitianMatrix& p,
                                               const std::vector<double>& eps_list, const DominationParams& prm = {}) {
  const std::size_t n = p.dim();
  for (const auto& g : generators)
    if (g.rows() != n || g.cols() != n)
      throw DimensionError("almost_dominated_check: generator is " + g.shape() + ", p is " + p.matrix().shape());
  if (eps_list.empty()) throw DomainError("almost_dominated_check: empty epsilon list");
  for (double e : eps_list)
    if (!(e >= 0.0)) throw DomainError("almost_dominated_check: epsilon must be >= 0, got " + std::to_string(e));
  const double pmin = min_eigenvalue(p);
  if (pmin < -1e-12 * (1.0 + p.matrix().max_abs()))
    throw PreconditionError("almost_dominated_check: p is not PSD (eigenvalue " + std::to_string(pmin) + ")");

  const std::vector<ComplexMatrix> basis = uep::hermitian_span_basis(generators);
  const std::size_t m = basis.size();
  const double stop = *std::min_element(eps_list.begin(), eps_list.end());

  DominationReport r;
  r.basis_size = m;
  std::vector<double> c(m, 0.0), best_c = c;
  double best = max_eigenvalue(p);
  auto consider = [&](const std::vector<double>& x, double lmax) {
    if (lmax < best) {
      best = lmax;
      best_c = x;
    }
  };
  // least-squares start: exact when p lies in the span
  std::vector<double> ls(m);
  for (std::size_t k = 0; k < m; ++k) ls[k] = frobenius_inner(basis[k], p.matrix()).real();
  if (m > 0) {
    ComplexMatrix res = p.matrix();
    for (std::size_t k = 0; k < m; ++k) res -= ls[k] * basis[k];
    consider(ls, max_eigenvalue(HermitianMatrix::from_hermitian_part(res)));
    c = best_c;
  }

  const double scale = 1.0 + operator_norm(p.matrix());
  std::size_t it = 0;
  bool converged_last = false;
  for (double tau = prm.tau_start * scale; m > 0 && best > stop && it < prm.max_iterations; tau *= 0.1) {
    const bool last = tau <= prm.tau_final * scale;
    converged_last = false;
    // BFGS with inverse Hessian h, Armijo backtracking
    std::vector<double> h(m * m, 0.0);
    for (std::size_t k = 0; k < m; ++k) h[k * m + k] = 1.0;
    detail::SoftMax f = detail::soft_lambda_max(p.matrix(), basis, c, tau);
    consider(c, f.lmax);
    while (it < prm.max_iterations && best > stop) {
      double gnorm = 0.0;
      for (double g : f.grad) gnorm = std::max(gnorm, std::abs(g));
      if (gnorm <= 1e-13) {
        converged_last = true;
        break;
      }
      std::vector<double> d(m, 0.0);
      double slope = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) d[a] -= h[a * m + b] * f.grad[b];
        slope += d[a] * f.grad[a];
      }
      if (slope >= 0.0) {  // lost descent: reset to steepest
        std::fill(h.begin(), h.end(), 0.0);
        for (std::size_t k = 0; k < m; ++k) h[k * m + k] = 1.0;
        for (std::size_t a = 0; a < m; ++a) d[a] = -f.grad[a];
        slope = 0.0;
        for (std::size_t a = 0; a < m; ++a) slope += d[a] * f.grad[a];
      }
      double step = 1.0;
      std::vector<double> cn(m);
      detail::SoftMax fn;
      bool moved = false;
      for (int ls_iter = 0; ls_iter < 60; ++ls_iter, step *= 0.5) {
        for (std::size_t a = 0; a < m; ++a) cn[a] = c[a] + step * d[a];
        fn = detail::soft_lambda_max(p.matrix(), basis, cn, tau);
        if (fn.value <= f.value + 1e-4 * step * slope) {
          moved = true;
          break;
        }
      }
      ++it;
      if (!moved) {
        converged_last = true;
        break;
      }
      consider(cn, fn.lmax);
      std::vector<double> sv(m), yv(m);
      double sy = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        sv[a] = cn[a] - c[a];
        yv[a] = fn.grad[a] - f.grad[a];
        sy += sv[a] * yv[a];
      }
      if (sy > 1e-300) {
        std::vector<double> hy(m, 0.0);
        double yhy = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) hy[a] += h[a * m + b] * yv[b];
          yhy += yv[a] * hy[a];
        }
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = 0; b < m; ++b)
            h[a * m + b] += ((sy + yhy) * sv[a] * sv[b]) / (sy * sy) - (hy[a] * sv[b] + sv[a] * hy[b]) / sy;
      }
      c = std::move(cn);
      f = std::move(fn);
    }
    if (last) break;
  }
  r.iterations = it;
  r.hit_cap = m > 0 && best > stop && it >= prm.max_iterations && !converged_last;

  r.coefficients = best_c;
  ComplexMatrix s(n, n);
  for (std::size_t k = 0; k < m; ++k) s += best_c[k] * basis[k];
  r.s = HermitianMatrix::from_hermitian_part(s);
  r.lambda_max = best;
  r.success = true;
  for (double e : eps_list) {
    const double margin = best - e;
    r.entries.push_back({e, margin, margin <= 0.0});
    r.success = r.success && margin <= 0.0;
  }
  return r;
}

}  // namespace hyperrigid::lab
