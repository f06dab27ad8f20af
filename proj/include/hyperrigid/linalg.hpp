#pragma once

// Hermitian eigensolvers (cyclic complex Jacobi for small and warm-started
// problems, Householder + implicit QL for large ones) and the spectral utilities
// built on it: functional calculus, operator norm, singular values and the
// Frobenius-nearest PSD projection.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numeric>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"
#include "hyperrigid/matrix.hpp"

namespace hyperrigid {

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // unitary, column k belongs to values[k]
};

enum class EigMethod {
  Auto,         // Jacobi up to kJacobiMaxDim, tridiagonal QL above
  Jacobi,       // cyclic complex Jacobi
  Tridiagonal,  // Householder reduction + implicit QL
};

inline constexpr std::size_t kJacobiMaxDim = 96;

struct JacobiOptions {
  int max_sweeps = 80;
  // Stop once the off-diagonal Frobenius norm drops below this fraction of ||A||_F.
  double off_tol = 1e-15;
  // Input symmetry tolerance, relative to (1 + max|entry|).
  double symmetry_tol = 1e-10;
  EigMethod method = EigMethod::Auto;
};

namespace detail {

inline double off_diagonal_sq(std::size_t n, const std::vector<Complex>& a) {
  double off = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * std::norm(a[p * n + q]);
  return off;
}

// Cyclic Jacobi on a Hermitian matrix stored row-major in `a` (both triangles
// kept consistent). `vt` holds the transpose of the accumulated unitary, so
// eigenvector k is row k of vt. On return the diagonal of `a` carries the
// eigenvalues.
inline void jacobi_in_place(std::size_t n, std::vector<Complex>& a, std::vector<Complex>& vt,
                            const JacobiOptions& opt) {
  double total = 0.0;
  for (const auto& z : a) total += std::norm(z);
  if (total == 0.0) return;
  const double target = opt.off_tol * opt.off_tol * total;

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    if (off_diagonal_sq(n, a) <= target) return;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        Complex* rp = a.data() + p * n;
        Complex* rq = a.data() + q * n;
        const Complex apq = rp[q];
        const double r = std::abs(apq);
        if (r == 0.0) continue;
        const double app = rp[p].real();
        const double aqq = rq[q].real();
        if (sweep > 3 && 1e3 * r < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          rp[q] = 0.0;
          rq[p] = 0.0;
          continue;
        }
        const Complex phase = apq / r;  // e^{i alpha}
        const double theta = (aqq - app) / (2.0 * r);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Rotation G = [[c, s], [-s e^{-i alpha}, c e^{-i alpha}]] on columns p, q;
        // rows transform with G^dagger.
        const Complex g_qp = -s * std::conj(phase);
        const Complex g_qq = c * std::conj(phase);
        const Complex h_qp = std::conj(g_qp);
        const Complex h_qq = std::conj(g_qq);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const Complex apk = rp[k];
          const Complex aqk = rq[k];
          const Complex np = c * apk + h_qp * aqk;
          const Complex nq = s * apk + h_qq * aqk;
          rp[k] = np;
          rq[k] = nq;
          a[k * n + p] = std::conj(np);
          a[k * n + q] = std::conj(nq);
        }
        rp[p] = app - t * r;
        rq[q] = aqq + t * r;
        rp[q] = 0.0;
        rq[p] = 0.0;
        Complex* vp = vt.data() + p * n;
        Complex* vq = vt.data() + q * n;
        for (std::size_t k = 0; k < n; ++k) {
          const Complex x = vp[k];
          const Complex y = vq[k];
          vp[k] = c * x + g_qp * y;
          vq[k] = s * x + g_qq * y;
        }
      }
    }
  }
  if (off_diagonal_sq(n, a) > target * 1e4)
    throw ConvergenceError("eig_hermitian: Jacobi did not converge in " +
                           std::to_string(opt.max_sweeps) + " sweeps (n=" + std::to_string(n) + ")");
}

// Sorts eigenpairs ascending and fixes the phase of each eigenvector so its
// first non-negligible component is real positive. Eigenvector k is row k
// of `vt`.
inline EigenDecomposition finish_decomposition(std::size_t n, const std::vector<double>& values,
                                               const std::vector<Complex>& vt) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = values[src];
    const Complex* v = vt.data() + src * n;
    Complex phase = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-10) {
        phase = std::conj(v[i]) / std::abs(v[i]);
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v[i] * phase;
  }
  return out;
}

inline std::vector<double> diagonal_of(std::size_t n, const std::vector<Complex>& a) {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i].real();
  return d;
}

inline void symmetrize(std::size_t n, std::vector<Complex>& a) {
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = a[i * n + i].real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex z = 0.5 * (a[i * n + j] + std::conj(a[j * n + i]));
      a[i * n + j] = z;
      a[j * n + i] = std::conj(z);
    }
  }
}

// Householder reduction to real symmetric tridiagonal form followed by
// implicit QL with Wilkinson-style shifts.
inline EigenDecomposition tridiagonal_ql(std::size_t n, std::vector<Complex> a) {
  auto A = [&](std::size_t i, std::size_t j) -> Complex& { return a[i * n + j]; };
  // qt: transpose of the accumulated unitary Q (row k = column k of Q).
  std::vector<Complex> qt(n * n);
  for (std::size_t i = 0; i < n; ++i) qt[i * n + i] = 1.0;

  std::vector<Complex> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm2 += std::norm(A(i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) continue;
    const Complex x0 = A(k + 1, k);
    const Complex ph = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0);
    const Complex alpha = -ph * xnorm;
    // v = x - alpha e_1, normalized; lives on indices k+1..n-1
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = A(i, k) - (i == k + 1 ? alpha : Complex(0.0));
      vnorm2 += std::norm(v[i]);
    }
    const double vnorm = std::sqrt(vnorm2);
    if (vnorm == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

    // trailing block update: A <- A - 2 (v w^dagger + w v^dagger), w = p - K v
    for (std::size_t i = k + 1; i < n; ++i) {
      Complex acc = 0.0;
      const Complex* row = a.data() + i * n;
      for (std::size_t j = k + 1; j < n; ++j) acc += row[j] * v[j];
      p[i] = acc;
    }
    double kk = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) kk += (std::conj(v[i]) * p[i]).real();
    for (std::size_t i = k + 1; i < n; ++i) p[i] -= kk * v[i];
    for (std::size_t i = k + 1; i < n; ++i) {
      Complex* row = a.data() + i * n;
      const Complex vi = v[i];
      const Complex wi = p[i];
      for (std::size_t j = k + 1; j < n; ++j)
        row[j] -= 2.0 * (vi * std::conj(p[j]) + wi * std::conj(v[j]));
    }
    A(k + 1, k) = alpha;
    A(k, k + 1) = std::conj(alpha);
    for (std::size_t i = k + 2; i < n; ++i) {
      A(i, k) = 0.0;
      A(k, i) = 0.0;
    }
    // Q <- Q H: (QH)(r, c) = Q(r, c) - 2 (sum_l Q(r, l) v_l) conj(v_c) for c > k.
    for (std::size_t r = 0; r < n; ++r) {
      Complex acc = 0.0;
      for (std::size_t l = k + 1; l < n; ++l) acc += qt[l * n + r] * v[l];
      if (acc == Complex(0.0)) continue;
      for (std::size_t c = k + 1; c < n; ++c) qt[c * n + r] -= 2.0 * acc * std::conj(v[c]);
    }
  }

  // Phase-normalize the subdiagonal so the tridiagonal matrix is real.
  std::vector<double> d(n), e(n, 0.0);
  std::vector<Complex> phase(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = A(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Complex sub = A(i + 1, i);
    const double mag = std::abs(sub);
    e[i] = mag;
    phase[i + 1] = mag > 0.0 ? phase[i] * sub / mag : phase[i];
  }
  // z = Q D, stored transposed
  std::vector<Complex> zt(n * n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) zt[c * n + r] = qt[c * n + r] * phase[c];

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw ConvergenceError("eig_hermitian: tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, pp = 0.0;
        bool underflow = false;
        for (std::size_t ii = m; ii-- > l;) {
          double f = s * e[ii];
          const double b = c * e[ii];
          r = std::hypot(f, g);
          e[ii + 1] = r;
          if (r == 0.0) {
            d[ii + 1] -= pp;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[ii + 1] - pp;
          r = (d[ii] - g) * s + 2.0 * c * b;
          pp = s * r;
          d[ii + 1] = g + pp;
          g = c * r - b;
          Complex* z0 = zt.data() + ii * n;
          Complex* z1 = zt.data() + (ii + 1) * n;
          for (std::size_t k = 0; k < n; ++k) {
            const Complex fz = z1[k];
            z1[k] = s * z0[k] + c * fz;
            z0[k] = c * z0[k] - s * fz;
          }
        }
        if (underflow) continue;
        d[l] -= pp;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  return finish_decomposition(n, d, zt);
}

inline bool use_jacobi(std::size_t n, const JacobiOptions& opt) {
  return opt.method == EigMethod::Jacobi || (opt.method == EigMethod::Auto && n <= kJacobiMaxDim);
}

}  // namespace detail

// A = U diag(values) U^dagger with values ascending.
inline EigenDecomposition eig_hermitian(const ComplexMatrix& a, const JacobiOptions& opt = {}) {
  if (!a.is_square()) throw DimensionError("eig_hermitian: not square (" + a.shape() + ")");
  const double res = a.hermitian_residual();
  if (res > opt.symmetry_tol * (1.0 + a.max_abs()))
    throw DomainError("eig_hermitian: input is not Hermitian (symmetry residual " +
                      std::to_string(res) + ")");
  const std::size_t n = a.rows();
  std::vector<Complex> work(a.data().begin(), a.data().end());
  detail::symmetrize(n, work);
  if (!detail::use_jacobi(n, opt)) return detail::tridiagonal_ql(n, std::move(work));
  std::vector<Complex> vt(n * n);
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
  detail::jacobi_in_place(n, work, vt, opt);
  return detail::finish_decomposition(n, detail::diagonal_of(n, work), vt);
}

inline EigenDecomposition eig_hermitian(const HermitianMatrix& a, const JacobiOptions& opt = {}) {
  return eig_hermitian(a.matrix(), opt);
}

// Same decomposition, started from a unitary `basis` that approximately
// diagonalizes `a` (e.g. the eigenbasis of a nearby matrix). Jacobi then needs
// only a sweep or two. Always uses Jacobi.
inline EigenDecomposition eig_hermitian_warm(const ComplexMatrix& a, const ComplexMatrix& basis,
                                             const JacobiOptions& opt = {}) {
  if (basis.rows() != a.rows() || basis.cols() != a.cols())
    throw DimensionError("eig_hermitian_warm: basis " + basis.shape() + " vs " + a.shape());
  const std::size_t n = a.rows();
  const ComplexMatrix rotated = basis.adjoint() * a * basis;
  std::vector<Complex> work(rotated.data().begin(), rotated.data().end());
  detail::symmetrize(n, work);
  // Rotations act on columns of the basis: vt starts as basis^T.
  const ComplexMatrix bt = basis.transpose();
  std::vector<Complex> vt(bt.data().begin(), bt.data().end());
  detail::jacobi_in_place(n, work, vt, opt);
  return detail::finish_decomposition(n, detail::diagonal_of(n, work), vt);
}

// U diag(values) U^dagger
inline ComplexMatrix reconstruct(const ComplexMatrix& u, std::span<const double> values) {
  const std::size_t n = u.rows();
  ComplexMatrix scaled(n, values.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < values.size(); ++k) scaled(i, k) = u(i, k) * values[k];
  return scaled * u.adjoint();
}

inline double min_eigenvalue(const ComplexMatrix& a) { return eig_hermitian(a).values.front(); }
inline double max_eigenvalue(const ComplexMatrix& a) { return eig_hermitian(a).values.back(); }

// Functional calculus f(A) = U f(Lambda) U^dagger. Throws DomainError when f is
// not finite at some eigenvalue.
template <typename F>
  requires std::invocable<F, double>
HermitianMatrix apply_function(const HermitianMatrix& a, F&& f) {
  const EigenDecomposition e = eig_hermitian(a);
  std::vector<double> fv(e.values.size());
  for (std::size_t k = 0; k < fv.size(); ++k) {
    fv[k] = static_cast<double>(f(e.values[k]));
    if (!std::isfinite(fv[k]))
      throw DomainError("apply_function: f is undefined at eigenvalue " + std::to_string(e.values[k]));
  }
  return HermitianMatrix::from_hermitian_part(reconstruct(e.vectors, fv));
}

// Singular values in descending order.
inline std::vector<double> singular_values(const ComplexMatrix& m) {
  if (m.empty()) return {};
  const bool wide = m.cols() > m.rows();
  const ComplexMatrix gram = wide ? m * m.adjoint() : m.adjoint() * m;
  std::vector<double> ev = eig_hermitian(gram).values;
  std::vector<double> sv(ev.size());
  for (std::size_t k = 0; k < ev.size(); ++k) sv[k] = std::sqrt(std::max(0.0, ev[ev.size() - 1 - k]));
  return sv;
}

// Largest singular value.
inline double operator_norm(const ComplexMatrix& m) {
  if (m.empty() || m.max_abs() == 0.0) return 0.0;
  // Rescale so the Gram matrix stays well inside double range.
  const double scale = m.max_abs();
  return scale * singular_values((1.0 / scale) * m).front();
}

// Frobenius-nearest positive semidefinite matrix: clamp negative eigenvalues.
inline HermitianMatrix psd_project(const HermitianMatrix& h) {
  EigenDecomposition e = eig_hermitian(h);
  for (double& v : e.values) v = std::max(v, 0.0);
  return HermitianMatrix::from_hermitian_part(reconstruct(e.vectors, e.values));
}

}  // namespace hyperrigid
