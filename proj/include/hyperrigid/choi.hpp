#pragma once

// Linear maps M_{n_in} -> M_{n_out} in Choi form.
//
// Convention (fixed everywhere): C = sum_{ij} E_ij (x) phi(E_ij), so the
// entry C[(i, a), (j, b)] at row i*n_out + a, column j*n_out + b equals
// phi(E_ij)[a, b]. Then
//   phi(X) = tr_in[(X^T (x) 1) C],   phi(1) = tr_in C,
// i.e. unitality is the partial trace over the FIRST (input) factor.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"
#include "hyperrigid/linalg.hpp"
#include "hyperrigid/matrix.hpp"

namespace hyperrigid::choi {

class ChoiMatrix {
 public:
  ChoiMatrix() = default;

  // Any Hermitian-preserving map; UCP-ness is checked by is_ucp().
  ChoiMatrix(std::size_t n_in, std::size_t n_out, ComplexMatrix c) : n_in_(n_in), n_out_(n_out), c_(std::move(c)) {
    if (n_in == 0 || n_out == 0) throw DimensionError("ChoiMatrix: dimensions must be positive");
    if (c_.rows() != n_in * n_out || c_.cols() != n_in * n_out)
      throw DimensionError("ChoiMatrix: expected " + std::to_string(n_in * n_out) + "x" +
                           std::to_string(n_in * n_out) + ", got " + c_.shape());
    const double res = c_.hermitian_residual();
    if (res > 1e-10 * (1.0 + c_.max_abs()))
      throw DomainError("ChoiMatrix: matrix is not Hermitian (residual " + std::to_string(res) + ")");
  }

  std::size_t n_in() const noexcept { return n_in_; }
  std::size_t n_out() const noexcept { return n_out_; }
  const ComplexMatrix& matrix() const noexcept { return c_; }

  // phi(E_ij)
  ComplexMatrix block(std::size_t i, std::size_t j) const {
    ComplexMatrix b(n_out_, n_out_);
    for (std::size_t a = 0; a < n_out_; ++a)
      for (std::size_t c = 0; c < n_out_; ++c) b(a, c) = c_(i * n_out_ + a, j * n_out_ + c);
    return b;
  }

 private:
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  ComplexMatrix c_;
};

// phi(X) = sum_ij X_ij phi(E_ij)
inline ComplexMatrix apply(const ChoiMatrix& phi, const ComplexMatrix& x) {
  const std::size_t ni = phi.n_in(), no = phi.n_out();
  if (x.rows() != ni || x.cols() != ni)
    throw DimensionError("choi::apply: map expects " + std::to_string(ni) + "x" + std::to_string(ni) +
                         " input, got " + x.shape());
  const ComplexMatrix& c = phi.matrix();
  ComplexMatrix out(no, no);
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t j = 0; j < ni; ++j) {
      const Complex xij = x(i, j);
      if (xij == Complex{}) continue;
      for (std::size_t a = 0; a < no; ++a) {
        const Complex* crow = c.row(i * no + a) + j * no;
        Complex* orow = out.row(a);
        for (std::size_t b = 0; b < no; ++b) orow[b] += xij * crow[b];
      }
    }
  return out;
}

// tr_in C = phi(1)
inline ComplexMatrix partial_trace_input(const ChoiMatrix& phi) {
  return apply(phi, ComplexMatrix::identity(phi.n_in()));
}

// C = sum_ij E_ij (x) E_ij: rank one, apply() is the identity map.
inline ChoiMatrix choi_of_identity(std::size_t n) {
  if (n == 0) throw DimensionError("choi_of_identity: n must be positive");
  ComplexMatrix c(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i * n + i, j * n + j) = 1.0;
  return ChoiMatrix(n, n, std::move(c));
}

// Trace-preserving conditional expectation onto the diagonal: zero every
// off-diagonal entry.
inline ChoiMatrix choi_of_pinching(std::size_t n) {
  if (n == 0) throw DimensionError("choi_of_pinching: n must be positive");
  ComplexMatrix c(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i) c(i * n + i, i * n + i) = 1.0;
  return ChoiMatrix(n, n, std::move(c));
}

// Map on diagonals followed by the pinching: X -> diag(W diag(X)), with W an
// n_out x n_in row-stochastic matrix given row-major. Row stochastic <=> unital;
// nonnegative <=> completely positive.
inline ChoiMatrix choi_of_diagonal_map(std::size_t n_out, std::size_t n_in, std::span<const double> weights) {
  if (weights.size() != n_out * n_in)
    throw DimensionError("choi_of_diagonal_map: expected " + std::to_string(n_out * n_in) + " weights");
  for (std::size_t a = 0; a < n_out; ++a) {
    double row = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) {
      const double w = weights[a * n_in + i];
      if (!(w >= 0.0)) throw DomainError("choi_of_diagonal_map: negative weight in row " + std::to_string(a));
      row += w;
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw DomainError("choi_of_diagonal_map: row " + std::to_string(a) + " sums to " + std::to_string(row));
  }
  ComplexMatrix c(n_in * n_out, n_in * n_out);
  for (std::size_t i = 0; i < n_in; ++i)
    for (std::size_t a = 0; a < n_out; ++a) c(i * n_out + a, i * n_out + a) = weights[a * n_in + i];
  return ChoiMatrix(n_in, n_out, std::move(c));
}

// Square convenience overload.
inline ChoiMatrix choi_of_diagonal_map(const std::vector<std::vector<double>>& w) {
  const std::size_t n_out = w.size();
  const std::size_t n_in = n_out ? w.front().size() : 0;
  std::vector<double> flat;
  flat.reserve(n_out * n_in);
  for (const auto& row : w) {
    if (row.size() != n_in) throw DimensionError("choi_of_diagonal_map: ragged weights");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return choi_of_diagonal_map(n_out, n_in, flat);
}

// Choi matrix of an arbitrary linear map given by its action on matrix units.
template <typename Map>
ChoiMatrix choi_of_map(std::size_t n_in, std::size_t n_out, Map&& map) {
  ComplexMatrix c(n_in * n_out, n_in * n_out);
  for (std::size_t i = 0; i < n_in; ++i)
    for (std::size_t j = 0; j < n_in; ++j) {
      const ComplexMatrix img = map(matrix_unit(n_in, i, j));
      if (img.rows() != n_out || img.cols() != n_out)
        throw DimensionError("choi_of_map: image has shape " + img.shape());
      for (std::size_t a = 0; a < n_out; ++a)
        for (std::size_t b = 0; b < n_out; ++b) c(i * n_out + a, j * n_out + b) = img(a, b);
    }
  return ChoiMatrix(n_in, n_out, std::move(c));
}

// X -> U X U^dagger
inline ChoiMatrix choi_of_unitary_conjugation(const ComplexMatrix& u) {
  const ComplexMatrix ud = u.adjoint();
  return choi_of_map(u.cols(), u.rows(), [&](const ComplexMatrix& e) { return u * e * ud; });
}

// phi o psi (psi applied first).
inline ChoiMatrix compose(const ChoiMatrix& phi, const ChoiMatrix& psi) {
  if (psi.n_out() != phi.n_in())
    throw DimensionError("choi::compose: psi maps into M_" + std::to_string(psi.n_out()) + ", phi expects M_" +
                         std::to_string(phi.n_in()));
  return choi_of_map(psi.n_in(), phi.n_out(), [&](const ComplexMatrix& e) { return apply(phi, apply(psi, e)); });
}

struct UcpDiagnostics {
  bool ok = false;
  double min_eigenvalue = 0.0;       // of C
  double unitality_residual = 0.0;   // max |tr_in C - 1| entry
  double hermitian_residual = 0.0;
};

inline constexpr double kUcpTol = 1e-10;

inline UcpDiagnostics is_ucp(const ChoiMatrix& phi, double tol = kUcpTol) {
  UcpDiagnostics d;
  d.hermitian_residual = phi.matrix().hermitian_residual();
  d.min_eigenvalue = min_eigenvalue(hermitian_part(phi.matrix()));
  d.unitality_residual = (partial_trace_input(phi) - ComplexMatrix::identity(phi.n_out())).max_abs();
  d.ok = d.min_eigenvalue >= -tol && d.unitality_residual <= tol && d.hermitian_residual <= tol;
  return d;
}

}  // namespace hyperrigid::choi
