#pragma once

// Korovkin harnesses: Bernstein operators on C[0,1] and a matrix family of
// pinchings on M_d, with error tables over a list of parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hyperrigid/errors.hpp"
#include "hyperrigid/linalg.hpp"
#include "hyperrigid/matrix.hpp"

namespace hyperrigid::korovkin {

using RealFunction = std::function<double(double)>;

struct NamedFunction {
  std::string name;
  RealFunction f;
};

struct SampledFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

inline std::vector<double> uniform_grid(std::size_t m) {
  if (m < 2) throw DomainError("uniform_grid: need at least 2 points, got " + std::to_string(m));
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = static_cast<double>(i) / static_cast<double>(m - 1);
  g.back() = 1.0;
  return g;
}

inline SampledFunction sample(const RealFunction& f, std::size_t m) {
  SampledFunction s{uniform_grid(m), {}};
  s.values.reserve(m);
  for (double x : s.grid) {
    const double y = f(x);
    if (!std::isfinite(y)) throw DomainError("sample: function is not finite at x = " + std::to_string(x));
    s.values.push_back(y);
  }
  return s;
}

inline double sup_distance(const SampledFunction& a, const SampledFunction& b) {
  if (a.values.size() != b.values.size()) throw DimensionError("sup_distance: grid sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

inline constexpr std::size_t kLogSpaceAbove = 500;

namespace detail {

// binom(n,k) x^k (1-x)^(n-k), k = 0..n
inline void bernstein_weights(std::size_t n, double x, std::vector<double>& w) {
  w.assign(n + 1, 0.0);
  if (x <= 0.0) {
    w[0] = 1.0;
    return;
  }
  if (x >= 1.0) {
    w[n] = 1.0;
    return;
  }
  if (n > kLogSpaceAbove) {
    // Mode weight from log-binomials, the rest by ratios walking outward, then
    // renormalize: lgamma's rounding near 1e-12 would otherwise show up in B_n 1.
    const std::size_t mode = std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n + 1) * x)));
    const double km = static_cast<double>(mode), rest = static_cast<double>(n - mode);
    const double nn = static_cast<double>(n);
    w[mode] = std::exp(std::lgamma(nn + 1.0) - std::lgamma(km + 1.0) - std::lgamma(rest + 1.0) + km * std::log(x) +
                       rest * std::log1p(-x));
    const double r = x / (1.0 - x);
    for (std::size_t k = mode; k < n; ++k)
      w[k + 1] = w[k] * r * static_cast<double>(n - k) / static_cast<double>(k + 1);
    for (std::size_t k = mode; k > 0; --k) w[k - 1] = w[k] / r * static_cast<double>(k) / static_cast<double>(n - k + 1);
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return;
  }
  // Recurrence from the heavier end; (1/2)^500 is still a normal double.
  const bool low = x <= 0.5;
  const double r = low ? x / (1.0 - x) : (1.0 - x) / x;
  double v = std::pow(low ? 1.0 - x : x, static_cast<double>(n));
  for (std::size_t j = 0; j <= n; ++j) {
    w[low ? j : n - j] = v;
    v *= r * static_cast<double>(n - j) / static_cast<double>(j + 1);
  }
}

}  // namespace detail

// (B_n f)(x) = sum_k f(k/n) binom(n,k) x^k (1-x)^(n-k) on an m-point grid.
inline SampledFunction bernstein(std::size_t n, const RealFunction& f, std::size_t m = 1001) {
  if (n < 1) throw PreconditionError("bernstein: need n >= 1");
  std::vector<double> nodes(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    nodes[k] = f(static_cast<double>(k) / static_cast<double>(n));
    if (!std::isfinite(nodes[k])) throw DomainError("bernstein: f is not finite at k/n, k = " + std::to_string(k));
  }
  SampledFunction out{uniform_grid(m), std::vector<double>(m)};
  std::vector<double> w;
  for (std::size_t i = 0; i < m; ++i) {
    detail::bernstein_weights(n, out.grid[i], w);
    double s = 0.0;
    for (std::size_t k = 0; k <= n; ++k) s += w[k] * nodes[k];
    out.values[i] = s;
  }
  return out;
}

inline std::vector<NamedFunction> korovkin_tests() {
  return {{"1", [](double) { return 1.0; }}, {"x", [](double x) { return x; }}, {"x^2", [](double x) { return x * x; }}};
}

inline std::vector<NamedFunction> default_probes() {
  return {{"sin(pi*x)", [](double x) { return std::sin(std::numbers::pi * x); }},
          {"abs(2*x-1)", [](double x) { return std::abs(2.0 * x - 1.0); }},
          {"x^3", [](double x) { return x * x * x; }},
          {"exp(x)", [](double x) { return std::exp(x); }}};
}

// ---- matrix family --------------------------------------------------------

// Sizes of b contiguous blocks of a d-point grid, as even as possible.
inline std::vector<std::size_t> block_sizes(std::size_t d, std::size_t b) {
  if (b == 0 || b > d)
    throw DomainError("block_sizes: " + std::to_string(b) + " blocks cannot partition " + std::to_string(d) + " points");
  std::vector<std::size_t> s(b, d / b);
  for (std::size_t j = 0; j < d % b; ++j) ++s[j];
  return s;
}

// Keep the b diagonal blocks of y, zero the rest.
inline ComplexMatrix pinch(const ComplexMatrix& y, std::size_t b) {
  if (!y.is_square()) throw DimensionError("pinch: not square (" + y.shape() + ")");
  ComplexMatrix out(y.rows(), y.cols());
  std::size_t start = 0;
  for (std::size_t sz : block_sizes(y.rows(), b)) {
    for (std::size_t i = start; i < start + sz; ++i)
      for (std::size_t j = start; j < start + sz; ++j) out(i, j) = y(i, j);
    start += sz;
  }
  return out;
}

// exp(i t H) for Hermitian H
inline ComplexMatrix unitary_exp(const HermitianMatrix& h, double t) {
  const EigenDecomposition e = eig_hermitian(h);
  const std::size_t n = h.dim();
  ComplexMatrix scaled(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) scaled(i, k) = e.vectors(i, k) * std::polar(1.0, t * e.values[k]);
  return scaled * e.vectors.adjoint();
}

// Seeded Hermitian of operator norm 1.
inline HermitianMatrix unit_hermitian(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(d, d);
  for (auto& z : m.data()) z = Complex(g(rng), g(rng));
  ComplexMatrix h = hermitian_part(m);
  const double nrm = operator_norm(h);
  return HermitianMatrix::from_hermitian_part((1.0 / nrm) * h);
}

// phi_b(Y) = pinch_b(U_b Y U_b^dagger), U_b = exp(i H / b). Unital and CP; the
// rotation dies off as b grows, but the outputs do not commute with diag X.
class PinchingFamily {
 public:
  PinchingFamily(std::size_t d, std::uint64_t seed, bool conjugate)
      : d_(d), conjugate_(conjugate), h_(conjugate ? unit_hermitian(d, seed) : HermitianMatrix()) {}

  ComplexMatrix apply(std::size_t b, const ComplexMatrix& y) const {
    if (y.rows() != d_ || y.cols() != d_) throw DimensionError("PinchingFamily: input is " + y.shape());
    if (!conjugate_) return pinch(y, b);
    const ComplexMatrix u = unitary_exp(h_, 1.0 / static_cast<double>(b));
    return pinch(u * y * u.adjoint(), b);
  }

  std::size_t dim() const noexcept { return d_; }
  bool conjugated() const noexcept { return conjugate_; }

 private:
  std::size_t d_;
  bool conjugate_;
  HermitianMatrix h_;
};

inline ComplexMatrix diag_of(const RealFunction& f, std::size_t d) {
  const std::vector<double> g = uniform_grid(d);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = f(g[i]);
  return ComplexMatrix::diagonal(v);
}

struct PinchingRow {
  std::size_t blocks = 0;
  double err_x = 0.0, err_x2 = 0.0, err_probe = 0.0;                 // pinching alone
  double conj_err_x = 0.0, conj_err_x2 = 0.0, conj_err_probe = 0.0;  // rotated then pinched
};

struct PinchingTable {
  std::size_t d = 0;
  std::uint64_t seed = 0;
  std::string probe;
  std::vector<PinchingRow> rows;
};

inline PinchingTable matrix_pinching_family(std::size_t d, const std::vector<std::size_t>& blocks_list,
                                            const NamedFunction& probe, std::uint64_t seed = 0) {
  if (d < 2) throw DomainError("matrix_pinching_family: need d >= 2");
  if (blocks_list.empty()) throw DomainError("matrix_pinching_family: empty block list");
  for (std::size_t i = 0; i < blocks_list.size(); ++i) {
    block_sizes(d, blocks_list[i]);
    if (i > 0 && blocks_list[i] <= blocks_list[i - 1])
      throw DomainError("matrix_pinching_family: block counts must increase");
  }
  const ComplexMatrix x = diag_of([](double t) { return t; }, d);
  const ComplexMatrix x2 = x * x;
  const ComplexMatrix fx = diag_of(probe.f, d);
  const PinchingFamily plain(d, seed, false), rotated(d, seed, true);
  PinchingTable t{d, seed, probe.name, {}};
  for (std::size_t b : blocks_list) {
    PinchingRow r;
    r.blocks = b;
    r.err_x = operator_norm(plain.apply(b, x) - x);
    r.err_x2 = operator_norm(plain.apply(b, x2) - x2);
    r.err_probe = operator_norm(plain.apply(b, fx) - fx);
    r.conj_err_x = operator_norm(rotated.apply(b, x) - x);
    r.conj_err_x2 = operator_norm(rotated.apply(b, x2) - x2);
    r.conj_err_probe = operator_norm(rotated.apply(b, fx) - fx);
    t.rows.push_back(r);
  }
  return t;
}

// ---- tables ---------------------------------------------------------------

enum class MapFamily { Bernstein, MatrixPinching };

inline const char* to_string(MapFamily f) { return f == MapFamily::Bernstein ? "bernstein" : "matrix_pinching"; }

struct KorovkinOptions {
  std::size_t grid = 1001;   // Bernstein evaluation grid
  std::size_t dim = 64;      // matrix size for the pinching family
  std::uint64_t seed = 0;
  double noise_floor = 1e-12;  // errors below this are not checked for monotonicity
};

struct KorovkinColumn {
  std::string name;
  bool is_test = false;
  std::vector<double> errors;               // one per n
  std::vector<std::size_t> monotone_breaks;  // i with errors[i] >= errors[i-1]
};

struct KorovkinTable {
  MapFamily family = MapFamily::Bernstein;
  std::vector<std::size_t> n_list;
  std::vector<KorovkinColumn> columns;
  std::vector<double> max_test_error;  // per n
  bool co_decrease = true;  // probes go down whenever the worst test error goes down
};

inline KorovkinTable korovkin_table(MapFamily family, const std::vector<NamedFunction>& tests,
                                    const std::vector<NamedFunction>& probes, const std::vector<std::size_t>& n_list,
                                    const KorovkinOptions& opt = {}) {
  if (n_list.empty()) throw DomainError("korovkin_table: empty n list");
  KorovkinTable t;
  t.family = family;
  t.n_list = n_list;
  for (const auto& f : tests) t.columns.push_back({f.name, true, {}, {}});
  for (const auto& f : probes) t.columns.push_back({f.name, false, {}, {}});
  std::vector<const NamedFunction*> all;
  for (const auto& f : tests) all.push_back(&f);
  for (const auto& f : probes) all.push_back(&f);

  if (family == MapFamily::Bernstein) {
    std::vector<SampledFunction> exact;
    for (const auto* f : all) exact.push_back(sample(f->f, opt.grid));
    for (std::size_t n : n_list)
      for (std::size_t c = 0; c < all.size(); ++c)
        t.columns[c].errors.push_back(sup_distance(bernstein(n, all[c]->f, opt.grid), exact[c]));
  } else {
    const PinchingFamily phi(opt.dim, opt.seed, true);
    std::vector<ComplexMatrix> exact;
    for (const auto* f : all) exact.push_back(diag_of(f->f, opt.dim));
    for (std::size_t b : n_list)
      for (std::size_t c = 0; c < all.size(); ++c)
        t.columns[c].errors.push_back(operator_norm(phi.apply(b, exact[c]) - exact[c]));
  }

  for (auto& col : t.columns)
    for (std::size_t i = 1; i < col.errors.size(); ++i)
      if (col.errors[i] >= col.errors[i - 1] && col.errors[i] > opt.noise_floor) col.monotone_breaks.push_back(i);
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    double m = 0.0;
    for (const auto& col : t.columns)
      if (col.is_test) m = std::max(m, col.errors[i]);
    t.max_test_error.push_back(m);
  }
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (t.max_test_error[i] >= t.max_test_error[i - 1]) continue;
    for (const auto& col : t.columns)
      if (!col.is_test && col.errors[i] > col.errors[i - 1] && col.errors[i] > opt.noise_floor) t.co_decrease = false;
  }
  return t;
}

}  // namespace hyperrigid::korovkin
