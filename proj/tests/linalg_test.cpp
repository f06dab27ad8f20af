#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hyperrigid/linalg.hpp"
#include "test_support.hpp"

using namespace hyperrigid;
using hyperrigid::testing::max_entry_diff;
using hyperrigid::testing::random_complex;
using hyperrigid::testing::random_hermitian;
using hyperrigid::testing::random_psd;

namespace {

ComplexMatrix midpoint_volterra(std::size_t n) {
  ComplexMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) v(i, j) = 1.0 / n;
    v(i, i) = 0.5 / n;
  }
  return v;
}

}  // namespace

TEST(EigHermitian, DiagonalInputGivesPermutationVectors) {
  const auto e = eig_hermitian(HermitianMatrix::diagonal({3.0, 1.0, 2.0}));
  ASSERT_EQ(e.values.size(), 3u);
  EXPECT_NEAR(e.values[0], 1.0, 1e-15);
  EXPECT_NEAR(e.values[1], 2.0, 1e-15);
  EXPECT_NEAR(e.values[2], 3.0, 1e-15);
  // eigenvalue 1 lives on e_1, 2 on e_2, 3 on e_0
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(2, 1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(0, 2)), 1.0, 1e-15);
}

TEST(EigHermitian, Identity) {
  const auto e = eig_hermitian(HermitianMatrix::identity(4));
  for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(EigHermitian, RejectsNonHermitian) {
  ComplexMatrix m{{1.0, 2.0}, {0.0, 1.0}};
  EXPECT_THROW(eig_hermitian(m), DomainError);
  EXPECT_THROW(HermitianMatrix{m}, DomainError);
}

TEST(EigHermitian, PhaseConventionMakesFirstComponentRealPositive) {
  std::mt19937_64 rng(11);
  const auto e = eig_hermitian(random_hermitian(6, rng));
  for (std::size_t k = 0; k < 6; ++k) {
    for (std::size_t i = 0; i < 6; ++i) {
      const Complex z = e.vectors(i, k);
      if (std::abs(z) > 1e-10) {
        EXPECT_NEAR(z.imag(), 0.0, 1e-14);
        EXPECT_GT(z.real(), 0.0);
        break;
      }
    }
  }
}

TEST(EigHermitian, ReconstructionRoundTripUpToDim64) {
  std::mt19937_64 rng(2024);
  for (std::size_t n : {1u, 2u, 5u, 16u, 33u, 64u}) {
    const HermitianMatrix a = random_hermitian(n, rng);
    const auto e = eig_hermitian(a);
    const ComplexMatrix back = reconstruct(e.vectors, e.values);
    EXPECT_LE((a.matrix() - back).frobenius_norm(), 1e-10 * n * a.matrix().frobenius_norm()) << n;
    const ComplexMatrix gram = e.vectors.adjoint() * e.vectors;
    EXPECT_LE(max_entry_diff(gram, ComplexMatrix::identity(n)), 1e-10) << n;
    EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
  }
}

TEST(EigHermitian, WarmStartAgreesWithColdStart) {
  std::mt19937_64 rng(5);
  const HermitianMatrix a = random_hermitian(12, rng);
  const auto cold = eig_hermitian(a);
  const HermitianMatrix nearby = a + 1e-3 * random_hermitian(12, rng);
  const auto warm = eig_hermitian_warm(nearby, cold.vectors);
  const auto ref = eig_hermitian(nearby);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(warm.values[k], ref.values[k], 1e-12);
  EXPECT_LE(max_entry_diff(reconstruct(warm.vectors, warm.values), nearby), 1e-12);
}

TEST(ApplyFunction, SquareOfDiagonal) {
  const auto r = apply_function(HermitianMatrix::diagonal({0.0, 0.5, 1.0}), [](double x) { return x * x; });
  EXPECT_LE(max_entry_diff(r, ComplexMatrix::diagonal({0.0, 0.25, 1.0})), 1e-15);
}

TEST(ApplyFunction, IdentityFunctionReturnsInput) {
  std::mt19937_64 rng(3);
  const HermitianMatrix a = random_hermitian(7, rng);
  EXPECT_LE(max_entry_diff(apply_function(a, [](double x) { return x; }), a), 1e-12);
}

TEST(ApplyFunction, AbsoluteValueShiftOnDiagonal) {
  const auto r = apply_function(HermitianMatrix::diagonal({0.25, 0.0, 0.5}),
                                [](double x) { return std::abs(x - 0.5); });
  EXPECT_LE(max_entry_diff(r, ComplexMatrix::diagonal({0.25, 0.5, 0.0})), 1e-15);
}

TEST(ApplyFunction, DomainErrorWhenUndefinedAtEigenvalue) {
  EXPECT_THROW(apply_function(HermitianMatrix::diagonal({-1.0, 1.0}), [](double x) { return std::sqrt(x); }),
               DomainError);
}

TEST(ApplyFunction, CommutesAndMatchesHornerForPolynomials) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianMatrix a = random_hermitian(6, rng);
    // p(x) = 2 - x + 0.5 x^3
    const auto p = [](double x) { return 2.0 - x + 0.5 * x * x * x; };
    const ComplexMatrix pa = apply_function(a, p);
    const ComplexMatrix id = ComplexMatrix::identity(6);
    const ComplexMatrix horner = 2.0 * id + a.matrix() * (-1.0 * id + a.matrix() * (0.5 * a.matrix()));
    const double scale = 1.0 + horner.max_abs();
    EXPECT_LE(max_entry_diff(pa, horner), 1e-10 * scale);
    EXPECT_LE(max_entry_diff(pa * a.matrix(), a.matrix() * pa), 1e-10 * scale);
  }
}

TEST(ApplyFunction, HomomorphismOnPolynomialProducts) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianMatrix a = random_hermitian(5, rng);
    const auto f = [](double x) { return 1.0 + x * x; };
    const auto g = [](double x) { return x - 3.0 * x * x * x; };
    const ComplexMatrix fg = apply_function(a, [&](double x) { return f(x) * g(x); });
    const ComplexMatrix prod = apply_function(a, f).matrix() * apply_function(a, g).matrix();
    EXPECT_LE(max_entry_diff(fg, prod), 1e-9 * (1.0 + prod.max_abs()));
  }
}

TEST(OperatorNorm, ZeroAndUnitary) {
  EXPECT_EQ(operator_norm(ComplexMatrix::zeros(3, 3)), 0.0);
  const double c = std::cos(0.3), s = std::sin(0.3);
  ComplexMatrix u{{c, Complex(0, s)}, {Complex(0, s), c}};
  EXPECT_NEAR(operator_norm(u), 1.0, 1e-14);
}

TEST(OperatorNorm, AdjointInvarianceAndSubmultiplicativity) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_complex(5, 7, rng);
    const ComplexMatrix b = random_complex(7, 4, rng);
    EXPECT_NEAR(operator_norm(a), operator_norm(a.adjoint()), 1e-10 * operator_norm(a));
    EXPECT_LE(operator_norm(a * b), operator_norm(a) * operator_norm(b) * (1 + 1e-12));
  }
}

TEST(OperatorNorm, DiscretizedVolterraApproachesTwoOverPi) {
  // Singular values of the integration operator are 2/((2k+1) pi); the top
  // one is 2/pi. The midpoint matrix at n=512 sits at 0.6366.
  const double norm512 = operator_norm(midpoint_volterra(512));
  EXPECT_NEAR(norm512, 0.6366, 5e-5);
  EXPECT_NEAR(norm512, 2.0 / std::numbers::pi, 1e-4);
}

TEST(PsdProject, ClampsDiagonal) {
  const auto p = psd_project(HermitianMatrix::diagonal({-1.0, 2.0}));
  EXPECT_LE(max_entry_diff(p, ComplexMatrix::diagonal({0.0, 2.0})), 1e-15);
}

TEST(PsdProject, FlipMatrix) {
  const auto p = psd_project(HermitianMatrix(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}));
  EXPECT_LE(max_entry_diff(p, ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}), 1e-14);
}

TEST(PsdProject, FixesPsdInputAndIsIdempotent) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianMatrix p = random_psd(6, rng);
    EXPECT_LE(max_entry_diff(psd_project(p), p), 1e-10 * (1.0 + p.matrix().max_abs()));
    const HermitianMatrix h = random_hermitian(6, rng);
    const HermitianMatrix once = psd_project(h);
    const HermitianMatrix twice = psd_project(once);
    EXPECT_LE(max_entry_diff(once, twice), 1e-12 * (1.0 + once.matrix().max_abs()));
    EXPECT_GE(min_eigenvalue(once), -1e-12);
  }
}

TEST(EigHermitian, JacobiAndTridiagonalAgree) {
  std::mt19937_64 rng(404);
  for (std::size_t n : {2u, 3u, 17u, 40u, 130u}) {
    const HermitianMatrix a = random_hermitian(n, rng);
    JacobiOptions jac;
    jac.method = EigMethod::Jacobi;
    JacobiOptions tri;
    tri.method = EigMethod::Tridiagonal;
    const auto ej = eig_hermitian(a, jac);
    const auto et = eig_hermitian(a, tri);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(ej.values[k], et.values[k], 1e-11 * n) << n;
    const double scale = a.matrix().frobenius_norm();
    EXPECT_LE((reconstruct(et.vectors, et.values) - a.matrix()).frobenius_norm(), 1e-10 * n * scale);
    EXPECT_LE(max_entry_diff(et.vectors.adjoint() * et.vectors, ComplexMatrix::identity(n)), 1e-10);
  }
}

TEST(EigHermitian, TridiagonalHandlesDegenerateAndDiagonalInput) {
  JacobiOptions tri;
  tri.method = EigMethod::Tridiagonal;
  const auto e = eig_hermitian(HermitianMatrix::diagonal({2.0, -1.0, 2.0, 0.0}), tri);
  EXPECT_NEAR(e.values[0], -1.0, 1e-15);
  EXPECT_NEAR(e.values[3], 2.0, 1e-15);
  const auto z = eig_hermitian(ComplexMatrix::zeros(5, 5), tri);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
}
