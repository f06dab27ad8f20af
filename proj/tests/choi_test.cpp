#include <gtest/gtest.h>

#include <random>

#include "hyperrigid/choi.hpp"
#include "test_support.hpp"

using namespace hyperrigid;
using namespace hyperrigid::choi;
using hyperrigid::testing::max_entry_diff;
using hyperrigid::testing::random_complex;
using hyperrigid::testing::random_hermitian;
using hyperrigid::testing::random_psd;
using hyperrigid::testing::random_unitary;

namespace {

std::vector<ChoiMatrix> channel_zoo(std::mt19937_64& rng) {
  std::vector<ChoiMatrix> zoo{choi_of_identity(3), choi_of_pinching(3),
                              choi_of_diagonal_map({{0.0, 0.5, 0.5}, {0.0, 1.0, 0.0}, {0.2, 0.3, 0.5}}),
                              choi_of_unitary_conjugation(random_unitary(3, rng))};
  zoo.push_back(compose(zoo[3], zoo[1]));
  zoo.push_back(compose(zoo[2], zoo[3]));
  return zoo;
}

}  // namespace

TEST(Apply, IdentityChannel) {
  const ComplexMatrix flip{{0.0, 1.0}, {1.0, 0.0}};
  EXPECT_EQ(apply(choi_of_identity(2), flip), flip);
  std::mt19937_64 rng(1);
  const ComplexMatrix x = random_complex(4, 4, rng);
  EXPECT_LE(max_entry_diff(apply(choi_of_identity(4), x), x), 1e-15);
}

TEST(Apply, PinchingKillsOffDiagonals) {
  EXPECT_EQ(apply(choi_of_pinching(2), ComplexMatrix{{1.0, 1.0}, {1.0, 1.0}}), ComplexMatrix::identity(2));
}

TEST(Apply, DiagonalMapOfAbsoluteValueWitness) {
  // x0 = 1/4 replaced by the midpoint of 0 and 1/2
  const auto phi = choi_of_diagonal_map({{0.0, 0.5, 0.5}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
  const ComplexMatrix out = apply(phi, ComplexMatrix::diagonal({1.0 / 16, 0.0, 0.25}));
  EXPECT_LE(max_entry_diff(out, ComplexMatrix::diagonal({0.125, 0.0, 0.25})), 1e-16);
}

TEST(Apply, DimensionMismatch) {
  EXPECT_THROW(apply(choi_of_identity(2), ComplexMatrix::identity(3)), DimensionError);
  EXPECT_THROW(compose(choi_of_identity(2), choi_of_identity(3)), DimensionError);
  EXPECT_THROW(ChoiMatrix(2, 2, ComplexMatrix::identity(3)), DimensionError);
}

TEST(Apply, TransposeConventionOnMatrixUnits) {
  // phi(E_ij) must be the (i, j) block, not the (j, i) block.
  const auto phi = choi_of_map(2, 3, [](const ComplexMatrix& e) {
    ComplexMatrix out(3, 3);
    out(0, 1) = e(0, 1);
    out(1, 0) = e(1, 0);
    out(2, 2) = e(0, 0) + e(1, 1);
    return out;
  });
  const ComplexMatrix img = apply(phi, matrix_unit(2, 0, 1));
  EXPECT_EQ(img(0, 1), Complex(1.0));
  EXPECT_EQ(img(1, 0), Complex(0.0));
  EXPECT_EQ(phi.matrix()(0 * 3 + 0, 1 * 3 + 1), Complex(1.0));
}

TEST(DiagonalMap, RejectsInvalidWeights) {
  EXPECT_THROW(choi_of_diagonal_map({{1.5, -0.5}, {0.0, 1.0}}), DomainError);
  EXPECT_THROW(choi_of_diagonal_map({{0.5, 0.4}, {0.0, 1.0}}), DomainError);
  EXPECT_THROW(choi_of_diagonal_map({{0.5, 0.5}, {1.0}}), DimensionError);
}

TEST(IsUcp, Examples) {
  EXPECT_TRUE(is_ucp(choi_of_identity(3)).ok);
  ComplexMatrix c = choi_of_pinching(2).matrix();
  c(1, 1) = -0.1;
  const auto d = is_ucp(ChoiMatrix(2, 2, c));
  EXPECT_FALSE(d.ok);
  EXPECT_NEAR(d.min_eigenvalue, -0.1, 1e-12);
}

TEST(IsUcp, NegativeEigenvalueWithUnitalityIntact) {
  ComplexMatrix c = choi_of_identity(2).matrix();
  c(1, 2) = 0.3;
  c(2, 1) = 0.3;
  const auto d = is_ucp(ChoiMatrix(2, 2, c));
  EXPECT_LE(d.unitality_residual, 1e-15);
  EXPECT_LT(d.min_eigenvalue, -0.1);
  EXPECT_FALSE(d.ok);
}

TEST(Compose, PinchingIsIdempotent) {
  EXPECT_EQ(compose(choi_of_pinching(3), choi_of_pinching(3)).matrix(), choi_of_pinching(3).matrix());
}

TEST(Compose, CoherentWithApplyOnMatrixUnits) {
  std::mt19937_64 rng(2);
  const auto zoo = channel_zoo(rng);
  for (const auto& phi : zoo)
    for (const auto& psi : zoo) {
      const auto both = compose(phi, psi);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          const ComplexMatrix e = matrix_unit(3, i, j);
          EXPECT_LE(max_entry_diff(apply(both, e), apply(phi, apply(psi, e))), 1e-9);
        }
    }
}

TEST(ChannelProperties, PositivityUnitalityAndSchwarz) {
  std::mt19937_64 rng(3);
  for (const auto& phi : channel_zoo(rng)) {
    ASSERT_TRUE(is_ucp(phi).ok);
    EXPECT_LE(max_entry_diff(apply(phi, ComplexMatrix::identity(3)), ComplexMatrix::identity(3)), 1e-10);
    for (int trial = 0; trial < 10; ++trial) {
      const HermitianMatrix p = random_psd(3, rng);
      EXPECT_GE(min_eigenvalue(hermitian_part(apply(phi, p))), -1e-9);
      const HermitianMatrix x = random_hermitian(3, rng);
      const ComplexMatrix px = apply(phi, x);
      const ComplexMatrix gap = apply(phi, x.matrix() * x.matrix()) - px * px;
      EXPECT_GE(min_eigenvalue(hermitian_part(gap)), -1e-9);
    }
  }
}

TEST(ChannelProperties, HermitianInHermitianOut) {
  std::mt19937_64 rng(4);
  for (const auto& phi : channel_zoo(rng)) {
    const HermitianMatrix x = random_hermitian(3, rng);
    EXPECT_LE(apply(phi, x).hermitian_residual(), 1e-12);
  }
}
