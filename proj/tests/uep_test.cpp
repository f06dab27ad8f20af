#include <gtest/gtest.h>

#include <random>

#include "hyperrigid/uep.hpp"
#include "test_support.hpp"

using namespace hyperrigid;
using namespace hyperrigid::uep;
using hyperrigid::testing::random_complex;
using hyperrigid::testing::random_unitary;

namespace {

const ComplexMatrix kA = ComplexMatrix::diagonal({0.0, 0.5, 1.0});
const ComplexMatrix kI3 = ComplexMatrix::identity(3);

OperatorSystemM span_1_a() { return OperatorSystemM(3, {kI3, kA}); }
OperatorSystemM span_1_a_a2() { return OperatorSystemM(3, {kI3, kA, kA * kA}); }

double fix_error(const choi::ChoiMatrix& phi, const ComplexMatrix& g) {
  return operator_norm(choi::apply(phi, g) - g);
}

}  // namespace

TEST(OperatorSystem, RequiresIdentityInSpan) {
  EXPECT_THROW(OperatorSystemM(3, {kA}), DomainError);
  EXPECT_THROW(OperatorSystemM(2, {kI3}), DimensionError);
  const OperatorSystemM s(3, {kI3, ComplexMatrix{{0, 1, 0}, {0, 0, 0}, {0, 0, 0}}});
  // the adjoint comes along for free
  EXPECT_LE(s.residual(ComplexMatrix{{0, 0, 0}, {1, 0, 0}, {0, 0, 0}}), 1e-12);
  EXPECT_EQ(s.hermitian_basis().size(), 3u);
}

TEST(UepCheck, SpanOneAIsViolated) {
  const auto r = uep_check(span_1_a(), {kA * kA});
  ASSERT_EQ(r.status, UepStatus::Violated);
  EXPECT_GE(r.deviation, 0.2);
  EXPECT_NEAR(r.deviation, 0.25, 1e-6);
  ASSERT_TRUE(r.witness);
  EXPECT_TRUE(choi::is_ucp(*r.witness, 1e-8).ok);
  EXPECT_LE(fix_error(*r.witness, kI3), 1e-8);
  EXPECT_LE(fix_error(*r.witness, kA), 1e-8);
  EXPECT_NEAR(operator_norm(choi::apply(*r.witness, kA * kA) - kA * kA), r.deviation, 1e-12);
}

TEST(UepCheck, SpanOneAA2HasNoViolation) {
  const auto r = uep_check(span_1_a_a2(), {kA * kA * kA});
  EXPECT_EQ(r.status, UepStatus::NoViolationFound);
  EXPECT_LE(r.deviation, 1e-6);
  EXPECT_FALSE(r.witness);
  EXPECT_EQ(r.restarts, 16u);
  EXPECT_EQ(r.restart_log.size(), 16u);
}

TEST(UepCheck, ScalarsAreTrivial) {
  const ComplexMatrix one = ComplexMatrix::identity(1);
  const auto r = uep_check(OperatorSystemM(1, {one}), {ComplexMatrix{{Complex(2.0, 1.0)}}});
  EXPECT_EQ(r.status, UepStatus::NoViolationFound);
  EXPECT_LE(r.deviation, 1e-12);
}

TEST(UepCheck, FullAlgebraPinsEverything) {
  std::vector<ComplexMatrix> gens;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) gens.push_back(matrix_unit(2, i, j));
  std::mt19937_64 rng(3);
  const auto r = uep_check(OperatorSystemM(2, gens), {random_complex(2, 2, rng)});
  EXPECT_EQ(r.status, UepStatus::NoViolationFound);
  EXPECT_LE(r.deviation, 1e-9);
}

TEST(UepCheck, RejectsBadInput) {
  EXPECT_THROW(uep_check(span_1_a(), {ComplexMatrix::identity(2)}), DimensionError);
  UepParams p;
  p.restarts = 0;
  EXPECT_THROW(uep_check(span_1_a(), {kA * kA}, p), DomainError);
  p = {};
  p.epsilons = {0.1, -1.0};
  EXPECT_THROW(uep_check(span_1_a(), {kA * kA}, p), DomainError);
}

TEST(UepCheck, InconsistentConstraintsAreReported) {
  uep::detail::AffineSet aff;
  aff.add({1.0, 0.0}, 1.0);
  EXPECT_THROW(aff.add({2.0, 0.0}, 1.0), DomainError);
  aff.add({2.0, 0.0}, 2.0);  // dependent but consistent
  EXPECT_EQ(aff.rank(), 1u);
}

TEST(UepCheck, DeterministicForFixedSeed) {
  UepParams p;
  p.restarts = 5;
  p.seed = 42;
  const auto a = uep_check(span_1_a(), {kA * kA}, p);
  const auto b = uep_check(span_1_a(), {kA * kA}, p);
  p.threads = 1;
  const auto c = uep_check(span_1_a(), {kA * kA}, p);
  for (const auto* r : {&b, &c}) {
    EXPECT_EQ(a.deviation, r->deviation);
    EXPECT_EQ(a.best_restart, r->best_restart);
    EXPECT_EQ(a.iterations, r->iterations);
    EXPECT_EQ(a.best_map.matrix(), r->best_map.matrix());
    for (std::size_t k = 0; k < a.restart_log.size(); ++k)
      EXPECT_EQ(a.restart_log[k].affine_distance, r->restart_log[k].affine_distance);
  }
  p.seed = 43;
  const auto d = uep_check(span_1_a(), {kA * kA}, p);
  EXPECT_NE(a.restart_log[0].affine_distance, d.restart_log[0].affine_distance);
}

TEST(UepCheck, DykstraDistanceNeverIncreases) {
  for (const auto& s : {span_1_a(), span_1_a_a2()}) {
    const auto r = uep_check(s, {kA * kA});
    for (const auto& d : r.restart_log) {
      ASSERT_FALSE(d.affine_distance.empty());
      for (std::size_t i = 1; i < d.affine_distance.size(); ++i)
        EXPECT_LE(d.affine_distance[i], d.affine_distance[i - 1] * (1.0 + 1e-12) + 1e-15);
    }
  }
}

TEST(UepCheck, FixedA2PutsAInTheMultiplicativeDomain) {
  const auto r = uep_check(span_1_a_a2(), {kA * kA * kA});
  const auto& phi = r.best_map;
  ASSERT_LE(fix_error(phi, kA), 1e-8);
  ASSERT_LE(fix_error(phi, kA * kA), 1e-8);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix x = random_complex(3, 3, rng);
    EXPECT_LE(operator_norm(choi::apply(phi, kA * x) - kA * choi::apply(phi, x)), 1e-6);
    EXPECT_LE(operator_norm(choi::apply(phi, x * kA) - choi::apply(phi, x) * kA), 1e-6);
  }
}

TEST(UepCheck, UnitaryGeneratorsHaveNoViolation) {
  std::mt19937_64 rng(11);
  for (int draw = 0; draw < 3; ++draw) {
    const ComplexMatrix u1 = random_unitary(3, rng), u2 = random_unitary(3, rng);
    const OperatorSystemM s(3, {kI3, u1, u1.adjoint(), u2, u2.adjoint()});
    const auto r = uep_check(s, {u1 * u2, u1 * u1});
    EXPECT_EQ(r.status, UepStatus::NoViolationFound);
    EXPECT_LE(r.deviation, 1e-6);
  }
}

TEST(ConvexSplitWitness, HalfwayPoint) {
  const auto phi = convex_split_witness(HermitianMatrix::diagonal({0.0, 0.5, 1.0}));
  ASSERT_TRUE(choi::is_ucp(phi).ok);
  EXPECT_LE(fix_error(phi, kI3), 1e-14);
  EXPECT_LE(fix_error(phi, kA), 1e-14);
  const ComplexMatrix moved = choi::apply(phi, kA * kA);
  EXPECT_NEAR(moved(1, 1).real(), 0.5, 1e-14);
  EXPECT_NEAR(operator_norm(moved - kA * kA), 0.25, 1e-14);
}

TEST(ConvexSplitWitness, ThirdPoint) {
  const ComplexMatrix a = ComplexMatrix::diagonal({0.0, 1.0 / 3.0, 1.0});
  const auto phi = convex_split_witness(HermitianMatrix::diagonal({0.0, 1.0 / 3.0, 1.0}));
  // t = 2/3 on the eigenvalue 0
  EXPECT_NEAR(choi::apply(phi, matrix_unit(3, 0, 0))(1, 1).real(), 2.0 / 3.0, 1e-14);
  EXPECT_LE(fix_error(phi, a), 1e-14);
  EXPECT_NEAR(operator_norm(choi::apply(phi, a * a) - a * a), 2.0 / 9.0, 1e-14);
}

TEST(ConvexSplitWitness, NeedsThreeSpectrumPoints) {
  EXPECT_THROW(convex_split_witness(HermitianMatrix::diagonal({0.0, 1.0})), PreconditionError);
  EXPECT_THROW(convex_split_witness(HermitianMatrix::diagonal({0.0, 1.0, 1.0, 0.0})), PreconditionError);
  EXPECT_THROW(convex_split_witness(HermitianMatrix(ComplexMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 2}})), DomainError);
}

TEST(DirectSumCheck, TwoUepSummands) {
  const auto s = span_1_a_a2();
  const auto r = uep_check(s, {kA * kA * kA});
  const auto sum = direct_sum_check(s, r, s, r);
  EXPECT_EQ(sum.status, UepStatus::NoViolationFound);
  EXPECT_LE(sum.deviation, 1e-6);
  EXPECT_EQ(sum.best_map.n_in(), 6u);
}

TEST(DirectSumCheck, Scalars) {
  const OperatorSystemM s(1, {ComplexMatrix::identity(1)});
  const auto r = uep_check(s, {ComplexMatrix::identity(1)});
  const auto sum = direct_sum_check(s, r, s, r);
  EXPECT_EQ(sum.status, UepStatus::NoViolationFound);
  EXPECT_LE(sum.deviation, 1e-12);
}

TEST(DirectSumCheck, ViolatedSummandIsRejected) {
  const auto bad = uep_check(span_1_a(), {kA * kA});
  const auto good = uep_check(span_1_a_a2(), {kA * kA * kA});
  EXPECT_THROW(direct_sum_check(span_1_a(), bad, span_1_a_a2(), good), PreconditionError);
  const OperatorSystemM one(1, {ComplexMatrix::identity(1)});
  const auto r1 = uep_check(one, {ComplexMatrix::identity(1)});
  EXPECT_THROW(direct_sum_check(span_1_a_a2(), good, one, r1), DimensionError);
}
