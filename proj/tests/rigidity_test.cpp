#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperrigid/expr.hpp"
#include "hyperrigid/rigidity.hpp"

using namespace hyperrigid;

namespace {

FunctionSystem fs_of(const char* text, double a, double b, std::size_t m = 101) {
  return FunctionSystem(a, b, expr::parse(text), m);
}

// Independent check through the choi module only.
void verify_report(const CounterexampleReport& r, const FunctionSystem::Function& f) {
  ASSERT_TRUE(choi::is_ucp(r.phi).ok);
  const ComplexMatrix& a = r.A.matrix();
  EXPECT_LE(a.rows(), 7u);
  ComplexMatrix fa(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) fa(i, i) = f(a(i, i).real());
  EXPECT_LE(operator_norm(choi::apply(r.phi, a) - a), 1e-10);
  EXPECT_LE(operator_norm(choi::apply(r.phi, fa) - fa), 1e-10);
  const ComplexMatrix pa = choi::apply(r.phi, a);
  EXPECT_GT(operator_norm(choi::apply(r.phi, a * a) - pa * pa), 1e-6);
}

}  // namespace

TEST(FindNonextremePoint, AbsoluteValue) {
  const auto w = find_nonextreme_point(fs_of("abs(x-1/2)", 0, 1));
  ASSERT_TRUE(w);
  EXPECT_DOUBLE_EQ(w->x0, 0.25);
  ASSERT_EQ(w->support.size(), 2u);
  EXPECT_DOUBLE_EQ(w->support[0].x, 0.0);
  EXPECT_DOUBLE_EQ(w->support[0].t, 0.5);
  EXPECT_DOUBLE_EQ(w->support[1].x, 0.5);
  EXPECT_DOUBLE_EQ(w->support[1].t, 0.5);
}

TEST(FindNonextremePoint, Cubic) {
  const auto w = find_nonextreme_point(fs_of("x^3", -1, 1));
  ASSERT_TRUE(w);
  EXPECT_DOUBLE_EQ(w->x0, 0.0);
  ASSERT_EQ(w->support.size(), 2u);
  EXPECT_DOUBLE_EQ(w->support[0].x, -1.0);
  EXPECT_DOUBLE_EQ(w->support[1].x, 1.0);
  EXPECT_DOUBLE_EQ(w->support[0].t, 0.5);
}

TEST(FindNonextremePoint, StrictlyConvexHasNone) {
  EXPECT_FALSE(find_nonextreme_point(fs_of("x^2", 0, 1)));
  EXPECT_FALSE(find_nonextreme_point(fs_of("-exp(x)", -2, 3)));
}

TEST(FindNonextremePoint, FallsBackToTriangleWhenNoChordHitsTheGrid) {
  // Cubic on an even grid: no grid point sits exactly on a chord of extreme points.
  const auto fs = fs_of("x^3 + x/7", -1, 1.1, 64);
  const auto w = find_nonextreme_point(fs);
  ASSERT_TRUE(w);
  EXPECT_LE(w->support.size(), 3u);
  const auto r = build_counterexample(*w, fs.f());
  verify_report(r, fs.f());
}

TEST(BuildCounterexample, AbsoluteValueNumbers) {
  const auto f = expr::parse("abs(x-1/2)");
  const CaratheodoryWitness w{0.25, {{0.0, 0.5}, {0.5, 0.5}}};
  const auto r = build_counterexample(w, f);
  EXPECT_EQ(r.A.diagonal_entries(), (std::vector<double>{0.25, 0.0, 0.5}));
  const ComplexMatrix& a = r.A.matrix();
  const ComplexMatrix phi_a2 = choi::apply(r.phi, a * a);
  EXPECT_DOUBLE_EQ(phi_a2(0, 0).real(), 0.125);
  EXPECT_DOUBLE_EQ(phi_a2(2, 2).real(), 0.25);
  EXPECT_NEAR(r.deviation, 0.0625, 1e-12);
  EXPECT_LE(r.residual_fix_A, 1e-10);
  EXPECT_LE(r.residual_fix_fA, 1e-10);
  verify_report(r, f);
}

TEST(BuildCounterexample, CubicNumbers) {
  const auto f = expr::parse("x^3");
  const auto r = build_counterexample({0.0, {{-1.0, 0.5}, {1.0, 0.5}}}, f);
  EXPECT_NEAR(r.deviation, 1.0, 1e-12);
  verify_report(r, f);
}

TEST(BuildCounterexample, RejectsBadWitnesses) {
  const auto f = expr::parse("x^3");
  EXPECT_THROW(build_counterexample({0.0, {{0.0, 1.0}}}, f), PreconditionError);
  EXPECT_THROW(build_counterexample({0.0, {}}, f), PreconditionError);
  EXPECT_THROW(build_counterexample({0.0, {{-1.0, 0.4}, {1.0, 0.4}}}, f), PreconditionError);
  EXPECT_THROW(build_counterexample({0.1, {{-1.0, 0.5}, {1.0, 0.5}}}, f), PreconditionError);
  EXPECT_THROW(build_counterexample({0.0, {{-0.5, 0.5}, {0.5, 0.5}}}, expr::parse("x^2")), PreconditionError);
  EXPECT_THROW(build_counterexample({0.0, {{-1.0, 1.5}, {1.0, -0.5}}}, f), PreconditionError);
}

TEST(RigidityVerdict, Examples) {
  EXPECT_EQ(rigidity_verdict(fs_of("x^2", 0, 1)).kind, Rigidity::RigidCandidate);
  const auto cubic = rigidity_verdict(fs_of("x^3", -1, 1));
  ASSERT_EQ(cubic.kind, Rigidity::NotRigid);
  EXPECT_NEAR(cubic.report->deviation, 1.0, 1e-9);
  const auto affine = rigidity_verdict(fs_of("2*x+1", 0, 1));
  ASSERT_EQ(affine.kind, Rigidity::NotRigid);
  verify_report(*affine.report, expr::parse("2*x+1"));
}

TEST(RigidityVerdict, RandomConvexPolynomialsStayRigidCandidatesUnderRefinement) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double c = 0.5 + std::abs(u(rng)), d = 0.1 * u(rng), e = u(rng), g = u(rng);
    const auto f = [=](double x) { return ((d * x + c) * x + e) * x + g; };
    EXPECT_EQ(rigidity_verdict(FunctionSystem(0, 1, f, 101)).kind, Rigidity::RigidCandidate);
    EXPECT_EQ(rigidity_verdict(FunctionSystem(0, 1, f, 201)).kind, Rigidity::RigidCandidate);
  }
}

TEST(RigidityVerdict, EveryReportVerifiesIndependently) {
  for (const char* text : {"abs(x-1/2)", "x^3", "sin(6*x)", "abs(x)^0.5*x", "cos(x)+x^4"}) {
    const auto fs = fs_of(text, -1, 1);
    const auto v = rigidity_verdict(fs);
    if (v.kind == Rigidity::NotRigid) {
      SCOPED_TRACE(text);
      verify_report(*v.report, fs.f());
    }
  }
}
