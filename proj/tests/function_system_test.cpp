#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperrigid/expr.hpp"
#include "hyperrigid/function_system.hpp"

using namespace hyperrigid;

namespace {

FunctionSystem fs_of(const char* text, double a, double b, std::size_t m = 101) {
  return FunctionSystem(a, b, expr::parse(text), m);
}

// Random polynomial with f'' >= 2c > 0 on [0,1]: c x^2 plus a small cubic plus an affine part.
FunctionSystem random_convex_poly(std::mt19937_64& rng, std::size_t m, bool negate = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double c = 0.5 + std::abs(u(rng));
  const double d = 0.1 * u(rng);  // |6 d x| <= 0.6 < 2c
  const double e = u(rng), g = u(rng);
  const double s = negate ? -1.0 : 1.0;
  return FunctionSystem(0.0, 1.0, [=](double x) { return s * (((d * x + c) * x + e) * x + g); }, m);
}

bool inside_or_on(const std::vector<Point2>& pts, const std::vector<std::size_t>& hull, const Point2& q) {
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const Point2& a = pts[hull[k]];
    const Point2& b = pts[hull[(k + 1) % hull.size()]];
    const double cr = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
    if (cr < -1e-9) return false;
  }
  return true;
}

}  // namespace

TEST(ConvexHull, Triangle) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_EQ(convex_hull(pts), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(ConvexHull, CollinearMidpointExcluded) {
  const std::vector<Point2> pts{{0, 0}, {0.5, 0.5}, {1, 1}};
  EXPECT_EQ(convex_hull(pts), (std::vector<std::size_t>{0, 2}));
}

TEST(ConvexHull, SampledParabolaHasEveryPointAsVertex) {
  const auto g = fs_of("x^2", 0, 1).sample();
  EXPECT_EQ(convex_hull(g.points).size(), 101u);
}

TEST(ConvexHull, SinglePointAndDuplicates) {
  EXPECT_EQ(convex_hull({{2, 3}}), (std::vector<std::size_t>{0}));
  EXPECT_EQ(convex_hull({{1, 1}, {1, 1}, {0, 0}}).size(), 2u);
  EXPECT_THROW(convex_hull({}), DomainError);
}

TEST(ConvexHull, StartsAtLexicographicMinimumAndContainsAllPoints) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts(60);
    for (auto& p : pts) p = {g(rng), g(rng)};
    const auto hull = convex_hull(pts);
    std::size_t lex = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].x < pts[lex].x || (pts[i].x == pts[lex].x && pts[i].y < pts[lex].y)) lex = i;
    EXPECT_EQ(hull.front(), lex);
    for (const auto& q : pts) EXPECT_TRUE(inside_or_on(pts, hull, q));
    // strictly convex polygon: every consecutive turn is counterclockwise
    for (std::size_t k = 0; k < hull.size(); ++k) {
      const Point2& a = pts[hull[k]];
      const Point2& b = pts[hull[(k + 1) % hull.size()]];
      const Point2& c = pts[hull[(k + 2) % hull.size()]];
      EXPECT_GT((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x), 0.0);
    }
  }
}

TEST(ClassifyConvexity, Examples) {
  EXPECT_EQ(classify_convexity(fs_of("x^2", 0, 1)).kind, Convexity::StrictlyConvex);
  const auto affine = classify_convexity(fs_of("2*x+1", 0, 1));
  EXPECT_EQ(affine.kind, Convexity::Neither);
  ASSERT_TRUE(affine.witness);
  const auto cubic = classify_convexity(fs_of("x^3", -1, 1));
  EXPECT_EQ(cubic.kind, Convexity::Neither);
  ASSERT_TRUE(cubic.witness);
  EXPECT_LT((*cubic.witness)[0], 0.0);
  EXPECT_DOUBLE_EQ((*cubic.witness)[1], 0.0);
  EXPECT_GT((*cubic.witness)[2], 0.0);
}

TEST(ClassifyConvexity, WitnessOnEvenGridStillStraddlesSignChange) {
  const auto r = classify_convexity(fs_of("x^3", -1, 1, 100));
  ASSERT_TRUE(r.witness);
  EXPECT_LT((*r.witness)[0], 0.0);
  EXPECT_GT((*r.witness)[2], 0.0);
}

TEST(ClassifyConvexity, NegationSwapsConvexAndConcave) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seed = rng();
    std::mt19937_64 r1(seed), r2(seed);
    EXPECT_EQ(classify_convexity(random_convex_poly(r1, 101)).kind, Convexity::StrictlyConvex);
    EXPECT_EQ(classify_convexity(random_convex_poly(r2, 101, true)).kind, Convexity::StrictlyConcave);
  }
}

TEST(ClassifyConvexity, NanSampleIsDomainError) {
  EXPECT_THROW(classify_convexity(fs_of("log(x)", -1, 1)), DomainError);
  EXPECT_THROW(FunctionSystem(1, 0, [](double x) { return x; }), DomainError);
  EXPECT_THROW(FunctionSystem(0, 1, [](double x) { return x; }, 2), DomainError);
}

TEST(ChoquetBoundary, StrictlyConvexFlagsEverything) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fs = random_convex_poly(rng, 101);
    ASSERT_EQ(classify_convexity(fs).kind, Convexity::StrictlyConvex);
    for (const auto& p : choquet_boundary(fs)) EXPECT_TRUE(p.boundary) << p.x;
  }
}

TEST(ChoquetBoundary, AbsoluteValueKink) {
  const auto flags = choquet_boundary(fs_of("abs(x-1/2)", 0, 1));
  std::vector<double> flagged;
  for (const auto& p : flags)
    if (p.boundary) flagged.push_back(p.x);
  ASSERT_EQ(flagged.size(), 3u);
  EXPECT_DOUBLE_EQ(flagged[0], 0.0);
  EXPECT_DOUBLE_EQ(flagged[1], 0.5);
  EXPECT_DOUBLE_EQ(flagged[2], 1.0);
}

TEST(ChoquetBoundary, ThreeNonCollinearPoints) {
  for (const auto& p : choquet_boundary(fs_of("sin(3*x)", 0, 2, 3))) EXPECT_TRUE(p.boundary);
}

TEST(ChoquetBoundary, InvariantUnderAddingAffineFunctions) {
  for (const char* f : {"abs(x-1/2)", "x^3", "sin(7*x)", "x^2", "exp(x)*cos(5*x)"}) {
    const auto base = choquet_boundary(fs_of(f, -1, 1));
    const auto shifted = choquet_boundary(FunctionSystem(-1, 1, [g = expr::parse(f)](double x) {
      return g(x) + 3.0 * x - 2.0;
    }));
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(base[i].boundary, shifted[i].boundary) << f << " " << i;
  }
}

TEST(ChoquetBoundary, FlagsStableUnderRefinement) {
  EXPECT_TRUE(boundary_stable_under_refinement(fs_of("abs(x-1/2)", 0, 1)));
  EXPECT_TRUE(boundary_stable_under_refinement(fs_of("x^2", 0, 1)));
}
