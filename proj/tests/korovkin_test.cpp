#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "hyperrigid/choi.hpp"
#include "hyperrigid/korovkin.hpp"

using namespace hyperrigid;
using namespace hyperrigid::korovkin;

namespace {

// E[(K/n)^3] for K ~ Bin(n, x), from factorial moments
double bernstein_cube(double n, double x) {
  return (n * (n - 1) * (n - 2) * x * x * x + 3 * n * (n - 1) * x * x + n * x) / (n * n * n);
}

}  // namespace

TEST(Bernstein, ReproducesAffine) {
  for (std::size_t n : {1u, 10u, 100u, 1000u, 2000u}) {
    const auto one = bernstein(n, [](double) { return 1.0; });
    const auto id = bernstein(n, [](double x) { return x; });
    for (std::size_t i = 0; i < one.grid.size(); ++i) {
      EXPECT_NEAR(one.values[i], 1.0, 1e-12);
      EXPECT_NEAR(id.values[i], one.grid[i], 1e-12);
    }
  }
}

TEST(Bernstein, SquareErrorIsQuarterOverN) {
  const auto sq = [](double x) { return x * x; };
  for (std::size_t n : {10u, 100u, 1000u}) {
    const double err = sup_distance(bernstein(n, sq), sample(sq, 1001));
    EXPECT_NEAR(err, 0.25 / static_cast<double>(n), 1e-10) << n;
  }
}

TEST(Bernstein, CubeAgainstMoments) {
  const auto cube = [](double x) { return x * x * x; };
  for (std::size_t n : {7u, 499u, 501u, 600u}) {
    const auto b = bernstein(n, cube, 51);
    for (std::size_t i = 0; i < b.grid.size(); ++i)
      EXPECT_NEAR(b.values[i], bernstein_cube(static_cast<double>(n), b.grid[i]), 1e-12) << n << " " << b.grid[i];
  }
}

TEST(Bernstein, PositiveAndEndpointInterpolating) {
  const auto f = [](double x) { return std::abs(std::sin(7.0 * x)); };
  const auto b = bernstein(900, f, 201);
  for (double v : b.values) EXPECT_GE(v, 0.0);
  EXPECT_DOUBLE_EQ(b.values.front(), f(0.0));
  EXPECT_DOUBLE_EQ(b.values.back(), f(1.0));
  EXPECT_THROW(bernstein(0, f), PreconditionError);
  EXPECT_THROW(bernstein(3, [](double x) { return 1.0 / (x - 0.5) / 0.0; }), DomainError);
}

TEST(KorovkinTable, BernsteinConverges) {
  const auto start = std::chrono::steady_clock::now();
  const auto t = korovkin_table(MapFamily::Bernstein, korovkin_tests(), default_probes(), {10, 100, 1000});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 5.0);
  ASSERT_EQ(t.columns.size(), 7u);
  EXPECT_EQ(t.columns[3].name, "sin(pi*x)");
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE(t.columns[0].errors[i], 1e-12);
    EXPECT_LE(t.columns[1].errors[i], 1e-12);
  }
  for (const auto& col : t.columns) {
    EXPECT_TRUE(col.monotone_breaks.empty()) << col.name;
    if (!col.is_test && col.name != "x^3") {
      EXPECT_GT(col.errors[0], col.errors[1]);
      EXPECT_GT(col.errors[1], col.errors[2]);
    }
  }
  EXPECT_TRUE(t.co_decrease);
  EXPECT_DOUBLE_EQ(t.max_test_error[1], t.columns[2].errors[1]);
}

TEST(KorovkinTable, DegenerateShapes) {
  const auto sq = korovkin_tests()[2];
  const auto t = korovkin_table(MapFamily::Bernstein, {sq}, {sq}, {20, 40});
  EXPECT_EQ(t.columns[0].errors, t.columns[1].errors);
  const auto one = korovkin_table(MapFamily::Bernstein, korovkin_tests(), {}, {5});
  EXPECT_EQ(one.max_test_error.size(), 1u);
  EXPECT_THROW(korovkin_table(MapFamily::Bernstein, korovkin_tests(), {}, {}), DomainError);
}

TEST(KorovkinTable, FlagsNonMonotoneColumns) {
  const auto t = korovkin_table(MapFamily::Bernstein, korovkin_tests(), {}, {100, 10});
  EXPECT_EQ(t.columns[2].monotone_breaks, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(t.columns[1].monotone_breaks.empty());  // below the noise floor
}

TEST(Pinching, BlocksAndErrors) {
  EXPECT_EQ(block_sizes(7, 3), (std::vector<std::size_t>{3, 2, 2}));
  EXPECT_THROW(block_sizes(3, 4), DomainError);
  EXPECT_THROW(block_sizes(3, 0), DomainError);
  const ComplexMatrix ones{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  EXPECT_EQ(pinch(ones, 2), (ComplexMatrix{{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(pinch(ones, 1), ones);
}

TEST(Pinching, FamilyIsUcpAndUnital) {
  for (bool conj : {false, true}) {
    const PinchingFamily phi(6, 4, conj);
    for (std::size_t b : {1u, 2u, 3u, 6u}) {
      const auto c = choi::choi_of_map(6, 6, [&](const ComplexMatrix& e) { return phi.apply(b, e); });
      EXPECT_TRUE(choi::is_ucp(c, 1e-10).ok) << conj << " " << b;
      EXPECT_LE((phi.apply(b, ComplexMatrix::identity(6)) - ComplexMatrix::identity(6)).max_abs(), 1e-12);
    }
  }
}

TEST(Pinching, MatrixFamilyTable) {
  const NamedFunction probe{"abs(2*x-1)", [](double x) { return std::abs(2.0 * x - 1.0); }};
  const auto t = matrix_pinching_family(32, {1, 2, 4, 8, 16, 32}, probe, 9);
  ASSERT_EQ(t.rows.size(), 6u);
  for (const auto& r : t.rows) {
    EXPECT_LE(r.err_x, 1e-15);
    EXPECT_LE(r.err_x2, 1e-15);
    EXPECT_LE(r.err_probe, 1e-15);
  }
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    EXPECT_LT(t.rows[i].conj_err_x, t.rows[i - 1].conj_err_x);
    EXPECT_LT(t.rows[i].conj_err_x2, t.rows[i - 1].conj_err_x2);
    EXPECT_LT(t.rows[i].conj_err_probe, t.rows[i - 1].conj_err_probe);
  }
  EXPECT_GT(t.rows.back().conj_err_x, 0.0);
  EXPECT_THROW(matrix_pinching_family(32, {2, 1}, probe), DomainError);
  EXPECT_THROW(matrix_pinching_family(32, {64}, probe), DomainError);
}

TEST(KorovkinTable, MatrixFamily) {
  KorovkinOptions opt;
  opt.dim = 24;
  const auto t = korovkin_table(MapFamily::MatrixPinching, korovkin_tests(), default_probes(), {1, 2, 4, 8}, opt);
  EXPECT_LE(t.columns[0].errors.back(), 1e-12);  // unital
  for (std::size_t c = 1; c < t.columns.size(); ++c) EXPECT_TRUE(t.columns[c].monotone_breaks.empty()) << t.columns[c].name;
  EXPECT_TRUE(t.co_decrease);
}
