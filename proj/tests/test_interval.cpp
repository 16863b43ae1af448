#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "okflow/interval.hpp"

using namespace okflow;

namespace {

Interval random_interval(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> e(-20, 20);
  double a = std::ldexp(u(rng), e(rng)), b = std::ldexp(u(rng), e(rng));
  return Interval::hull(a, b);
}

double random_point(const Interval& x, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(0.0, 1.0);
  double v = x.lo() + t(rng) * (x.hi() - x.lo());
  return std::clamp(v, x.lo(), x.hi());
}

}  // namespace

TEST(Interval, AddExamples) {
  EXPECT_EQ(add(Interval(1, 2), Interval(3, 4)), Interval(4, 6));
  EXPECT_EQ(add(Interval(0.0), Interval(-1, 5)), Interval(-1, 5));
  EXPECT_EQ(add(Interval(-1, 1), Interval(-1, 1)), Interval(-2, 2));
}

TEST(Interval, MulExamples) {
  EXPECT_EQ(mul(Interval(1, 2), Interval(-3, 4)), Interval(-6, 8));
  EXPECT_EQ(mul(Interval(0.0), Interval(-9, 9)), Interval(0.0));
  EXPECT_EQ(mul(Interval(-2, -1), Interval(-2, -1)), Interval(1, 4));
}

TEST(Interval, MaxAbsExamples) {
  EXPECT_EQ(max_abs(Interval(-3, 2)), 3.0);
  EXPECT_EQ(max_abs(Interval(0.0)), 0.0);
  EXPECT_EQ(max_abs(Interval(1, 5)), 5.0);
  for (double a : {0.1, 1e-300, 3.0, 1e300}) EXPECT_EQ(max_abs(Interval::symmetric(a)), a);
}

TEST(Interval, MatVecExamples) {
  IVector v(std::vector<Interval>{Interval(1.0), Interval(-2, 3)});
  IVector r = mat_vec(IMatrix::identity(2), v);
  EXPECT_EQ(r[0], v[0]);
  EXPECT_EQ(r[1], v[1]);
  IVector z = mat_vec(IMatrix(2, 2), v);
  EXPECT_TRUE(z[0].is_zero() && z[1].is_zero());
  IVector w = mat_vec(from_point({{1, 2}, {3, 4}}), IVector(std::vector<Interval>{Interval(1.0), Interval(1.0)}));
  EXPECT_EQ(w[0], Interval(3.0));
  EXPECT_EQ(w[1], Interval(7.0));
}

TEST(Interval, ConstructionErrors) {
  EXPECT_THROW(Interval(2, 1), std::invalid_argument);
  EXPECT_THROW(Interval(std::nan(""), 1), std::invalid_argument);
  EXPECT_THROW(mat_vec(IMatrix(2, 3), IVector(2)), std::invalid_argument);
  EXPECT_THROW(IVector(2) + IVector(3), std::invalid_argument);
  EXPECT_THROW(IMatrix(2, 3) * IMatrix(2, 3), std::invalid_argument);
}

TEST(Interval, ContainmentAgainstRationals) {
  std::mt19937_64 rng(7);
  int violations = 0;
  for (int i = 0; i < 4000; ++i) {
    Interval x = random_interval(rng), y = random_interval(rng);
    double a = random_point(x, rng), b = random_point(y, rng);
    mpq_class qa(a), qb(b);
    if (!oracle::contains(x + y, qa + qb)) ++violations;
    if (!oracle::contains(x - y, qa - qb)) ++violations;
    if (!oracle::contains(x * y, qa * qb)) ++violations;
  }
  for (int i = 0; i < 300; ++i) {
    std::size_t n = 1 + rng() % 6;
    IMatrix A(n, n);
    IVector v(n);
    std::vector<std::vector<double>> pa(n, std::vector<double>(n));
    std::vector<double> pv(n);
    for (std::size_t r = 0; r < n; ++r) {
      v[r] = random_interval(rng);
      pv[r] = random_point(v[r], rng);
      for (std::size_t c = 0; c < n; ++c) {
        A(r, c) = random_interval(rng);
        pa[r][c] = random_point(A(r, c), rng);
      }
    }
    IVector y = mat_vec(A, v);
    for (std::size_t r = 0; r < n; ++r) {
      mpq_class s = 0;
      for (std::size_t c = 0; c < n; ++c) s += mpq_class(pa[r][c]) * mpq_class(pv[c]);
      if (!oracle::contains(y[r], s)) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Interval, InclusionMonotone) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    Interval x = random_interval(rng), y = random_interval(rng);
    Interval xs = Interval::hull(random_point(x, rng), random_point(x, rng));
    Interval ys = Interval::hull(random_point(y, rng), random_point(y, rng));
    EXPECT_TRUE((x + y).contains(xs + ys));
    EXPECT_TRUE((x * y).contains(xs * ys));
  }
}

TEST(Interval, PiEnclosure) {
  Interval p = pi_interval();
  EXPECT_LE(oracle::q(p.lo()), oracle::pi_lo());
  EXPECT_GE(oracle::q(p.hi()), oracle::pi_hi());
  EXPECT_LE(p.width(), 1e-15);
}

TEST(Interval, ExpEnclosesLongDoubleValue) {
  for (double x : {-745.0, -50.0, -3.3, -1.0, -1e-9, 0.0, 1e-9, 0.5, 1.0, 7.25, 300.0}) {
    Interval e = okflow::exp(Interval(x));
    long double ref = std::exp(static_cast<long double>(x));
    EXPECT_LE(static_cast<long double>(e.lo()), ref * (1 + 1e-15L)) << x;
    EXPECT_GE(static_cast<long double>(e.hi()), ref * (1 - 1e-15L)) << x;
    if (x > -700) {
      EXPECT_LE(e.width(), 1e-12 * (1 + std::fabs(x)) * e.hi()) << x;
    }
  }
  EXPECT_TRUE(okflow::exp(Interval(0.0)).contains(1.0));
}

TEST(Interval, InverseEnclosureContainsExactInverse) {
  IMatrix Q = from_point({{2, 1}, {1, 3}});
  IMatrix R = from_point({{0.6, -0.2}, {-0.2, 0.4}});
  IMatrix I = inverse_enclosure(Q, R);
  // exact inverse is [[3/5, -1/5], [-1/5, 2/5]]
  mpq_class ex[2][2] = {{mpq_class(3, 5), mpq_class(-1, 5)}, {mpq_class(-1, 5), mpq_class(2, 5)}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_TRUE(oracle::contains(I(i, j), ex[i][j]));
}
