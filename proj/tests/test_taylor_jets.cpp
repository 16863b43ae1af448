#include <gtest/gtest.h>

#include "oracle.hpp"
#include "okflow/integrator.hpp"
#include "okflow/taylor_jets.hpp"

using namespace okflow;

namespace {

bool same(const Jet& a, const Jet& b) { return a.value == b.value && a.partials == b.partials; }

Jet jet(double v, std::vector<double> d) {
  IVector p(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) p[i] = Interval(d[i]);
  return Jet(Interval(v), p);
}

// Normalized derivatives of the scalar flow z' = z^n from z(0) = z0 (one partial).
std::vector<Jet> power_flow(int n, double z0, std::size_t order) {
  std::vector<Jet> z{Jet::variable(Interval(z0), 1, 0)};
  for (std::size_t j = 0; j < order; ++j) {
    // (z^n)^{[j]} by repeated Cauchy products of jets
    std::vector<Jet> pw(z);
    for (int e = 1; e < n; ++e) {
      std::vector<Jet> next;
      for (std::size_t r = 0; r <= j; ++r) {
        Jet acc = Jet::constant(Interval(0.0), 1);
        for (std::size_t a = 0; a <= r; ++a) acc = jet_add(acc, jet_mul(pw[a], z[r - a]));
        next.push_back(acc);
      }
      pw = next;
    }
    z.push_back(next_normalized_derivative({pw[j]}, j)[0]);
  }
  return z;
}

mpq_class factorial(unsigned j) {
  mpq_class f = 1;
  for (unsigned i = 2; i <= j; ++i) f *= i;
  return f;
}

}  // namespace

TEST(TaylorJets, AddExamples) {
  Jet a = jet(0.3, {1.5, -2});
  EXPECT_TRUE(same(jet_add(a, jet(0, {0, 0})), a));
  EXPECT_TRUE(same(jet_add(jet(1, {1, 0}), jet(2, {0, 1})), jet(3, {1, 1})));
  EXPECT_THROW(jet_add(jet(1, {1}), jet(1, {1, 0})), std::invalid_argument);
}

TEST(TaylorJets, MulExamples) {
  Jet a = jet(0.3, {1.5, -2});
  EXPECT_TRUE(same(jet_mul(a, jet(1, {0, 0})), a));
  EXPECT_TRUE(same(jet_mul(jet(2, {1, 0}), jet(3, {0, 1})), jet(6, {3, 2})));
  EXPECT_TRUE(same(jet_mul(jet(0, {1, 2}), jet(0, {3, 4})), jet(0, {0, 0})));
}

TEST(TaylorJets, ExponentialSeries) {
  std::vector<Jet> z = power_flow(1, 1.0, 12);
  for (unsigned j = 0; j <= 12; ++j) {
    mpq_class ex = 1 / factorial(j);
    EXPECT_TRUE(oracle::contains(z[j].value, ex)) << j;
    EXPECT_TRUE(oracle::contains(z[j].partials[0], ex)) << j;
  }
}

TEST(TaylorJets, CubicSeries) {
  // z(t) = (1 - 2t)^{-1/2}: coefficients binom(2j, j) / 2^j; dz/dz0 at z0 = 1 is (1 - 2t)^{-3/2}
  std::vector<Jet> z = power_flow(3, 1.0, 10);
  EXPECT_TRUE(oracle::contains(z[1].value, 1));
  EXPECT_TRUE(oracle::contains(z[2].value, mpq_class(3, 2)));
  EXPECT_TRUE(oracle::contains(z[3].value, mpq_class(5, 2)));
  mpq_class pw = 1;
  for (unsigned j = 0; j <= 10; ++j) {
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), 2 * j, j);
    EXPECT_TRUE(oracle::contains(z[j].value, mpq_class(b) / pw)) << j;
    // (1 - 2t)^{-3/2} = sum (2j+1) binom(2j, j) / 2^j t^j
    EXPECT_TRUE(oracle::contains(z[j].partials[0], mpq_class(b * (2 * j + 1)) / pw)) << j;
    pw *= 2;
  }
}

TEST(TaylorJets, LinearDiagonalSystem) {
  const double mu = 0.75, z0 = 0.5;
  std::vector<Jet> z{Jet::variable(Interval(z0), 1, 0)};
  for (std::size_t j = 0; j < 10; ++j) z.push_back(next_normalized_derivative({jet_scale(z[j], Interval(mu))}, j)[0]);
  mpq_class pw = 1;
  for (unsigned j = 0; j <= 10; ++j) {
    EXPECT_TRUE(oracle::contains(z[j].value, pw / factorial(j) * mpq_class(z0))) << j;
    EXPECT_TRUE(oracle::contains(z[j].partials[0], pw / factorial(j))) << j;
    pw *= mpq_class(3, 4);
  }
}

TEST(TaylorJets, PartialsMatchFiniteDifferences) {
  OkParams p = canonical_params();
  const std::size_t m = 6, order = 8;
  std::vector<Interval> mu = linear_eigenvalues(m, p);
  std::vector<double> x{0.01, 0.05, 0.12, -0.02, 0.004, 0.001};
  auto series = [&](const std::vector<double>& v, bool partials) {
    JetSeries s(m, partials ? m : 0, order);
    for (std::size_t k = 1; k <= m; ++k) {
      s.at(0, 0, k) = Interval(v[k - 1]);
      if (partials) s.at(0, k, k) = Interval(1.0);
    }
    DirectConvolver conv;
    taylor_coefficients(s, p, mu, nullptr, conv);
    return s;
  };
  JetSeries s = series(x, true);
  // partials of the flow at time h against central differences of the value flow
  const double h = 1e-3, d = 1e-6;
  for (std::size_t l = 1; l <= m; ++l) {
    std::vector<double> xp = x, xm = x;
    xp[l - 1] += d;
    xm[l - 1] -= d;
    IVector vp = horner(series(xp, false), 0, order, Interval(h));
    IVector vm = horner(series(xm, false), 0, order, Interval(h));
    IVector dl = horner(s, l, order, Interval(h));
    for (std::size_t k = 1; k <= m; ++k) {
      double fd = (vp[k - 1].mid() - vm[k - 1].mid()) / (2 * d);
      EXPECT_NEAR(dl[k - 1].mid(), fd, 1e-6) << k << "," << l;
    }
  }
}
