#include <gtest/gtest.h>

#include <random>

#include "okflow/fourier_scb.hpp"

using namespace okflow;

namespace {

ScbSet make(std::vector<Interval> f, double C = 0.0, int q = 1) {
  return ScbSet(IVector(std::move(f)), TailBound{C, 6, 0, q});
}

// A random set and a random subset of it.
std::pair<ScbSet, ScbSet> nested(std::mt19937_64& rng, std::size_t M) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), t(0.0, 1.0);
  std::vector<Interval> outer, inner;
  for (std::size_t k = 0; k < M; ++k) {
    double c = u(rng), r = t(rng);
    outer.emplace_back(c - r, c + r);
    double a = c - r + 2 * r * t(rng), b = c - r + 2 * r * t(rng);
    inner.push_back(Interval::hull(std::clamp(a, c - r, c + r), std::clamp(b, c - r, c + r)));
  }
  double C = 2 * t(rng);
  return {make(outer, C), make(inner, C * t(rng))};
}

}  // namespace

TEST(FourierScb, ProjectExamples) {
  ScbSet s = make({Interval(1.0), Interval(2.0)});
  IVector p = project(s, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], Interval(1.0));
  EXPECT_EQ(project(s, 2), s.finite);
  IVector z = project(ScbSet::zero(5), 3);
  ASSERT_EQ(z.size(), 3u);
  for (const auto& x : z) EXPECT_TRUE(x.is_zero());
  EXPECT_THROW(project(s, 3), std::out_of_range);
}

TEST(FourierScb, BlockInfNormExamples) {
  EXPECT_EQ(block_inf_norm(ScbSet::zero(4)), 0.0);
  EXPECT_EQ(block_inf_norm(make({Interval(-3, 2)})), 3.0);
  EXPECT_EQ(block_inf_norm(make({Interval(0.0)}, 64.0)), 1.0);
}

TEST(FourierScb, BlockInfNormZeroIffZeroSet) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto [outer, inner] = nested(rng, 1 + rng() % 8);
    bool zero = outer.tail.C == 0;
    for (const auto& x : outer.finite) zero = zero && x.is_zero();
    EXPECT_EQ(block_inf_norm(outer) == 0.0, zero);
  }
  ScbSet z = ScbSet::zero(3);
  EXPECT_EQ(block_inf_norm(z), 0.0);
  z.tail.C = 1e-300;
  EXPECT_GT(block_inf_norm(z), 0.0);
}

TEST(FourierScb, IsSubsetExamples) {
  ScbSet a = make({Interval(0.1, 0.2)}, 1.0);
  ScbSet b = make({Interval(0.0, 1.0)}, 2.0);
  EXPECT_TRUE(is_subset(a, a));
  EXPECT_TRUE(is_subset(a, b));
  SubsetResult r = is_subset(make({Interval(-2, 2)}), make({Interval(-1, 1)}));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.first_fail, 1);
  SubsetResult t = is_subset(make({Interval(0.0)}, 3.0), make({Interval(0.0)}, 2.0));
  EXPECT_FALSE(t.ok);
  EXPECT_EQ(t.first_fail, -1);
}

TEST(FourierScb, IsSubsetReflexiveTransitive) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::size_t M = 1 + rng() % 10;
    auto [a, b] = nested(rng, M);
    auto [b2, c] = [&] {
      // c inside b by shrinking each interval toward its midpoint
      ScbSet s = b;
      for (auto& x : s.finite) x = Interval::hull(x.lo() + 0.25 * (x.hi() - x.lo()), x.hi() - 0.25 * (x.hi() - x.lo()));
      s.tail.C *= 0.5;
      return std::pair{b, s};
    }();
    EXPECT_TRUE(is_subset(a, a));
    EXPECT_TRUE(is_subset(b, a));
    EXPECT_TRUE(is_subset(c, b2));
    EXPECT_TRUE(is_subset(c, a));
  }
}

TEST(FourierScb, TailAcrossDifferentLengths) {
  // outer explicit range shorter: the inner explicit entries beyond it must fit under the outer tail
  ScbSet inner = make({Interval(0.0), Interval(-1e-6, 1e-6)});
  ScbSet outer = make({Interval(-1, 1)}, 1.0);  // bound 1/64 at k = 2
  EXPECT_TRUE(is_subset(inner, outer));
  inner.finite[1] = Interval(-0.1, 0.1);
  EXPECT_FALSE(is_subset(inner, outer));
}

TEST(FourierScb, SerializationRoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    auto [a, b] = nested(rng, 1 + rng() % 12);
    a.tail.q = 1 + static_cast<int>(rng() % 3);
    ScbSet r = scb_from_string(to_string(a));
    EXPECT_EQ(r.finite, a.finite);
    EXPECT_EQ(r.tail, a.tail);
  }
  EXPECT_EQ(to_string(make({Interval(-1, 0.5)}, 2.0)), "scb M=1 s=6 C=2 start=2\n1 -1 0.5\n");
  EXPECT_THROW(scb_from_string("scb M=2 s=6 C=0 start=3\n1 0 0\n"), std::runtime_error);
  EXPECT_THROW(scb_from_string("nope\n"), std::runtime_error);
}

TEST(FourierScb, SymmetryClassMembership) {
  SymmetryClass c3{3};
  EXPECT_TRUE(c3.contains(make({Interval(0.0), Interval(0.0), Interval(-1, 1)}, 1.0, 3)));
  EXPECT_FALSE(c3.contains(make({Interval(0.0), Interval(0.0, 1e-300), Interval(-1, 1)})));
  EXPECT_FALSE(c3.contains(make({Interval(0.0)}, 1.0, 1)));
  EXPECT_TRUE(c3.allows(9));
  EXPECT_FALSE(c3.allows(4));
}

TEST(FourierScb, FrameRoundTripEncloses) {
  auto f = std::make_shared<Frame>();
  f->center = {0.5, -0.25};
  f->P = from_point({{1, 1}, {1, -1}});
  f->Pinv = from_point({{0.5, 0.5}, {0.5, -0.5}});
  ScbSet s = make({Interval(0.4, 0.6), Interval(-0.3, -0.2), Interval(0.0, 1e-3)}, 1e-4);
  ScbSet fr = to_frame(s, f);
  EXPECT_EQ(fr.frame, f);
  ScbSet back = to_standard(fr);
  EXPECT_TRUE(is_subset(s, back));
  EXPECT_EQ(back.finite[2], s.finite[2]);
  EXPECT_FALSE(is_subset(s, fr).ok);  // frames differ
}
