#include <gtest/gtest.h>

#include <cmath>

#include "ustatlab/distributions.hpp"
#include "ustatlab/error.hpp"

namespace ustat {
namespace {

TEST(DrawIid, RademacherIsReproducible) {
  const auto a = draw_iid(SamplerSpec::rademacher(), 4, 2024, 0);
  const auto b = draw_iid(SamplerSpec::rademacher(), 4, 2024, 0);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(a[i].value() == 1.0 || a[i].value() == -1.0);
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST(DrawIid, PointMassRepeatsTheAtom) {
  const HilbertPoint a = HilbertPoint::scalar(2.5);
  const auto s = draw_iid(SamplerSpec::from_finite(FiniteDistribution::point_mass(a)), 3, 1, 0);
  for (const auto& p : s) EXPECT_EQ(p, a);
}

TEST(DrawIid, RademacherMeanWithinClt) {
  const int n = 100'000;
  const auto s = draw_iid(SamplerSpec::rademacher(), n, 77, 0);
  double sum = 0.0;
  for (const auto& p : s) sum += p.value();
  EXPECT_LE(std::abs(sum / n), 3.0 / std::sqrt(n));
}

TEST(DrawIid, DistinctStreamsAreUncorrelated) {
  const int n = 100'000;
  const auto a = draw_iid(SamplerSpec::rademacher(), n, 77, 1);
  const auto b = draw_iid(SamplerSpec::rademacher(), n, 77, 2);
  double cross = 0.0;
  for (int i = 0; i < n; ++i) cross += a[i].value() * b[i].value();
  EXPECT_LE(std::abs(cross / n), 4.0 / std::sqrt(n));
}

TEST(DrawIid, DiscretizedGaussianScalesByWeights) {
  const auto spec = SamplerSpec::discretized_gaussian(4);
  const auto s = draw_iid(spec, 20'000, 3, 0);
  double sq = 0.0;
  for (const auto& p : s) sq += p[0] * p[0];
  // Coordinates are N(0, 1) scaled by sqrt(1/4).
  EXPECT_NEAR(sq / s.size(), 0.25, 4.0 * 0.25 * std::sqrt(2.0 / s.size()));
}

TEST(ExactExpectation, Examples) {
  const auto rad = FiniteDistribution::rademacher();
  const auto uni = FiniteDistribution::uniform_grid(3);
  const PointFunction id = [](std::span<const HilbertPoint> x) { return x[0]; };
  const PointFunction gap = [](std::span<const HilbertPoint> x) {
    return HilbertPoint::scalar(std::abs(x[0].value() - x[1].value()));
  };
  EXPECT_EQ(exact_expectation(id, rad, 1).value(), 0.0);
  EXPECT_DOUBLE_EQ(exact_expectation(gap, rad, 2).value(), 1.0);
  EXPECT_NEAR(exact_expectation(gap, uni, 2).value(), 8.0 / 9.0, 1e-15);
}

TEST(ExactExpectation, LinearAndPointMass) {
  const auto uni = FiniteDistribution::uniform_grid(4);
  const PointFunction f = [](std::span<const HilbertPoint> x) {
    return HilbertPoint::scalar(x[0].value() * x[0].value());
  };
  const PointFunction g = [](std::span<const HilbertPoint> x) {
    return HilbertPoint::scalar(x[0].value() + 1.0);
  };
  const PointFunction fg = [&](std::span<const HilbertPoint> x) {
    return HilbertPoint::scalar(2.0 * f(x).value() - 3.0 * g(x).value());
  };
  EXPECT_NEAR(exact_expectation(fg, uni, 1).value(),
              2.0 * exact_expectation(f, uni, 1).value() - 3.0 * exact_expectation(g, uni, 1).value(),
              1e-14);
  const HilbertPoint atom = HilbertPoint::scalar(-0.75);
  const PointFunction id = [](std::span<const HilbertPoint> x) { return x[0]; };
  EXPECT_EQ(exact_expectation(id, FiniteDistribution::point_mass(atom), 1), atom);
}

TEST(ExactExpectation, EnforcesCap) {
  const PointFunction id = [](std::span<const HilbertPoint> x) { return x[0]; };
  EXPECT_THROW(exact_expectation(id, FiniteDistribution::uniform_grid(10), 3, 999), BudgetError);
}

TEST(FiniteDistribution, RejectsBadInput) {
  EXPECT_THROW(FiniteDistribution({HilbertPoint::scalar(1)}, {0.5}), InvalidSpecError);
  EXPECT_THROW(FiniteDistribution({HilbertPoint::scalar(1), HilbertPoint::scalar(2)}, {1.2, -0.2}),
               InvalidSpecError);
  EXPECT_THROW(FiniteDistribution({}, {}), InvalidSpecError);
  EXPECT_THROW(SamplerSpec::uniform_grid(1).validate(), InvalidSpecError);
}

}  // namespace
}  // namespace ustat
