#include <gtest/gtest.h>

#include <cmath>

#include "ustatlab/error.hpp"
#include "ustatlab/stats.hpp"

namespace ustat {
namespace {

TEST(Wilson, FrozenValues) {
  const Interval a = wilson(0, 100);
  EXPECT_NEAR(a.lo, 0.0, 1e-15);
  EXPECT_NEAR(a.hi, 0.03699349820698568, 1e-14);
  const Interval b = wilson(50, 100);
  EXPECT_NEAR(b.lo, 0.4038315303659956, 1e-14);
  EXPECT_NEAR(b.hi, 0.5961684696340044, 1e-14);
  const Interval c = wilson(7, 20);
  EXPECT_NEAR(c.lo, 0.18119182410108206, 1e-14);
  EXPECT_NEAR(c.hi, 0.5671457233147638, 1e-14);
}

TEST(MeanSe, Basic) {
  const std::vector<double> v{1, 2, 3, 4};
  const MeanSe ms = mean_se(v);
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_NEAR(ms.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Quantile, Type7) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.9), 3.7);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({5}, 0.3), 5.0);
}

TEST(LeastSquares, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const LinearFit f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  const std::vector<double> one{1};
  EXPECT_THROW(least_squares(one, one), InvalidSpecError);
}

TEST(TailFraction, StrictlyAbove) {
  const std::vector<double> v{1, 2, 2, 3};
  EXPECT_DOUBLE_EQ(tail_fraction(v, 2.0), 0.25);
  EXPECT_DOUBLE_EQ(tail_fraction(v, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(tail_fraction(v, 3.0), 0.0);
}

TEST(Integrate, GaussLegendreIsExactForDegree15) {
  EXPECT_NEAR(integrate([](double x) { return std::pow(x, 15); }, 0, 1), 1.0 / 16, 1e-15);
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0, M_PI, 4), 2.0, 1e-13);
}

TEST(TailOracle, Survival) {
  const TailOracle e = TailOracle::empirical({1, 2, 2, 4});
  EXPECT_DOUBLE_EQ(e.survival(0.5), 1.0);
  EXPECT_DOUBLE_EQ(e.survival(2.0), 0.25);
  EXPECT_DOUBLE_EQ(e.survival(4.0), 0.0);
  EXPECT_TRUE(e.bounded());
  EXPECT_EQ(e.support_max(), 4.0);
  const TailOracle d = TailOracle::discrete({0, 1}, {0.3, 0.7});
  EXPECT_DOUBLE_EQ(d.survival(0.5), 0.7);
  EXPECT_FALSE(TailOracle::analytic([](double t) { return std::exp(-t); }).bounded());
}

TEST(TailIntegral, CutoffClosedForm) {
  // int_1^{b/s} u du = ((b/s)^2 - 1) / 2.
  const auto r = tail_integral(TailOracle::cutoff(6.0), 2.0, [](double u) { return u; });
  EXPECT_NEAR(r.value, 4.0, 1e-13);
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(tail_integral(TailOracle::cutoff(1.0), 2.0, [](double u) { return u; }).value, 0.0);
}

TEST(TailIntegral, AnalyticConvergesOrFlags) {
  const auto e = tail_integral(TailOracle::analytic([](double t) { return std::exp(-t); }), 1.0,
                               [](double) { return 1.0; });
  EXPECT_NEAR(e.value, std::exp(-1.0), 1e-12);
  EXPECT_FALSE(e.diverged);
  const auto h = tail_integral(TailOracle::analytic([](double t) { return 1.0 / (1.0 + t); }), 1.0,
                               [](double u) { return u; });
  EXPECT_TRUE(h.diverged);
}

TEST(TailIntegral, EmpiricalRefinementIsStable) {
  std::vector<double> v;
  for (int i = 1; i <= 200; ++i) v.push_back(std::sqrt(i * 0.37));
  const auto law = TailOracle::empirical(v);
  const auto w = [](double u) { return u * std::pow(1.0 + std::log(u), 3.0); };
  const double a = tail_integral(law, 0.5, w, 1).value;
  const double b = tail_integral(law, 0.5, w, 2).value;
  EXPECT_LT(std::abs(a - b), 1e-3 * std::abs(b));
}

}  // namespace
}  // namespace ustat
