#include <gtest/gtest.h>

#include <cmath>

#include "property.hpp"
#include "ustatlab/combinatorics.hpp"
#include "ustatlab/error.hpp"
#include "ustatlab/hoeffding.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/ustats.hpp"

namespace ustat {
namespace {

HilbertPoint s(double v) { return HilbertPoint::scalar(v); }

double h1(const ProjectedKernel& p, double x) {
  const std::vector<HilbertPoint> a{s(x)};
  return p.eval(a).value();
}

// Symmetric cubic kernel used for m = 3 identities.
KernelSpec triple_kernel() {
  return KernelSpec("triple", 3, HilbertSpace::real_line(),
                    [](ArgRefs a, std::span<double> out) {
                      const double x = a[0]->value(), y = a[1]->value(), z = a[2]->value();
                      out[0] = x * y * z + x * x + y * y + z * z + std::abs(x - y) * std::abs(y - z) *
                                                                     std::abs(x - z);
                    },
                    true);
}

TEST(Project, Examples) {
  const auto rad = FiniteDistribution::rademacher();
  const auto uni = FiniteDistribution::uniform_grid(3);
  const auto pp = project(product_kernel(), 1, uni);
  for (double x : {-1.0, 0.0, 1.0}) EXPECT_NEAR(h1(pp, x), 0.0, 1e-15);
  const auto gr = project(gini_kernel(), 1, rad);
  EXPECT_EQ(h1(gr, 1.0), 0.0);
  EXPECT_EQ(h1(gr, -1.0), 0.0);
  const auto gu = project(gini_kernel(), 1, uni);
  EXPECT_NEAR(h1(gu, 0.0), -2.0 / 9.0, 1e-15);
}

TEST(Project, RejectsAsymmetricKernels) {
  const KernelSpec first("first", 2, HilbertSpace::real_line(),
                         [](ArgRefs a, std::span<double> out) { out[0] = a[0]->value(); }, false);
  EXPECT_THROW(project(first, 1, FiniteDistribution::rademacher()), PreconditionError);
  EXPECT_THROW(project(gini_kernel(), 3, FiniteDistribution::rademacher()), InvalidSpecError);
}

TEST(DegeneracyOrder, Examples) {
  const auto g_rad = degeneracy_order(gini_kernel(), FiniteDistribution::rademacher());
  EXPECT_EQ(g_rad.order, 2);
  const auto g_uni = degeneracy_order(gini_kernel(), FiniteDistribution::uniform_grid(3));
  EXPECT_EQ(g_uni.order, 1);
  const auto prod = degeneracy_order(product_kernel(), FiniteDistribution::uniform_grid(3));
  EXPECT_EQ(prod.order, 2);
  EXPECT_TRUE(prod.centered);
  EXPECT_LE(prod.residual[1], 1e-12);
  // h_2 = h for the centered product kernel.
  const auto p2 = project(product_kernel(), 2, FiniteDistribution::uniform_grid(3));
  const std::vector<HilbertPoint> a{s(1), s(-1)};
  EXPECT_EQ(p2.eval(a), product_kernel().eval(a));
}

TEST(DegeneracyOrder, ZeroKernelVanishesEverywhere) {
  const auto rep = degeneracy_order(zero_kernel(2), FiniteDistribution::uniform_grid(4));
  EXPECT_TRUE(rep.fully_vanishing);
  for (double r : rep.residual) EXPECT_EQ(r, 0.0);
}

TEST(DecompositionCheck, Examples) {
  const auto rad = FiniteDistribution::rademacher();
  const auto uni = FiniteDistribution::uniform_grid(3);
  const auto id = identity_kernel(HilbertSpace::real_line());
  const std::vector<HilbertPoint> x1{s(1), s(-1), s(-1), s(1)};
  EXPECT_LE(decomposition_check(id, rad, x1), 1e-15);
  const std::vector<HilbertPoint> x6{s(1), s(-1), s(-1), s(1), s(1), s(1)};
  EXPECT_LE(decomposition_check(gini_kernel(), rad, x6), 1e-10);
  const std::vector<HilbertPoint> x5{s(0), s(-1), s(1), s(1), s(0)};
  EXPECT_LE(decomposition_check(product_kernel(), uni, x5), 1e-10);
}

TEST(DecompositionCheck, HoldsPointwiseOffTheSupport) {
  const std::vector<HilbertPoint> x{s(0.5), s(1), s(-0.25), s(2)};
  EXPECT_LE(decomposition_check(gini_kernel(), FiniteDistribution::rademacher(), x), 1e-12);
}

TEST(HoeffdingProperty, DecompositionIdentity) {
  const KernelSpec kernels[] = {identity_kernel(HilbertSpace::real_line()), gini_kernel(),
                                triple_kernel()};
  testing::for_cases(31, 45, [&](testing::Gen& g, int c) {
    const KernelSpec& k = kernels[c % 3];
    const auto dist = g.finite_scalar(5);
    const auto n = static_cast<std::size_t>(g.int_in(k.arity(), 12));
    const auto x = g.atoms_sample(dist, n);
    const double scale = std::max(1.0, norm(complete(k, x)));
    EXPECT_LE(decomposition_check(k, dist, x) / scale, 1e-10) << "case " << c;
  });
}

TEST(HoeffdingProperty, ProjectionsAreDegenerate) {
  testing::for_cases(32, 12, [&](testing::Gen& g, int c) {
    const auto dist = g.finite_scalar(4);
    for (int k = 1; k <= 3; ++k) {
      const auto p = project(triple_kernel(), k, dist);
      EXPECT_LE(p.conditional_mean_defect(), 1e-12) << "case " << c << " k " << k;
    }
  });
}

TEST(HoeffdingProperty, ConstantConditionalMeanGivesZeroProjection) {
  // E[gini | x] = 1 for every x on rademacher, so h_1 vanishes.
  const auto rad = FiniteDistribution::rademacher();
  EXPECT_LE(degeneracy_order(gini_kernel(), rad).residual[1], 1e-15);
}

TEST(WeightedDecomposition, ScalarWeightsMatch) {
  testing::for_cases(33, 10, [&](testing::Gen& g, int c) {
    const auto dist = g.finite_scalar(4);
    const auto n = static_cast<std::size_t>(g.int_in(3, 7));
    const auto x = g.atoms_sample(dist, n);
    WeightScheme w = WeightScheme::scalar(0.0);
    IncEnumerator e(2, n);
    do w.set(e.current(), g.dyadic());
    while (e.next());
    EXPECT_LE(weighted_decomposition_check(gini_kernel(), dist, w, x), 1e-10) << "case " << c;
  });
}

TEST(McProjector, AgreesWithExactOnFiniteLaw) {
  const auto uni = SamplerSpec::uniform_grid(3);
  const McProjector mc(gini_kernel(), uni, 20'000, 5);
  const std::vector<HilbertPoint> a{s(0)};
  const McValue v = mc.eval(1, a);
  EXPECT_LE(std::abs(v.value.value() + 2.0 / 9.0), 4 * v.se + 1e-12);
}

TEST(McProjector, DetectsOrderForGaussianLaw) {
  const auto law = SamplerSpec::discretized_gaussian(1);
  EXPECT_EQ(degeneracy_order_mc(product_kernel(), law, 20, 10'000, 3).order, 2);
  EXPECT_EQ(degeneracy_order_mc(gini_kernel(), law, 20, 10'000, 3).order, 1);
}

}  // namespace
}  // namespace ustat
