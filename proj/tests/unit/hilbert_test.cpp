#include <gtest/gtest.h>

#include <cmath>

#include "property.hpp"
#include "ustatlab/error.hpp"
#include "ustatlab/hilbert.hpp"

namespace ustat {
namespace {

TEST(Hilbert, InnerExamples) {
  const auto r2 = HilbertSpace::euclidean(2);
  EXPECT_EQ(inner(HilbertPoint(r2, {1, 0}), HilbertPoint(r2, {0, 1})), 0.0);
  EXPECT_EQ(inner(HilbertPoint(r2, {3, 4}), HilbertPoint(r2, {3, 4})), 25.0);
  const auto l2 = HilbertSpace::l2_grid(2);
  EXPECT_EQ(inner(HilbertPoint(l2, {1, 1}), HilbertPoint(l2, {1, 1})), 1.0);
}

TEST(Hilbert, NormExamples) {
  EXPECT_EQ(norm(HilbertPoint(HilbertSpace::euclidean(5))), 0.0);
  EXPECT_EQ(norm(HilbertPoint(HilbertSpace::euclidean(2), {3, 4})), 5.0);
  EXPECT_EQ(norm(HilbertPoint(HilbertSpace::l2_grid(4), {1, 1, 1, 1})), 1.0);
}

TEST(Hilbert, AxpyExamples) {
  const auto r2 = HilbertSpace::euclidean(2);
  const HilbertPoint a(r2, {1, 2}), b(r2, {3, 4});
  EXPECT_EQ(axpy(0.0, a, b), b);
  EXPECT_EQ(axpy(1.0, a, b), HilbertPoint(r2, {4, 6}));
  EXPECT_EQ(norm(axpy(-1.0, a, a)), 0.0);
}

TEST(Hilbert, RejectsMixedSpaces) {
  const HilbertPoint a(HilbertSpace::euclidean(2), {1, 2});
  const HilbertPoint b(HilbertSpace::l2_grid(2), {1, 2});
  const HilbertPoint c(HilbertSpace::euclidean(3), {1, 2, 3});
  EXPECT_THROW(inner(a, b), DimensionError);
  EXPECT_THROW(axpy(1.0, a, c), DimensionError);
  EXPECT_THROW(HilbertPoint(HilbertSpace::euclidean(2), {1.0}), DimensionError);
  EXPECT_THROW(HilbertPoint(HilbertSpace::euclidean(1), {NAN}), InvalidSpecError);
  EXPECT_THROW(HilbertSpace({1.0, 0.0}), InvalidSpecError);
}

TEST(HilbertProperty, CauchySchwarzSymmetryAndCancellation) {
  testing::for_cases(11, 200, [](testing::Gen& g, int c) {
    const std::size_t dim = static_cast<std::size_t>(g.int_in(1, 6));
    std::vector<double> w(dim);
    for (auto& v : w) v = g.real_in(0.1, 2.0);
    const auto space = std::make_shared<const HilbertSpace>(w);
    const HilbertPoint a = g.point(space), b = g.point(space);
    SCOPED_TRACE("case " + std::to_string(c));
    EXPECT_LE(std::abs(inner(a, b)), norm(a) * norm(b) * (1.0 + 1e-12));
    EXPECT_EQ(inner(a, b), inner(b, a));
    EXPECT_LE(norm(axpy(-1.0, a, a)), 1e-14);
  });
}

}  // namespace
}  // namespace ustat
