#pragma once

// Small random-case generators for property tests. Each case is seeded from
// (suite seed, case index) so a failure names a reproducible case.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ustatlab/distributions.hpp"
#include "ustatlab/hilbert.hpp"
#include "ustatlab/rng.hpp"

namespace ustat::testing {

class Gen {
 public:
  Gen(std::uint64_t seed, std::uint64_t index) : rng_(seed, index, 7) {}

  int int_in(int lo, int hi) {
    return lo + static_cast<int>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double real_in(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  /// Small integers divided by 4: exact in binary, so identities can be
  /// checked without rounding noise in the inputs.
  double dyadic(int range = 8) { return int_in(-range, range) / 4.0; }

  HilbertPoint point(const SpacePtr& space) {
    std::vector<double> c(space->dim());
    for (auto& v : c) v = real_in(-2.0, 2.0);
    return {space, std::move(c)};
  }

  std::vector<HilbertPoint> points(const SpacePtr& space, std::size_t n) {
    std::vector<HilbertPoint> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(point(space));
    return out;
  }

  /// Finite law on distinct scalar atoms with random positive weights.
  FiniteDistribution finite_scalar(int max_atoms = 5) {
    const int k = int_in(1, max_atoms);
    std::vector<HilbertPoint> atoms;
    std::vector<double> probs;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      atoms.push_back(HilbertPoint::scalar(i - k / 2 + dyadic(1) / 8.0));
      probs.push_back(real_in(0.2, 1.0));
      total += probs.back();
    }
    for (auto& p : probs) p /= total;
    return {std::move(atoms), std::move(probs)};
  }

  /// Sample of atoms drawn uniformly from the law's support.
  std::vector<HilbertPoint> atoms_sample(const FiniteDistribution& d, std::size_t n) {
    std::vector<HilbertPoint> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(d.atoms()[rng_.below(d.size())]);
    return out;
  }

  CounterRng& rng() { return rng_; }

 private:
  CounterRng rng_;
};

/// Runs `body` on `cases` generated cases; the body reports failures through
/// gtest assertions, scoped with the case index.
inline void for_cases(std::uint64_t seed, int cases, const std::function<void(Gen&, int)>& body) {
  for (int c = 0; c < cases; ++c) {
    Gen g(seed, static_cast<std::uint64_t>(c));
    body(g, c);
  }
}

}  // namespace ustat::testing
