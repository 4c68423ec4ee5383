#pragma once

// Finite-dimensional model of a separable Hilbert space: coordinates with
// quadrature weights, <a,b> = sum_i w_i a_i b_i. R^d uses unit weights and a
// uniform grid on [0,1] (discretized L^2) uses weights 1/dim.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ustat {

class HilbertSpace {
 public:
  /// Throws InvalidSpecError unless weights is non-empty, finite and > 0.
  explicit HilbertSpace(std::vector<double> weights);

  static std::shared_ptr<const HilbertSpace> euclidean(std::size_t dim);
  static std::shared_ptr<const HilbertSpace> l2_grid(std::size_t dim);
  /// Shared one-dimensional space R.
  static const std::shared_ptr<const HilbertSpace>& real_line();

  std::size_t dim() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }

  bool operator==(const HilbertSpace& other) const noexcept {
    return weights_ == other.weights_;
  }

  /// Weighted inner product on raw coordinate spans; fixed left-to-right
  /// summation order.
  double inner(std::span<const double> a, std::span<const double> b) const;
  double norm(std::span<const double> a) const;

 private:
  std::vector<double> weights_;
};

using SpacePtr = std::shared_ptr<const HilbertSpace>;

bool same_space(const SpacePtr& a, const SpacePtr& b) noexcept;

class HilbertPoint {
 public:
  /// Zero vector of the given space.
  explicit HilbertPoint(SpacePtr space);
  /// Throws DimensionError on length mismatch, InvalidSpecError on
  /// non-finite entries.
  HilbertPoint(SpacePtr space, std::vector<double> coords);

  /// Point of the real line.
  static HilbertPoint scalar(double value);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> coords_mut() noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  /// coords()[0]; convenience for scalar-valued kernels.
  double value() const { return coords_.front(); }

  bool operator==(const HilbertPoint& other) const;

 private:
  SpacePtr space_;
  std::vector<double> coords_;
};

double inner(const HilbertPoint& a, const HilbertPoint& b);
double norm(const HilbertPoint& a);
/// alpha * a + b.
HilbertPoint axpy(double alpha, const HilbertPoint& a, const HilbertPoint& b);

/// Throws DimensionError when the two points do not share a space.
void require_same_space(const HilbertPoint& a, const HilbertPoint& b);

}  // namespace ustat
