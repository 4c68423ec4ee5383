#include "ustatlab/hilbert.hpp"

#include <cmath>
#include <string>

#include "ustatlab/error.hpp"

namespace ustat {

HilbertSpace::HilbertSpace(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidSpecError("hilbert space: dim must be >= 1");
  for (double w : weights_) {
    if (!std::isfinite(w) || w <= 0.0)
      throw InvalidSpecError("hilbert space: weights must be finite and > 0");
  }
}

SpacePtr HilbertSpace::euclidean(std::size_t dim) {
  return std::make_shared<const HilbertSpace>(std::vector<double>(dim, 1.0));
}

SpacePtr HilbertSpace::l2_grid(std::size_t dim) {
  if (dim == 0) throw InvalidSpecError("hilbert space: dim must be >= 1");
  return std::make_shared<const HilbertSpace>(
      std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
}

const SpacePtr& HilbertSpace::real_line() {
  static const SpacePtr line = euclidean(1);
  return line;
}

double HilbertSpace::inner(std::span<const double> a,
                           std::span<const double> b) const {
  if (a.size() != weights_.size() || b.size() != weights_.size())
    throw DimensionError("inner: coordinate length does not match space dim");
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * (a[i] * b[i]);
  return s;
}

double HilbertSpace::norm(std::span<const double> a) const {
  return std::sqrt(inner(a, a));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) noexcept {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

HilbertPoint::HilbertPoint(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw InvalidSpecError("hilbert point: null space");
  coords_.assign(space_->dim(), 0.0);
}

HilbertPoint::HilbertPoint(SpacePtr space, std::vector<double> coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
  if (!space_) throw InvalidSpecError("hilbert point: null space");
  if (coords_.size() != space_->dim())
    throw DimensionError("hilbert point: " + std::to_string(coords_.size()) +
                         " coordinates for a space of dim " +
                         std::to_string(space_->dim()));
  for (double c : coords_) {
    if (!std::isfinite(c)) throw InvalidSpecError("hilbert point: non-finite coordinate");
  }
}

HilbertPoint HilbertPoint::scalar(double value) {
  return HilbertPoint(HilbertSpace::real_line(), {value});
}

bool HilbertPoint::operator==(const HilbertPoint& other) const {
  return same_space(space_, other.space_) && coords_ == other.coords_;
}

void require_same_space(const HilbertPoint& a, const HilbertPoint& b) {
  if (!same_space(a.space(), b.space()))
    throw DimensionError("operands belong to different Hilbert spaces");
}

double inner(const HilbertPoint& a, const HilbertPoint& b) {
  require_same_space(a, b);
  return a.space()->inner(a.coords(), b.coords());
}

double norm(const HilbertPoint& a) { return a.space()->norm(a.coords()); }

HilbertPoint axpy(double alpha, const HilbertPoint& a, const HilbertPoint& b) {
  require_same_space(a, b);
  HilbertPoint out = b;
  auto dst = out.coords_mut();
  auto src = a.coords();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
  return out;
}

}  // namespace ustat
