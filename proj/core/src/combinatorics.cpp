#include "ustatlab/combinatorics.hpp"

#include <algorithm>
#include <limits>

#include "ustatlab/error.hpp"

namespace ustat {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  __uint128_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // exact: r * (n-k+i) is divisible by i
    if (r > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

IndexTuple::IndexTuple(std::initializer_list<std::uint32_t> indices)
    : IndexTuple(std::span<const std::uint32_t>(indices.begin(), indices.size())) {}

IndexTuple::IndexTuple(std::span<const std::uint32_t> indices) {
  if (indices.size() > static_cast<std::size_t>(kMaxArity))
    throw InvalidSpecError("index tuple: arity above " + std::to_string(kMaxArity));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 1) throw InvalidSpecError("index tuple: indices are 1-based");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw InvalidSpecError("index tuple: indices must be strictly increasing");
    idx_[i] = indices[i];
  }
  size_ = static_cast<std::uint8_t>(indices.size());
}

bool IndexTuple::contains(std::uint32_t i) const noexcept {
  return std::binary_search(idx_.begin(), idx_.begin() + size_, i);
}

void IndexTuple::check_within(std::uint64_t n) const {
  if (size_ > 0 && last() > n)
    throw InvalidSpecError("index tuple " + to_string() + " exceeds n = " + std::to_string(n));
}

std::string IndexTuple::to_string() const {
  std::string s = "(";
  for (int i = 0; i < size_; ++i) {
    if (i > 0) s += ",";
    s += std::to_string(idx_[i]);
  }
  return s + ")";
}

std::strong_ordering operator<=>(const IndexTuple& a, const IndexTuple& b) noexcept {
  const int common = std::min(a.size_, b.size_);
  for (int i = 0; i < common; ++i) {
    if (a.idx_[i] != b.idx_[i]) return a.idx_[i] <=> b.idx_[i];
  }
  return a.size_ <=> b.size_;
}

IncEnumerator::IncEnumerator(int m, std::uint64_t n, std::uint64_t cap) : n_(n) {
  if (m < 0 || m > kMaxArity)
    throw InvalidSpecError("enumerate_inc: arity must lie in [0, " + std::to_string(kMaxArity) + "]");
  if (static_cast<std::uint64_t>(m) > n)
    throw InvalidSpecError("enumerate_inc: need n >= m (m = " + std::to_string(m) +
                           ", n = " + std::to_string(n) + ")");
  if (n > std::numeric_limits<std::uint32_t>::max())
    throw InvalidSpecError("enumerate_inc: n too large");
  count_ = binomial(n, static_cast<std::uint64_t>(m));
  if (count_ > cap)
    throw BudgetError("enumerate_inc: C(" + std::to_string(n) + "," + std::to_string(m) +
                      ") = " + std::to_string(count_) + " tuples exceed the cap of " +
                      std::to_string(cap));
  cur_.size_ = static_cast<std::uint8_t>(m);
  for (int i = 0; i < m; ++i) cur_.idx_[i] = static_cast<std::uint32_t>(i + 1);
}

bool IncEnumerator::next() noexcept {
  const int m = cur_.size_;
  // Rightmost position that can still move: idx[i] < n - (m - 1 - i).
  for (int i = m - 1; i >= 0; --i) {
    const std::uint64_t limit = n_ - static_cast<std::uint64_t>(m - 1 - i);
    if (cur_.idx_[i] < limit) {
      ++cur_.idx_[i];
      for (int j = i + 1; j < m; ++j) cur_.idx_[j] = cur_.idx_[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::uint64_t rank_tuple(const IndexTuple& t, std::uint64_t n) {
  t.check_within(n);
  const int m = t.size();
  std::uint64_t rank = 0;
  std::uint64_t prev = 0;
  for (int p = 0; p < m; ++p) {
    // Tuples with the same prefix but a smaller value at position p.
    for (std::uint64_t v = prev + 1; v < t[p]; ++v)
      rank += binomial(n - v, static_cast<std::uint64_t>(m - 1 - p));
    prev = t[p];
  }
  return rank;
}

IndexTuple unrank_tuple(std::uint64_t rank, int m, std::uint64_t n) {
  if (rank >= binomial(n, static_cast<std::uint64_t>(m)))
    throw InvalidSpecError("unrank_tuple: rank out of range");
  std::array<std::uint32_t, kMaxArity> idx{};
  std::uint64_t v = 1;
  for (int p = 0; p < m; ++p) {
    while (true) {
      const std::uint64_t block = binomial(n - v, static_cast<std::uint64_t>(m - 1 - p));
      if (rank < block) break;
      rank -= block;
      ++v;
    }
    idx[p] = static_cast<std::uint32_t>(v);
    ++v;
  }
  return IndexTuple(std::span<const std::uint32_t>(idx.data(), static_cast<std::size_t>(m)));
}

}  // namespace ustat
