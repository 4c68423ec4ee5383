#pragma once

// Strictly increasing index tuples 1 <= i_1 < ... < i_m <= n and their
// lexicographic enumeration.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>

namespace ustat {

inline constexpr int kMaxArity = 8;
/// Default cap on the number of tuples an estimator may enumerate.
inline constexpr std::uint64_t kTupleCap = 100'000'000;

/// C(n, k); saturates at UINT64_MAX on overflow, 0 when k > n.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

/// 1-based, strictly increasing indices. m = 0 is the empty tuple.
class IndexTuple {
 public:
  IndexTuple() = default;
  /// Throws InvalidSpecError unless strictly increasing and >= 1.
  IndexTuple(std::initializer_list<std::uint32_t> indices);
  explicit IndexTuple(std::span<const std::uint32_t> indices);

  int size() const noexcept { return size_; }
  std::uint32_t operator[](int pos) const noexcept { return idx_[pos]; }
  /// Largest index (i_m); 0 for the empty tuple.
  std::uint32_t last() const noexcept { return size_ == 0 ? 0 : idx_[size_ - 1]; }
  std::span<const std::uint32_t> indices() const noexcept { return {idx_.data(), static_cast<std::size_t>(size_)}; }

  bool contains(std::uint32_t i) const noexcept;
  /// Throws InvalidSpecError when some index exceeds n.
  void check_within(std::uint64_t n) const;

  std::string to_string() const;

  friend bool operator==(const IndexTuple& a, const IndexTuple& b) noexcept {
    return a.indices().size() == b.indices().size() &&
           std::equal(a.idx_.begin(), a.idx_.begin() + a.size_, b.idx_.begin());
  }
  friend std::strong_ordering operator<=>(const IndexTuple& a, const IndexTuple& b) noexcept;

 private:
  friend class IncEnumerator;
  std::array<std::uint32_t, kMaxArity> idx_{};
  std::uint8_t size_ = 0;
};

/// Streams Inc^m_n in lexicographic order with O(m) state.
///
///   IncEnumerator e(2, 3);
///   do { use(e.current()); } while (e.next());
///
/// m = 0 yields the single empty tuple. Throws BudgetError when C(n, m)
/// exceeds `cap` and InvalidSpecError when m > n or m > kMaxArity.
class IncEnumerator {
 public:
  IncEnumerator(int m, std::uint64_t n, std::uint64_t cap = kTupleCap);

  const IndexTuple& current() const noexcept { return cur_; }
  /// Advances; false once the last tuple has been visited.
  bool next() noexcept;
  std::uint64_t count() const noexcept { return count_; }

 private:
  IndexTuple cur_;
  std::uint64_t n_;
  std::uint64_t count_;
};

/// Lexicographic rank of a tuple in Inc^m_n (0-based).
std::uint64_t rank_tuple(const IndexTuple& t, std::uint64_t n);
/// Inverse of rank_tuple.
IndexTuple unrank_tuple(std::uint64_t rank, int m, std::uint64_t n);

}  // namespace ustat
