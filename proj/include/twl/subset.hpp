#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "twl/error.hpp"

namespace twl {

// A set of element ids in [0, 32), stored as a bitmask. Iteration and
// ids() yield strictly increasing ids.
class Subset {
 public:
  using mask_type = std::uint32_t;
  static constexpr int kMaxElements = 32;

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = int;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = int;

    constexpr iterator() = default;
    constexpr explicit iterator(mask_type rest) : rest_(rest) {}
    constexpr int operator*() const { return std::countr_zero(rest_); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    constexpr bool operator==(const iterator&) const = default;

   private:
    mask_type rest_ = 0;
  };

  constexpr Subset() = default;

  static constexpr Subset from_mask(mask_type mask) {
    Subset s;
    s.mask_ = mask;
    return s;
  }

  static Subset from_ids(std::span<const int> ids) {
    Subset s;
    for (int id : ids) {
      if (id < 0 || id >= kMaxElements) {
        throw Error(ErrorCode::InvalidSubset, "element id " + std::to_string(id) + " out of range");
      }
      s.mask_ |= mask_type{1} << id;
    }
    return s;
  }

  static Subset of(std::initializer_list<int> ids) {
    return from_ids(std::span<const int>(ids.begin(), ids.size()));
  }

  // {0, 1, ..., n-1}
  static constexpr Subset range(int n) {
    return from_mask(n >= kMaxElements ? ~mask_type{0} : ((mask_type{1} << n) - 1));
  }

  constexpr mask_type mask() const { return mask_; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool contains(int id) const { return id >= 0 && id < kMaxElements && ((mask_ >> id) & 1u); }
  constexpr bool is_subset_of(Subset other) const { return (mask_ & ~other.mask_) == 0; }
  constexpr bool intersects(Subset other) const { return (mask_ & other.mask_) != 0; }
  // Lowest id; undefined on the empty set.
  constexpr int lowest() const { return std::countr_zero(mask_); }
  constexpr int highest() const { return kMaxElements - 1 - std::countl_zero(mask_); }

  constexpr Subset with(int id) const { return from_mask(mask_ | (mask_type{1} << id)); }
  constexpr Subset without(int id) const { return from_mask(mask_ & ~(mask_type{1} << id)); }

  std::vector<int> ids() const { return {begin(), end()}; }

  constexpr iterator begin() const { return iterator(mask_); }
  constexpr iterator end() const { return iterator(0); }

  friend constexpr Subset operator|(Subset a, Subset b) { return from_mask(a.mask_ | b.mask_); }
  friend constexpr Subset operator&(Subset a, Subset b) { return from_mask(a.mask_ & b.mask_); }
  // Set difference.
  friend constexpr Subset operator-(Subset a, Subset b) { return from_mask(a.mask_ & ~b.mask_); }
  constexpr Subset& operator|=(Subset b) { mask_ |= b.mask_; return *this; }
  constexpr Subset& operator&=(Subset b) { mask_ &= b.mask_; return *this; }
  constexpr Subset& operator-=(Subset b) { mask_ &= ~b.mask_; return *this; }

  friend constexpr bool operator==(Subset a, Subset b) = default;

 private:
  mask_type mask_ = 0;
};

// Lexicographic order on the increasing id lists: {} < {0} < {0,1} < {0,2} < {1}.
inline bool lex_less(Subset a, Subset b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (*ia != *ib) return *ia < *ib;
  }
  return ia == a.end() && ib != b.end();
}

struct LexLess {
  bool operator()(Subset a, Subset b) const { return lex_less(a, b); }
};

struct SubsetHash {
  std::size_t operator()(Subset s) const noexcept { return std::hash<Subset::mask_type>{}(s.mask()); }
};

// Throws InvalidSubset unless every id of s is below n.
inline void require_within(Subset s, int n, const char* what = "subset") {
  if (n < Subset::kMaxElements && (s.mask() >> n) != 0) {
    throw Error(ErrorCode::InvalidSubset, std::string(what) + " has an id >= " + std::to_string(n));
  }
}

// Calls fn on every subset of s, the empty set and s included, in
// increasing mask order.
template <class Fn>
void for_each_subset(Subset s, Fn&& fn) {
  const Subset::mask_type full = s.mask();
  Subset::mask_type sub = 0;
  while (true) {
    fn(Subset::from_mask(sub));
    if (sub == full) break;
    sub = (sub - full) & full;
  }
}

inline std::string to_string(Subset s) {
  std::string out = "{";
  bool first = true;
  for (int id : s) {
    if (!first) out += ',';
    out += std::to_string(id);
    first = false;
  }
  out += '}';
  return out;
}

inline std::ostream& operator<<(std::ostream& os, Subset s) { return os << to_string(s); }

}  // namespace twl
