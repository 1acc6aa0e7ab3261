#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "twl/error.hpp"
#include "twl/subset.hpp"

namespace twl {

// Explicit tables are capped at 2^24 cells.
inline constexpr std::size_t kMaxCells = std::size_t{1} << 24;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kInfoClamp = 1e-9;

// Variables 0..n-1 with their cardinalities.
class VarSet {
 public:
  VarSet() = default;

  explicit VarSet(std::vector<int> cards) : cards_(std::move(cards)) {
    if (cards_.empty()) throw Error(ErrorCode::InvalidSpec, "a variable set needs at least one variable");
    if (cards_.size() > static_cast<std::size_t>(Subset::kMaxElements)) {
      throw Error(ErrorCode::TooLarge, "at most 32 variables are supported");
    }
    for (int c : cards_) {
      if (c < 2) throw Error(ErrorCode::InvalidSpec, "every cardinality must be >= 2");
    }
  }

  static VarSet binary(int n) { return VarSet(std::vector<int>(static_cast<std::size_t>(n), 2)); }

  int n() const { return static_cast<int>(cards_.size()); }
  int card(int v) const { return cards_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& cards() const { return cards_; }
  Subset all() const { return Subset::range(n()); }
  int max_card() const { return cards_.empty() ? 0 : *std::max_element(cards_.begin(), cards_.end()); }

  // Product of cardinalities over a, saturating at kMaxCells + 1.
  std::size_t cells(Subset a) const {
    std::size_t total = 1;
    for (int v : a) {
      total *= static_cast<std::size_t>(card(v));
      if (total > kMaxCells) return kMaxCells + 1;
    }
    return total;
  }
  std::size_t cells() const { return cells(all()); }

  // The variables of a renumbered 0..|a|-1 in increasing id order.
  VarSet restrict_to(Subset a) const {
    std::vector<int> sub;
    for (int v : a) sub.push_back(card(v));
    return VarSet(std::move(sub));
  }

  friend bool operator==(const VarSet&, const VarSet&) = default;

 private:
  std::vector<int> cards_;
};

// Dense joint probability table, row-major with the last variable fastest.
class JointTable {
 public:
  JointTable() = default;

  JointTable(VarSet vars, std::vector<double> probs) : vars_(std::move(vars)), probs_(std::move(probs)) {
    const std::size_t expected = vars_.cells();
    if (expected > kMaxCells) {
      throw Error(ErrorCode::TableTooLarge, "table would exceed 2^24 cells");
    }
    if (probs_.size() != expected) {
      throw Error(ErrorCode::SizeMismatch, "expected " + std::to_string(expected) + " cells, got " +
                                               std::to_string(probs_.size()));
    }
  }

  const VarSet& vars() const { return vars_; }
  int n() const { return vars_.n(); }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t cell) const { return probs_[cell]; }

  // Row-major strides, last variable stride 1.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(n()), 1);
    for (int v = n() - 2; v >= 0; --v) {
      s[static_cast<std::size_t>(v)] = s[static_cast<std::size_t>(v) + 1] * static_cast<std::size_t>(vars_.card(v + 1));
    }
    return s;
  }

  std::vector<int> decode(std::size_t cell) const {
    std::vector<int> digits(static_cast<std::size_t>(n()));
    for (int v = n() - 1; v >= 0; --v) {
      const auto c = static_cast<std::size_t>(vars_.card(v));
      digits[static_cast<std::size_t>(v)] = static_cast<int>(cell % c);
      cell /= c;
    }
    return digits;
  }

  std::size_t encode(const std::vector<int>& digits) const {
    std::size_t cell = 0;
    for (int v = 0; v < n(); ++v) {
      cell = cell * static_cast<std::size_t>(vars_.card(v)) + static_cast<std::size_t>(digits[static_cast<std::size_t>(v)]);
    }
    return cell;
  }

 private:
  VarSet vars_;
  std::vector<double> probs_;
};

inline void validate(const JointTable& t) {
  if (t.probs().size() != t.vars().cells()) throw Error(ErrorCode::SizeMismatch, "cell count does not match cardinalities");
  double sum = 0.0;
  for (double p : t.probs()) {
    if (!(p >= 0.0)) throw Error(ErrorCode::NegativeProbability, "entry " + std::to_string(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::NotNormalized, "entries sum to " + std::to_string(sum));
  }
}

namespace detail {

// Index of every cell of `vars` in the marginal table over `a`.
inline std::vector<std::uint32_t> marginal_index_map(const VarSet& vars, Subset a) {
  const int n = vars.n();
  std::vector<std::size_t> target_stride(static_cast<std::size_t>(n), 0);
  std::size_t stride = 1;
  for (int v = n - 1; v >= 0; --v) {
    if (a.contains(v)) {
      target_stride[static_cast<std::size_t>(v)] = stride;
      stride *= static_cast<std::size_t>(vars.card(v));
    }
  }
  const std::size_t cells = vars.cells();
  std::vector<std::uint32_t> map(cells);
  std::vector<int> digit(static_cast<std::size_t>(n), 0);
  std::size_t target = 0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    map[cell] = static_cast<std::uint32_t>(target);
    // odometer increment, last variable fastest
    for (int v = n - 1; v >= 0; --v) {
      auto& d = digit[static_cast<std::size_t>(v)];
      const auto sv = static_cast<std::size_t>(v);
      if (++d < vars.card(v)) {
        target += target_stride[sv];
        break;
      }
      target -= target_stride[sv] * static_cast<std::size_t>(d - 1);
      d = 0;
    }
  }
  return map;
}

inline double entropy_of(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

}  // namespace detail

inline JointTable marginalize(const JointTable& t, Subset a) {
  require_within(a, t.n());
  if (a == t.vars().all()) return t;
  if (a.empty()) throw Error(ErrorCode::InvalidSubset, "cannot marginalize onto no variables");
  const auto map = detail::marginal_index_map(t.vars(), a);
  VarSet sub = t.vars().restrict_to(a);
  std::vector<double> out(sub.cells(), 0.0);
  for (std::size_t cell = 0; cell < t.size(); ++cell) out[map[cell]] += t[cell];
  return JointTable(std::move(sub), std::move(out));
}

// Shannon entropy of the marginal on a, in bits. H(empty) = 0.
inline double entropy(const JointTable& t, Subset a) {
  require_within(a, t.n());
  if (a.empty()) return 0.0;
  if (a == t.vars().all()) return detail::entropy_of(t.probs());
  return detail::entropy_of(marginalize(t, a).probs());
}

namespace detail {

inline void require_disjoint(Subset a, Subset b, Subset s) {
  if (a.intersects(b) || a.intersects(s) || b.intersects(s)) {
    throw Error(ErrorCode::OverlappingSets, "sets " + to_string(a) + ", " + to_string(b) + ", " + to_string(s) +
                                                " must be pairwise disjoint");
  }
}

// I(A;B|S) from four entropies, clamped at 0. Both argument orders take the
// same arithmetic path.
template <class EntropyFn>
double cmi_from_entropies(EntropyFn&& h, Subset a, Subset b, Subset s) {
  if (a.empty() || b.empty()) return 0.0;
  const double value = (h(a | s) + h(b | s)) - h(a | b | s) - h(s);
  return value < 0.0 ? 0.0 : value;
}

}  // namespace detail

inline double cond_mutual_info(const JointTable& t, Subset a, Subset b, Subset s) {
  require_within(a | b | s, t.n());
  detail::require_disjoint(a, b, s);
  return detail::cmi_from_entropies([&](Subset x) { return entropy(t, x); }, a, b, s);
}

// D(p || q) in bits; +inf when p puts mass where q has none.
inline double kl_divergence(const JointTable& p, const JointTable& q) {
  if (!(p.vars() == q.vars()) || p.size() != q.size()) {
    throw Error(ErrorCode::ShapeMismatch, "KL divergence needs tables over the same variables");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;
    const double qi = q[i];
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    d += pi * std::log2(pi / qi);
  }
  return d < 0.0 ? 0.0 : d;
}

}  // namespace twl
