#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "twl/error.hpp"
#include "twl/estimation.hpp"
#include "twl/subset.hpp"

namespace twl {

// Value oracle for a set function over `ground`. Counts every evaluation;
// copies share the counter.
class SetFunctionOracle {
 public:
  using Eval = std::function<double(Subset)>;

  SetFunctionOracle(Subset ground, Eval eval)
      : ground_(ground), eval_(std::move(eval)), calls_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

  Subset ground() const { return ground_; }

  double operator()(Subset a) const {
    calls_->fetch_add(1, std::memory_order_relaxed);
    return eval_(a);
  }

  std::uint64_t calls() const { return calls_->load(std::memory_order_relaxed); }
  void reset_calls() const { calls_->store(0, std::memory_order_relaxed); }

 private:
  Subset ground_;
  Eval eval_;
  std::shared_ptr<std::atomic<std::uint64_t>> calls_;
};

struct PendantPair {
  int t = -1;
  int u = -1;
};

struct MinCutResult {
  Subset set;
  double value = 0.0;
};

namespace detail {

struct GroupPair {
  std::size_t t = 0;
  std::size_t u = 0;
};

// Maximum-adjacency style ordering over contracted groups: start from the
// first group, then repeatedly append the group u minimizing
// f(W + u) - f(u). Returns the last two groups in that order. `single` holds
// f of every group and is filled here. Ties go to the earlier group.
template <class Fn>
GroupPair pendant_pair_groups(Fn& f, const std::vector<Subset>& groups, std::vector<double>& single) {
  const std::size_t m = groups.size();
  single.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) single[i] = f(groups[i]);

  std::vector<char> placed(m, 0);
  std::vector<std::size_t> order;
  order.reserve(m);
  order.push_back(0);
  placed[0] = 1;
  Subset w = groups[0];
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t best = m;
    if (step == m - 1) {
      // one group left: the choice is forced
      for (std::size_t u = 0; u < m; ++u)
        if (!placed[u]) best = u;
    } else {
      double best_key = std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < m; ++u) {
        if (placed[u]) continue;
        const double key = f(w | groups[u]) - single[u];
        if (best == m || key < best_key) {
          best = u;
          best_key = key;
        }
      }
    }
    placed[best] = 1;
    order.push_back(best);
    w |= groups[best];
  }
  return {order[m - 2], order[m - 1]};
}

inline std::vector<Subset> singleton_groups(Subset ground) {
  std::vector<Subset> groups;
  for (int e : ground) groups.push_back(Subset::from_mask(Subset::mask_type{1} << e));
  return groups;
}

}  // namespace detail

// Pendant pair (t, u) of f over `ground`: for symmetric submodular f,
// f({u}) <= f(U) for every U containing u but not t.
template <class Fn>
PendantPair pendant_pair(Fn&& f, Subset ground) {
  if (ground.size() < 2) throw Error(ErrorCode::GroundTooSmall, "pendant pair needs at least two elements");
  const auto groups = detail::singleton_groups(ground);
  std::vector<double> single;
  const auto gp = detail::pendant_pair_groups(f, groups, single);
  return {groups[gp.t].lowest(), groups[gp.u].lowest()};
}

// Queyranne's minimization of a symmetric submodular function: find a pendant
// pair, record the group of u as a candidate, merge u into t, repeat. Returns
// the first best candidate, a nonempty proper subset of `ground`. Uses at most
// |ground|^3 evaluations of f.
template <class Fn>
MinCutResult queyranne_minimize(Fn&& f, Subset ground) {
  if (ground.size() < 2) throw Error(ErrorCode::GroundTooSmall, "minimization needs at least two elements");
  auto groups = detail::singleton_groups(ground);
  std::vector<double> single;
  MinCutResult best{Subset{}, std::numeric_limits<double>::infinity()};
  while (groups.size() >= 2) {
    const auto gp = detail::pendant_pair_groups(f, groups, single);
    if (best.set.empty() || single[gp.u] < best.value) best = {groups[gp.u], single[gp.u]};
    groups[gp.t] |= groups[gp.u];
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(gp.u));
  }
  return best;
}

namespace detail {

// Ordering used to break ties in brute force: fewer elements first, then
// lexicographic on the id lists.
inline bool smaller_then_lex(Subset a, Subset b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return lex_less(a, b);
}

}  // namespace detail

// Exhaustive minimum over every nonempty proper subset of `ground`.
template <class Fn>
MinCutResult brute_force_minimize(Fn&& f, Subset ground) {
  if (ground.size() < 2) throw Error(ErrorCode::GroundTooSmall, "minimization needs at least two elements");
  if (ground.size() > 20) throw Error(ErrorCode::GroundTooLarge, "brute force is limited to 20 elements");
  MinCutResult best{Subset{}, std::numeric_limits<double>::infinity()};
  for_each_subset(ground, [&](Subset a) {
    if (a.empty() || a == ground) return;
    const double value = f(a);
    if (best.set.empty() || value < best.value ||
        (value == best.value && detail::smaller_then_lex(a, best.set))) {
      best = {a, value};
    }
  });
  return best;
}

// F(A) = I(A; G \ A | s) over the ground G = v \ s, evaluated through an
// entropy oracle. F(A) and F(G \ A) take the same arithmetic path, so the
// function is exactly symmetric.
inline SetFunctionOracle info_cut_oracle(const EntropyOracle& h, Subset v, Subset s) {
  require_within(v | s, h.n(), "info-cut variables");
  if (!s.is_subset_of(v)) throw Error(ErrorCode::InvalidSubset, "conditioning set must lie inside v");
  const Subset ground = v - s;
  if (ground.size() < 2) throw Error(ErrorCode::InvalidSubset, "info-cut ground needs at least two variables");
  const double h_s = h(s);
  const double h_all = h(v);
  return SetFunctionOracle(ground, [h, ground, s, h_s, h_all](Subset a) {
    a &= ground;
    const Subset rest = ground - a;
    if (a.empty() || rest.empty()) return 0.0;
    const double value = (h(a | s) + h(rest | s)) - h_all - h_s;
    return value < 0.0 ? 0.0 : value;
  });
}

}  // namespace twl
