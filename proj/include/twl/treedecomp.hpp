#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "twl/error.hpp"
#include "twl/partitions.hpp"
#include "twl/subset.hpp"

namespace twl {

struct TreeDecomposition {
  std::vector<Subset> bags;
  std::vector<std::pair<int, int>> edges;

  // Largest bag size minus one; -1 for no bags.
  int width() const {
    int w = -1;
    for (Subset b : bags) w = std::max(w, b.size() - 1);
    return w;
  }

  Subset vertices() const {
    Subset all;
    for (Subset b : bags) all |= b;
    return all;
  }

  friend bool operator==(const TreeDecomposition&, const TreeDecomposition&) = default;
};

namespace detail {

inline std::vector<std::vector<int>> tree_adjacency(const TreeDecomposition& td) {
  std::vector<std::vector<int>> adj(td.bags.size());
  for (auto [a, b] : td.edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

// Bags reachable from `start` without crossing the edge {start, blocked}.
inline std::vector<int> component_without_edge(const std::vector<std::vector<int>>& adj, int start, int blocked) {
  std::vector<int> seen{start};
  std::vector<char> mark(adj.size(), 0);
  mark[static_cast<std::size_t>(start)] = 1;
  for (std::size_t head = 0; head < seen.size(); ++head) {
    const int cur = seen[head];
    for (int nb : adj[static_cast<std::size_t>(cur)]) {
      if (mark[static_cast<std::size_t>(nb)]) continue;
      if (cur == start && nb == blocked) continue;
      mark[static_cast<std::size_t>(nb)] = 1;
      seen.push_back(nb);
    }
  }
  return seen;
}

}  // namespace detail

// Throws NotATree, CoverageGap, RunningIntersectionViolation or InvalidTD.
inline void validate_td(const TreeDecomposition& td, Subset vars) {
  const int nb = static_cast<int>(td.bags.size());
  if (nb == 0) throw Error(ErrorCode::NotATree, "no bags");
  if (static_cast<int>(td.edges.size()) != nb - 1) {
    throw Error(ErrorCode::NotATree, std::to_string(td.edges.size()) + " edges for " + std::to_string(nb) + " bags");
  }
  for (auto [a, b] : td.edges) {
    if (a < 0 || b < 0 || a >= nb || b >= nb || a == b) {
      throw Error(ErrorCode::NotATree, "bad edge " + std::to_string(a) + "-" + std::to_string(b));
    }
  }
  const auto adj = detail::tree_adjacency(td);
  if (static_cast<int>(detail::component_without_edge(adj, 0, -1).size()) != nb) {
    throw Error(ErrorCode::NotATree, "bag graph is disconnected");
  }
  const Subset covered = td.vertices();
  if (!covered.is_subset_of(vars)) {
    throw Error(ErrorCode::InvalidTD, "bags mention vertices outside " + to_string(vars));
  }
  if (covered != vars) throw Error(ErrorCode::CoverageGap, "vertices " + to_string(vars - covered) + " are in no bag");
  // In a tree, the bags holding v induce a subtree iff they span
  // (count - 1) tree edges.
  for (int v : vars) {
    int count = 0;
    int inside = 0;
    for (Subset b : td.bags) count += b.contains(v);
    for (auto [a, b] : td.edges) {
      inside += td.bags[static_cast<std::size_t>(a)].contains(v) && td.bags[static_cast<std::size_t>(b)].contains(v);
    }
    if (inside != count - 1) {
      throw Error(ErrorCode::RunningIntersectionViolation, "bags holding " + std::to_string(v) + " are not connected");
    }
  }
}

inline bool is_valid_td(const TreeDecomposition& td, Subset vars) {
  try {
    validate_td(td, vars);
    return true;
  } catch (const Error&) {
    return false;
  }
}

struct EdgeSeparator {
  std::pair<int, int> edge;
  Subset sep;
  Subset side_a;  // on the first endpoint's side
  Subset side_b;
};

inline std::vector<EdgeSeparator> edge_separators(const TreeDecomposition& td) {
  if (!is_valid_td(td, td.vertices())) throw Error(ErrorCode::InvalidTD, "not a valid tree decomposition");
  const auto adj = detail::tree_adjacency(td);
  std::vector<EdgeSeparator> out;
  out.reserve(td.edges.size());
  for (auto [a, b] : td.edges) {
    const Subset sep = td.bags[static_cast<std::size_t>(a)] & td.bags[static_cast<std::size_t>(b)];
    Subset ua;
    Subset ub;
    for (int i : detail::component_without_edge(adj, a, b)) ua |= td.bags[static_cast<std::size_t>(i)];
    for (int i : detail::component_without_edge(adj, b, a)) ub |= td.bags[static_cast<std::size_t>(i)];
    out.push_back({{a, b}, sep, ua - sep, ub - sep});
  }
  return out;
}

// Undirected simple graph on vertices 0..n-1.
struct ChordalGraph {
  int n = 0;
  std::vector<Subset> adjacency;

  bool has_edge(int u, int v) const { return adjacency[static_cast<std::size_t>(u)].contains(v); }
  int edge_count() const {
    int total = 0;
    for (Subset s : adjacency) total += s.size();
    return total / 2;
  }
};

// Maximum cardinality search, then check that each vertex's earlier-numbered
// neighbours form a clique.
inline bool is_chordal(const ChordalGraph& g) {
  const int n = g.n;
  std::vector<int> weight(static_cast<std::size_t>(n), 0);
  Subset numbered;
  std::vector<int> order;
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (numbered.contains(v)) continue;
      if (pick < 0 || weight[static_cast<std::size_t>(v)] > weight[static_cast<std::size_t>(pick)]) pick = v;
    }
    order.push_back(pick);
    numbered = numbered.with(pick);
    for (int nb : g.adjacency[static_cast<std::size_t>(pick)]) ++weight[static_cast<std::size_t>(nb)];
  }
  Subset before;
  for (int v : order) {
    const Subset earlier = g.adjacency[static_cast<std::size_t>(v)] & before;
    for (int a : earlier) {
      if (!(earlier - Subset{}.with(a)).is_subset_of(g.adjacency[static_cast<std::size_t>(a)])) return false;
    }
    before = before.with(v);
  }
  return true;
}

// Union of the cliques on every bag; vertices are 0..n-1.
inline ChordalGraph td_to_chordal(const TreeDecomposition& td, int n) {
  if (!is_valid_td(td, Subset::range(n))) throw Error(ErrorCode::InvalidTD, "not a valid tree decomposition");
  ChordalGraph g{n, std::vector<Subset>(static_cast<std::size_t>(n))};
  for (Subset bag : td.bags) {
    for (int u : bag) g.adjacency[static_cast<std::size_t>(u)] |= bag.without(u);
  }
  if (!is_chordal(g)) throw Error(ErrorCode::InvalidTD, "bag cliques do not form a chordal graph");
  return g;
}

// For every tree edge, the family partition of its separator must refine
// the split of the remaining vertices into the two sides.
inline bool compatible(const TreeDecomposition& td, const PartitionFamily& fam) {
  validate_td(td, fam.vars());
  for (const auto& es : edge_separators(td)) {
    if (es.sep.size() > fam.k()) {
      throw Error(ErrorCode::SeparatorTooLarge, "separator " + to_string(es.sep) + " exceeds k");
    }
    const Subset residual = fam.vars() - es.sep;
    if (residual.empty()) continue;
    std::vector<Subset> sides;
    if (!es.side_a.empty()) sides.push_back(es.side_a);
    if (!es.side_b.empty()) sides.push_back(es.side_b);
    if (!refines(fam.at(es.sep), Partition(residual, std::move(sides)))) return false;
  }
  return true;
}

struct SearchStats {
  std::size_t realize_states = 0;
  std::size_t cover_states = 0;
};

namespace detail {

// Memoized search for a decomposition compatible with a partition family.
//
// realize(L, D): D is a union of blocks of pi_L. True when L u D has a
// decomposition of width <= k whose root bag contains L and all of whose
// edges are compatible. Either |L u D| <= k + 1 (one bag), or some root bag
// L u W (W inside D) leaves D \ W coverable.
//
// cover(R, X): X splits into disjoint pieces D_j, each a union of blocks of
// pi_{L_j} for some L_j inside R with realize(L_j, D_j). Each piece hangs
// off the bag R with separator exactly L_j.
class DecompositionSearch {
 public:
  DecompositionSearch(const PartitionFamily& fam, Subset vars, int k) : fam_(fam), vars_(vars), k_(k) {}

  std::optional<TreeDecomposition> run() {
    if (!realize(Subset{}, vars_)) return std::nullopt;
    TreeDecomposition td;
    emit(Subset{}, vars_, -1, td);
    return td;
  }

  SearchStats stats() const { return {realize_.size(), cover_.size()}; }

 private:
  struct RealizeStep {
    bool ok = false;
    Subset root;  // W
  };
  struct CoverStep {
    bool ok = false;
    Subset sep;    // L_j
    Subset piece;  // D_j
  };

  static std::uint64_t key(Subset a, Subset b) { return (std::uint64_t{a.mask()} << 32) | b.mask(); }

  // Calls fn on subsets of s with exactly `size` elements, in lexicographic
  // order, until fn returns true.
  template <class Fn>
  static bool any_subset_of_size(Subset s, int size, Fn&& fn) {
    const auto ids = s.ids();
    if (size < 0 || size > static_cast<int>(ids.size())) return false;
    std::vector<int> pick(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      Subset chosen;
      for (int i : pick) chosen = chosen.with(ids[static_cast<std::size_t>(i)]);
      if (fn(chosen)) return true;
      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == static_cast<int>(ids.size()) - size + i) --i;
      if (i < 0) return false;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j) - 1] + 1;
    }
  }

  bool realize(Subset l, Subset d) {
    const auto k = key(l, d);
    if (auto it = realize_.find(k); it != realize_.end()) return it->second.ok;
    RealizeStep step;
    if ((l | d).size() <= k_ + 1) {
      step = {true, d};
    } else {
      // Larger root bags first.
      for (int size = std::min(k_ + 1 - l.size(), d.size()); size >= 1 && !step.ok; --size) {
        any_subset_of_size(d, size, [&](Subset w) {
          if (cover(l | w, d - w)) {
            step = {true, w};
            return true;
          }
          return false;
        });
      }
    }
    realize_[k] = step;
    return step.ok;
  }

  bool cover(Subset r, Subset x) {
    if (x.empty()) return true;
    const auto k = key(r, x);
    if (auto it = cover_.find(k); it != cover_.end()) return it->second.ok;
    CoverStep step;
    const int first = x.lowest();
    // Larger separators first.
    for (int size = std::min(k_, r.size()); size >= 0 && !step.ok; --size) {
      any_subset_of_size(r, size, [&](Subset sep) {
        const SeparatorEntry* entry = fam_.find(sep);
        if (!entry) return false;
        const Partition& pi = entry->partition;
        const Subset anchor = pi.block_of(first);
        if (anchor.empty() || !anchor.is_subset_of(x)) return false;
        std::vector<Subset> extra;
        for (Subset b : pi.blocks()) {
          if (b != anchor && b.is_subset_of(x)) extra.push_back(b);
        }
        // Unions of the extra blocks, most blocks first.
        const auto m = extra.size();
        if (m > 20) throw Error(ErrorCode::TooLarge, "too many blocks under one separator for the search");
        std::vector<std::uint64_t> choices;
        for (std::uint64_t c = 0; c < (std::uint64_t{1} << m); ++c) choices.push_back(c);
        std::stable_sort(choices.begin(), choices.end(), [](std::uint64_t a, std::uint64_t b) {
          return std::popcount(a) > std::popcount(b);
        });
        for (std::uint64_t c : choices) {
          Subset piece = anchor;
          for (std::size_t i = 0; i < m; ++i)
            if ((c >> i) & 1u) piece |= extra[i];
          if (realize(sep, piece) && cover(r, x - piece)) {
            step = {true, sep, piece};
            return true;
          }
        }
        return false;
      });
    }
    cover_[k] = step;
    return step.ok;
  }

  void emit(Subset l, Subset d, int parent, TreeDecomposition& td) const {
    const RealizeStep& step = realize_.at(key(l, d));
    const Subset bag = l | step.root;
    const int index = static_cast<int>(td.bags.size());
    td.bags.push_back(bag);
    if (parent >= 0) td.edges.emplace_back(parent, index);
    Subset rest = d - step.root;
    while (!rest.empty()) {
      const CoverStep& c = cover_.at(key(bag, rest));
      emit(c.sep, c.piece, index, td);
      rest -= c.piece;
    }
  }

  const PartitionFamily& fam_;
  Subset vars_;
  int k_;
  std::unordered_map<std::uint64_t, RealizeStep> realize_;
  std::unordered_map<std::uint64_t, CoverStep> cover_;
};

}  // namespace detail

// Decomposition of width <= k compatible with `fam`, or nullopt when none
// exists.
inline std::optional<TreeDecomposition> find_compatible_td(const PartitionFamily& fam, Subset vars, int k,
                                                           SearchStats* stats = nullptr) {
  if (k < 0) throw Error(ErrorCode::InvalidConfig, "k must be nonnegative");
  if (vars.empty()) throw Error(ErrorCode::InvalidSubset, "no variables");
  detail::DecompositionSearch search(fam, vars, k);
  auto td = search.run();
  if (stats) *stats = search.stats();
  return td;
}

}  // namespace twl
