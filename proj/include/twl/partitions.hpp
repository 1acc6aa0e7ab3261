#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "twl/discrete_core.hpp"
#include "twl/error.hpp"
#include "twl/estimation.hpp"
#include "twl/subset.hpp"
#include "twl/submodular.hpp"

namespace twl {

// Disjoint nonempty blocks covering `ground`, kept sorted by smallest element.
class Partition {
 public:
  Partition() = default;

  Partition(Subset ground, std::vector<Subset> blocks) : ground_(ground), blocks_(std::move(blocks)) {
    Subset seen;
    for (Subset b : blocks_) {
      if (b.empty()) throw Error(ErrorCode::InvalidSubset, "partition blocks must be nonempty");
      if (b.intersects(seen)) throw Error(ErrorCode::InvalidSubset, "partition blocks overlap");
      seen |= b;
    }
    if (seen != ground_) throw Error(ErrorCode::GroundMismatch, "blocks do not cover " + to_string(ground_));
    std::sort(blocks_.begin(), blocks_.end(), [](Subset a, Subset b) { return a.lowest() < b.lowest(); });
  }

  static Partition singletons(Subset ground) {
    std::vector<Subset> blocks;
    for (int v : ground) blocks.push_back(Subset{}.with(v));
    return Partition(ground, std::move(blocks));
  }

  Subset ground() const { return ground_; }
  const std::vector<Subset>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }

  // The block holding v, or the empty set when v is outside the ground.
  Subset block_of(int v) const {
    for (Subset b : blocks_)
      if (b.contains(v)) return b;
    return {};
  }

  // True when d is a union of whole blocks.
  bool is_union_of_blocks(Subset d) const {
    if (!d.is_subset_of(ground_)) return false;
    for (Subset b : blocks_)
      if (b.intersects(d) && !b.is_subset_of(d)) return false;
    return true;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  Subset ground_;
  std::vector<Subset> blocks_;
};

inline std::string to_string(const Partition& p) {
  std::string out;
  for (std::size_t i = 0; i < p.blocks().size(); ++i) {
    if (i) out += '|';
    out += to_string(p.blocks()[i]);
  }
  return out;
}

// True iff every block of `fine` lies inside one block of `coarse`.
inline bool refines(const Partition& fine, const Partition& coarse) {
  if (fine.ground() != coarse.ground()) throw Error(ErrorCode::GroundMismatch, "partitions of different grounds");
  for (Subset b : fine.blocks()) {
    if (!b.is_subset_of(coarse.block_of(b.lowest()))) return false;
  }
  return true;
}

struct PartitionStats {
  std::uint64_t oracle_calls = 0;
  std::uint64_t minimizations = 0;
};

// Greedy splitting of v \ s: start from one block and, scanning blocks by
// smallest element, split the first block whose Queyranne minimum of
// I(A; X \ A | s) is at most eps (plus the 1e-9 rounding guard). Stops when
// no block splits.
inline Partition epsilon_partition(const EntropyOracle& h, Subset v, Subset s, double eps,
                                   PartitionStats* stats = nullptr) {
  require_within(v | s, h.n());
  if (!s.is_subset_of(v)) throw Error(ErrorCode::InvalidSubset, "separator must lie inside v");
  const Subset residual = v - s;
  if (residual.empty()) throw Error(ErrorCode::EmptyResidual, "separator covers every variable");
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidConfig, "eps must be nonnegative");

  std::vector<Subset> blocks{residual};
  std::unordered_set<Subset::mask_type> stable;  // blocks already found unsplittable
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Subset x = blocks[i];
      if (x.size() < 2 || stable.count(x.mask())) continue;
      auto f = info_cut_oracle(h, x | s, s);
      const MinCutResult cut = queyranne_minimize(f, x);
      if (stats) {
        stats->oracle_calls += f.calls();
        ++stats->minimizations;
      }
      if (cut.value <= eps + kInfoClamp) {
        blocks[i] = cut.set;
        blocks.push_back(x - cut.set);
        std::sort(blocks.begin(), blocks.end(), [](Subset a, Subset b) { return a.lowest() < b.lowest(); });
        changed = true;
        break;
      }
      stable.insert(x.mask());
    }
  }
  return Partition(residual, std::move(blocks));
}

struct SeparatorEntry {
  Subset separator;
  Partition partition;
  double threshold = 0.0;
};

// One eps-partition per separator of size <= k, empty separator included.
class PartitionFamily {
 public:
  using Map = std::map<Subset, SeparatorEntry, LexLess>;

  PartitionFamily() = default;
  PartitionFamily(int k, Subset vars, Map entries, std::uint64_t oracle_calls = 0)
      : k_(k), vars_(vars), entries_(std::move(entries)), oracle_calls_(oracle_calls) {}

  int k() const { return k_; }
  Subset vars() const { return vars_; }
  const Map& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t oracle_calls() const { return oracle_calls_; }

  const SeparatorEntry* find(Subset s) const {
    auto it = entries_.find(s);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Partition& at(Subset s) const {
    if (const auto* e = find(s)) return e->partition;
    throw Error(ErrorCode::SeparatorTooLarge, "no family entry for separator " + to_string(s));
  }

 private:
  int k_ = 0;
  Subset vars_;
  Map entries_;
  std::uint64_t oracle_calls_ = 0;
};

// Separator-side threshold eps2 + (|V| + 2) eps1 used for every entry.
inline double family_threshold(int n_vars, double eps1, double eps2) { return eps2 + (double(n_vars) + 2.0) * eps1; }

inline PartitionFamily build_family(const EntropyOracle& h, Subset v, int k, double eps1, double eps2) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  if (!(eps1 >= 0.0) || !(eps2 >= 0.0)) throw Error(ErrorCode::InvalidConfig, "eps1 and eps2 must be nonnegative");
  const double threshold = family_threshold(v.size(), eps1, eps2);
  PartitionStats stats;
  PartitionFamily::Map entries;
  for_each_subset(v, [&](Subset s) {
    if (s.size() > k || s == v) return;
    entries.emplace(s, SeparatorEntry{s, epsilon_partition(h, v, s, threshold, &stats), threshold});
  });
  return PartitionFamily(k, v, std::move(entries), stats.oracle_calls);
}

// Family with every partition replaced by singletons.
inline PartitionFamily singleton_family(const PartitionFamily& fam) {
  PartitionFamily::Map entries;
  for (const auto& [s, e] : fam.entries()) {
    entries.emplace(s, SeparatorEntry{s, Partition::singletons(e.partition.ground()), e.threshold});
  }
  return PartitionFamily(fam.k(), fam.vars(), std::move(entries));
}

template <class Source>
double max_pairwise_cmi(const Source& p, const Partition& pi, Subset s) {
  double best = 0.0;
  const auto& blocks = pi.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      best = std::max(best, cond_mutual_info(p, blocks[i], blocks[j], s));
    }
  }
  return best;
}

// One line per entry, separators in lexicographic order:
//   S: {0,2} | blocks: {1,3}|{4}
inline std::string format_family(const PartitionFamily& fam) {
  std::ostringstream out;
  for (const auto& [s, e] : fam.entries()) {
    out << "S: " << to_string(s) << " | blocks: " << to_string(e.partition) << '\n';
  }
  return out.str();
}

}  // namespace twl
