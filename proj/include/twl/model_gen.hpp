#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "twl/discrete_core.hpp"
#include "twl/error.hpp"
#include "twl/estimation.hpp"
#include "twl/subset.hpp"
#include "twl/treedecomp.hpp"

namespace twl {

struct GeneratorSpec {
  int n = 4;
  int k = 1;
  std::uint64_t seed = 1;
  int card = 2;
  double dependence_strength = 0.3;
};

inline void validate(const GeneratorSpec& spec) {
  if (spec.k < 1 || spec.n < spec.k + 1 || spec.n > Subset::kMaxElements) {
    throw Error(ErrorCode::InvalidSpec, "need 1 <= k and k + 1 <= n <= 32");
  }
  if (spec.card < 2) throw Error(ErrorCode::InvalidSpec, "card must be >= 2");
  if (!(spec.dependence_strength > 0.0) || !(spec.dependence_strength < 0.5)) {
    throw Error(ErrorCode::InvalidSpec, "dependence_strength must lie in (0, 0.5)");
  }
}

// k-tree growth over a random vertex labelling: a (k+1)-clique bag, then each
// new vertex joins a random k-subset of a random existing bag.
inline TreeDecomposition random_ktree_td(const GeneratorSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::vector<int> label(static_cast<std::size_t>(spec.n));
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), rng);

  TreeDecomposition td;
  Subset root;
  for (int i = 0; i <= spec.k; ++i) root = root.with(label[static_cast<std::size_t>(i)]);
  td.bags.push_back(root);
  for (int i = spec.k + 1; i < spec.n; ++i) {
    std::uniform_int_distribution<std::size_t> pick_bag(0, td.bags.size() - 1);
    const std::size_t host = pick_bag(rng);
    const auto ids = td.bags[host].ids();
    std::uniform_int_distribution<std::size_t> pick_drop(0, ids.size() - 1);
    const int dropped = ids[pick_drop(rng)];
    td.bags.push_back(td.bags[host].without(dropped).with(label[static_cast<std::size_t>(i)]));
    td.edges.emplace_back(static_cast<int>(host), static_cast<int>(td.bags.size()) - 1);
  }
  return td;
}

namespace detail {

// One conditional table P(x_v | x_parents) per variable.
struct Conditional {
  int var = 0;
  std::vector<int> parents;
  std::vector<double> table;  // parent configuration (row-major) * card(var) + value
};

// Each row sits within dependence_strength of uniform (per 2/card scale)
// and at least half that far away from it.
inline std::vector<double> random_row(int card, double strength, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(card));
  double spread = 0.0;
  while (spread < 1e-6) {
    for (auto& x : d) x = unit(rng);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / card;
    spread = 0.0;
    for (auto& x : d) {
      x -= mean;
      spread = std::max(spread, std::abs(x));
    }
  }
  const double scale = (0.5 + 0.5 * unit(rng)) / spread;
  std::vector<double> row(static_cast<std::size_t>(card));
  for (int j = 0; j < card; ++j) {
    row[static_cast<std::size_t>(j)] = 1.0 / card + (2.0 * strength / card) * d[static_cast<std::size_t>(j)] * scale;
  }
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  for (auto& x : row) x /= total;
  return row;
}

}  // namespace detail

// Product of seeded conditionals along a breadth-first walk of the bags:
// every vertex new to a bag is conditioned on the bag's earlier vertices, so
// the result factorizes over td and every cell is positive.
inline JointTable random_factorizing_dist(const TreeDecomposition& td, const GeneratorSpec& spec) {
  validate(spec);
  const VarSet vars(std::vector<int>(static_cast<std::size_t>(spec.n), spec.card));
  validate_td(td, vars.all());
  if (vars.cells() > kMaxCells) throw Error(ErrorCode::TableTooLarge, "distribution would exceed 2^24 cells");

  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto adj = detail::tree_adjacency(td);
  std::vector<detail::Conditional> conds;
  Subset placed;
  std::vector<int> queue{0};
  std::vector<char> seen(td.bags.size(), 0);
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int b = queue[head];
    const Subset bag = td.bags[static_cast<std::size_t>(b)];
    std::vector<int> context = (bag & placed).ids();
    for (int v : bag - placed) {
      detail::Conditional c{v, context, {}};
      std::size_t configs = 1;
      for (int p : context) configs *= static_cast<std::size_t>(vars.card(p));
      for (std::size_t cfg = 0; cfg < configs; ++cfg) {
        auto row = detail::random_row(vars.card(v), spec.dependence_strength, rng);
        c.table.insert(c.table.end(), row.begin(), row.end());
      }
      conds.push_back(std::move(c));
      context.push_back(v);
      placed = placed.with(v);
    }
    for (int nb : adj[static_cast<std::size_t>(b)]) {
      if (!seen[static_cast<std::size_t>(nb)]) {
        seen[static_cast<std::size_t>(nb)] = 1;
        queue.push_back(nb);
      }
    }
  }

  const JointTable shape(vars, std::vector<double>(vars.cells(), 0.0));
  std::vector<double> probs(vars.cells(), 1.0);
  for (std::size_t cell = 0; cell < probs.size(); ++cell) {
    const auto x = shape.decode(cell);
    double p = 1.0;
    for (const auto& c : conds) {
      std::size_t idx = 0;
      for (int par : c.parents) idx = idx * static_cast<std::size_t>(vars.card(par)) + static_cast<std::size_t>(x[static_cast<std::size_t>(par)]);
      p *= c.table[idx * static_cast<std::size_t>(vars.card(c.var)) + static_cast<std::size_t>(x[static_cast<std::size_t>(c.var)])];
    }
    probs[cell] = p;
  }
  return JointTable(vars, std::move(probs));
}

// Smallest I(C1; C2 | S) over edge separators S of td, connected components
// C of the chordal graph minus S, and bipartitions {C1, C2} of C. +inf when
// no component has two vertices.
inline double measure_alpha(const JointTable& p, const TreeDecomposition& td) {
  if (p.n() > 12) throw Error(ErrorCode::TooLarge, "alpha measurement is limited to 12 variables");
  const ChordalGraph g = td_to_chordal(td, p.n());
  const EntropyOracle h = EntropyOracle::exact(p);
  double alpha = std::numeric_limits<double>::infinity();
  std::vector<Subset> done;
  for (const auto& es : edge_separators(td)) {
    if (std::find(done.begin(), done.end(), es.sep) != done.end()) continue;
    done.push_back(es.sep);
    Subset left = p.vars().all() - es.sep;
    while (!left.empty()) {
      Subset comp = Subset{}.with(left.lowest());
      Subset frontier = comp;
      while (!frontier.empty()) {
        Subset next;
        for (int v : frontier) next |= g.adjacency[static_cast<std::size_t>(v)];
        next = (next & left) - comp;
        comp |= next;
        frontier = next;
      }
      left -= comp;
      if (comp.size() < 2) continue;
      const int anchor = comp.lowest();
      for_each_subset(comp.without(anchor), [&](Subset rest) {
        const Subset c1 = rest.with(anchor);
        if (c1 == comp) return;
        alpha = std::min(alpha, cond_mutual_info(h, c1, comp - c1, es.sep));
      });
    }
  }
  return alpha;
}

// Inverse-CDF draws from the flat table.
inline SampleSet draw_samples(const JointTable& p, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw Error(ErrorCode::InvalidSampleSet, "need at least one sample");
  std::vector<double> cdf(p.size());
  std::partial_sum(p.probs().begin(), p.probs().end(), cdf.begin());
  const double total = cdf.back();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> flat;
  flat.reserve(m * static_cast<std::size_t>(p.n()));
  for (std::size_t i = 0; i < m; ++i) {
    const double u = unit(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t cell = static_cast<std::size_t>(it - cdf.begin());
    if (cell >= p.size()) cell = p.size() - 1;
    const auto x = p.decode(cell);
    flat.insert(flat.end(), x.begin(), x.end());
  }
  return SampleSet(p.vars(), std::move(flat));
}

struct GeneratedModel {
  TreeDecomposition td;
  JointTable dist;
  double alpha = 0.0;
  int attempts = 0;
  std::uint64_t seed_used = 0;
};

// Regenerates (td, P) from derived seeds until the measured alpha reaches
// min_alpha. Alpha is measured only for n <= 12; larger models are accepted
// as generated with alpha reported as NaN.
inline GeneratedModel generate_model(const GeneratorSpec& spec, double min_alpha, int max_attempts = 100) {
  validate(spec);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    GeneratorSpec s = spec;
    s.seed = spec.seed + static_cast<std::uint64_t>(attempt) * 0x100000001b3ULL;
    TreeDecomposition td = random_ktree_td(s);
    JointTable p = random_factorizing_dist(td, s);
    if (spec.n > 12) return {std::move(td), std::move(p), std::numeric_limits<double>::quiet_NaN(), attempt + 1, s.seed};
    const double alpha = measure_alpha(p, td);
    if (alpha > 0.0 && alpha >= min_alpha) return {std::move(td), std::move(p), alpha, attempt + 1, s.seed};
  }
  throw Error(ErrorCode::InvalidSpec, "no model reached the requested alpha");
}

}  // namespace twl
