#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "twl/discrete_core.hpp"
#include "twl/error.hpp"
#include "twl/estimation.hpp"
#include "twl/partitions.hpp"
#include "twl/treedecomp.hpp"

namespace twl {

// A distribution given by bag and separator marginals over a decomposition:
//   P1(x) = prod_i P(x_{V_i}) / prod_{ij} P(x_{V_ij}),  0/0 := 0.
struct FactorizedModel {
  VarSet vars;
  TreeDecomposition td;
  std::vector<JointTable> bag_marginals;        // one per bag
  std::vector<std::optional<JointTable>> separator_marginals;  // one per tree edge; empty separator -> nullopt
};

inline FactorizedModel project(const JointTable& p, const TreeDecomposition& td) {
  if (!is_valid_td(td, p.vars().all())) throw Error(ErrorCode::InvalidTD, "decomposition does not fit the table");
  FactorizedModel fm{p.vars(), td, {}, {}};
  for (Subset bag : td.bags) fm.bag_marginals.push_back(marginalize(p, bag));
  for (auto [a, b] : td.edges) {
    const Subset sep = td.bags[static_cast<std::size_t>(a)] & td.bags[static_cast<std::size_t>(b)];
    fm.separator_marginals.push_back(sep.empty() ? std::nullopt : std::optional<JointTable>(marginalize(p, sep)));
  }
  return fm;
}

namespace detail {

// Agreement of adjacent bag marginals on their shared variables.
inline void require_consistent(const FactorizedModel& fm, double tol) {
  if (fm.bag_marginals.size() != fm.td.bags.size() || fm.separator_marginals.size() != fm.td.edges.size()) {
    throw Error(ErrorCode::InconsistentModel, "marginal counts do not match the decomposition");
  }
  for (std::size_t e = 0; e < fm.td.edges.size(); ++e) {
    const auto [a, b] = fm.td.edges[e];
    const Subset bag_a = fm.td.bags[static_cast<std::size_t>(a)];
    const Subset bag_b = fm.td.bags[static_cast<std::size_t>(b)];
    const Subset sep = bag_a & bag_b;
    if (sep.empty() != !fm.separator_marginals[e].has_value()) {
      throw Error(ErrorCode::InconsistentModel, "separator marginal presence does not match the separator");
    }
    if (sep.empty()) continue;
    // positions of sep inside each bag's renumbered table
    auto local = [](Subset bag, Subset part) {
      Subset out;
      int pos = 0;
      for (int v : bag) {
        if (part.contains(v)) out = out.with(pos);
        ++pos;
      }
      return out;
    };
    const JointTable from_a = marginalize(fm.bag_marginals[static_cast<std::size_t>(a)], local(bag_a, sep));
    const JointTable from_b = marginalize(fm.bag_marginals[static_cast<std::size_t>(b)], local(bag_b, sep));
    const JointTable& given = *fm.separator_marginals[e];
    if (from_a.size() != given.size() || from_b.size() != given.size()) {
      throw Error(ErrorCode::InconsistentModel, "separator marginal has the wrong shape");
    }
    for (std::size_t i = 0; i < given.size(); ++i) {
      if (std::abs(from_a[i] - given[i]) > tol || std::abs(from_b[i] - given[i]) > tol) {
        throw Error(ErrorCode::InconsistentModel, "adjacent bags disagree on " + to_string(sep));
      }
    }
  }
}

}  // namespace detail

inline JointTable materialize(const FactorizedModel& fm) {
  detail::require_consistent(fm, 1e-9);
  const std::size_t cells = fm.vars.cells();
  if (cells > kMaxCells) throw Error(ErrorCode::TableTooLarge, "projection too large to materialize");
  std::vector<std::vector<std::uint32_t>> bag_index;
  for (Subset bag : fm.td.bags) bag_index.push_back(detail::marginal_index_map(fm.vars, bag));
  std::vector<std::vector<std::uint32_t>> sep_index;
  std::vector<Subset> seps;
  for (auto [a, b] : fm.td.edges) {
    const Subset sep = fm.td.bags[static_cast<std::size_t>(a)] & fm.td.bags[static_cast<std::size_t>(b)];
    seps.push_back(sep);
    sep_index.push_back(sep.empty() ? std::vector<std::uint32_t>{} : detail::marginal_index_map(fm.vars, sep));
  }
  std::vector<double> out(cells, 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double num = 1.0;
    for (std::size_t i = 0; i < bag_index.size() && num > 0.0; ++i) num *= fm.bag_marginals[i][bag_index[i][cell]];
    if (num <= 0.0) continue;
    double den = 1.0;
    for (std::size_t e = 0; e < sep_index.size(); ++e) {
      if (!seps[e].empty()) den *= (*fm.separator_marginals[e])[sep_index[e][cell]];
    }
    out[cell] = den > 0.0 ? num / den : 0.0;
  }
  return JointTable(fm.vars, std::move(out));
}

namespace detail {

inline double entropy_from(const JointTable& p, Subset a) { return entropy(p, a); }
inline double entropy_from(const EntropyOracle& h, Subset a) { return h(a); }

}  // namespace detail

// D(P || P1) exactly: sum of bag entropies minus separator entropies minus
// H(V). Clamped at 0.
template <class Source>
double projection_kl(const Source& p, const TreeDecomposition& td) {
  const Subset all = Subset::range(p.n());
  if (!is_valid_td(td, all)) throw Error(ErrorCode::InvalidTD, "decomposition does not fit");
  double total = -detail::entropy_from(p, all);
  for (Subset bag : td.bags) total += detail::entropy_from(p, bag);
  for (auto [a, b] : td.edges)
    total -= detail::entropy_from(p, td.bags[static_cast<std::size_t>(a)] & td.bags[static_cast<std::size_t>(b)]);
  return total < 0.0 ? 0.0 : total;
}

// Sum over tree edges of I(side_a; side_b | separator). Upper bound on
// projection_kl, equal to it when the tree has at most one edge.
template <class Source>
double edge_cmi_sum(const Source& p, const TreeDecomposition& td) {
  if (!is_valid_td(td, Subset::range(p.n()))) throw Error(ErrorCode::InvalidTD, "decomposition does not fit");
  double total = 0.0;
  for (const auto& es : edge_separators(td)) total += cond_mutual_info(p, es.side_a, es.side_b, es.sep);
  return total;
}

struct LearnConfig {
  int k = 1;
  double eps = 0.1;
  double delta = 0.1;
  std::optional<double> alpha;  // defaults to eps
  std::optional<double> eps1_override;
  std::optional<double> eps2_override;
};

// The internal tolerances used by learn().
struct DerivedTolerances {
  double alpha = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double delta1 = 0.0;
  double threshold = 0.0;  // eps2 + (n + 2) eps1
};

// eps1 = eps2 = min(eps, alpha) / (8 n^4), half of the largest value for
// which n^4 (eps2 + 3 eps1) < min(eps, alpha); delta1 = delta / n^5. With an
// exact oracle eps1 is 0.
inline DerivedTolerances derive_tolerances(const LearnConfig& cfg, int n, bool exact_oracle) {
  if (cfg.k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  const double alpha = cfg.alpha.value_or(cfg.eps);
  if (!(cfg.eps > 0.0) || !(cfg.delta > 0.0) || !(cfg.delta < 1.0) || !(alpha > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "need eps > 0, 0 < delta < 1, alpha > 0");
  }
  const double n4 = std::pow(double(n), 4);
  DerivedTolerances t;
  t.alpha = alpha;
  const double schedule = std::min(cfg.eps, alpha) / (8.0 * n4);
  t.eps1 = cfg.eps1_override.value_or(exact_oracle ? 0.0 : schedule);
  t.eps2 = cfg.eps2_override.value_or(schedule);
  if (!(t.eps1 >= 0.0) || !(t.eps2 >= 0.0)) throw Error(ErrorCode::InvalidConfig, "eps overrides must be >= 0");
  t.delta1 = cfg.delta / (n4 * double(n));
  t.threshold = family_threshold(n, t.eps1, t.eps2);
  return t;
}

struct LearnResult {
  TreeDecomposition td;
  FactorizedModel model;
  double kl = 0.0;  // projection KL against the source (empirical table in sample mode)
  DerivedTolerances tolerances;
  std::uint64_t oracle_calls = 0;
};

using LearnSource = std::variant<JointTable, SampleSet>;

// Family of eps-partitions, compatible decomposition, projection. Returns
// nullopt when no decomposition of width <= k is compatible with the family.
inline std::optional<LearnResult> learn(const LearnSource& source, const LearnConfig& cfg) {
  const bool exact = std::holds_alternative<JointTable>(source);
  const JointTable table = exact ? std::get<JointTable>(source) : empirical_table(std::get<SampleSet>(source));
  if (exact) validate(table);
  const EntropyOracle h = exact ? EntropyOracle::exact(table) : EntropyOracle::sampled(std::get<SampleSet>(source));
  const int n = table.n();
  const DerivedTolerances tol = derive_tolerances(cfg, n, exact);
  const Subset vars = table.vars().all();
  const PartitionFamily fam = build_family(h, vars, cfg.k, tol.eps1, tol.eps2);
  auto td = find_compatible_td(fam, vars, cfg.k);
  if (!td) return std::nullopt;
  LearnResult result{*td, project(table, *td), 0.0, tol, fam.oracle_calls()};
  result.kl = projection_kl(h, *td);
  return result;
}

}  // namespace twl
