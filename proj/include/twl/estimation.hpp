#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "twl/discrete_core.hpp"
#include "twl/error.hpp"
#include "twl/subset.hpp"

namespace twl {

// i.i.d. assignments of every variable, stored row after row.
class SampleSet {
 public:
  SampleSet() = default;

  SampleSet(VarSet vars, std::vector<int> flat_rows) : vars_(std::move(vars)), data_(std::move(flat_rows)) {
    const auto n = static_cast<std::size_t>(vars_.n());
    if (n == 0 || data_.empty() || data_.size() % n != 0) {
      throw Error(ErrorCode::InvalidSampleSet, "a sample set needs at least one complete row");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const int v = static_cast<int>(i % n);
      if (data_[i] < 0 || data_[i] >= vars_.card(v)) {
        throw Error(ErrorCode::InvalidSampleSet, "row " + std::to_string(i / n) + " has category " +
                                                     std::to_string(data_[i]) + " for variable " + std::to_string(v));
      }
    }
  }

  static SampleSet from_rows(VarSet vars, const std::vector<std::vector<int>>& rows) {
    std::vector<int> flat;
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != vars.n()) throw Error(ErrorCode::InvalidSampleSet, "row length mismatch");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return SampleSet(std::move(vars), std::move(flat));
  }

  const VarSet& vars() const { return vars_; }
  int n() const { return vars_.n(); }
  std::size_t rows() const { return data_.size() / static_cast<std::size_t>(vars_.n()); }
  std::span<const int> row(std::size_t r) const {
    const auto n = static_cast<std::size_t>(vars_.n());
    return std::span<const int>(data_).subspan(r * n, n);
  }
  const std::vector<int>& flat() const { return data_; }

 private:
  VarSet vars_;
  std::vector<int> data_;
};

struct EstimatorBudget {
  double eps1 = 0.0;
  double delta1 = 0.0;
  std::uint64_t m = 0;
};

// Sample count for the plug-in estimator: the least m with
//   m >= ceil(2 n^2 log2^2(max_card * m) / eps1^2 * ln(2 / delta1)).
// The log2(max_card * m) factor bounds how far one sample can move a plug-in
// entropy over n variables; the rest is a Hoeffding union bound.
inline std::uint64_t required_samples(int n, int max_card, double eps1, double delta1) {
  if (!(eps1 > 0.0) || !(delta1 > 0.0) || !(delta1 < 1.0) || n < 1 || max_card < 2) {
    throw Error(ErrorCode::InvalidBudget, "need eps1 > 0, 0 < delta1 < 1, n >= 1, max_card >= 2");
  }
  const double scale = 2.0 * double(n) * double(n) / (eps1 * eps1) * std::log(2.0 / delta1);
  auto rhs = [&](double m) {
    const double l = std::log2(double(max_card) * m);
    return std::ceil(scale * l * l);
  };
  double m = 1.0;
  for (int iter = 0; iter < 1000; ++iter) {
    const double next = std::max(m, rhs(m));
    if (next > 1e18) throw Error(ErrorCode::InvalidBudget, "sample requirement overflows");
    if (next == m) return static_cast<std::uint64_t>(m);
    m = next;
  }
  throw Error(ErrorCode::InvalidBudget, "sample requirement did not converge");
}

inline EstimatorBudget make_budget(int n, int max_card, double eps1, double delta1) {
  return {eps1, delta1, required_samples(n, max_card, eps1, delta1)};
}

inline JointTable empirical_table(const SampleSet& s) {
  const JointTable shape(s.vars(), std::vector<double>(s.vars().cells(), 0.0));
  std::vector<std::uint64_t> counts(shape.size(), 0);
  std::vector<int> digits(static_cast<std::size_t>(s.n()));
  for (std::size_t r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    std::copy(row.begin(), row.end(), digits.begin());
    ++counts[shape.encode(digits)];
  }
  const double total = double(s.rows());
  std::vector<double> probs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) probs[i] = double(counts[i]) / total;
  return JointTable(s.vars(), std::move(probs));
}

// Plug-in entropy (bits) of the empirical marginal on a.
inline double estimate_entropy(const SampleSet& s, Subset a) {
  require_within(a, s.n());
  if (a.empty()) return 0.0;
  const auto ids = a.ids();
  const double total = double(s.rows());
  const std::size_t cells = s.vars().cells(a);
  if (cells <= kMaxCells) {
    std::vector<std::uint64_t> counts(cells, 0);
    for (std::size_t r = 0; r < s.rows(); ++r) {
      auto row = s.row(r);
      std::size_t idx = 0;
      for (int v : ids) idx = idx * static_cast<std::size_t>(s.vars().card(v)) + static_cast<std::size_t>(row[static_cast<std::size_t>(v)]);
      ++counts[idx];
    }
    std::vector<double> probs;
    probs.reserve(cells);
    for (auto c : counts) probs.push_back(double(c) / total);
    return detail::entropy_of(probs);
  }
  // Marginal too large to index densely: sort the projected rows.
  std::vector<std::vector<int>> projected(s.rows());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    for (int v : ids) projected[r].push_back(row[static_cast<std::size_t>(v)]);
  }
  std::sort(projected.begin(), projected.end());
  std::vector<double> probs;
  for (std::size_t i = 0; i < projected.size();) {
    std::size_t j = i;
    while (j < projected.size() && projected[j] == projected[i]) ++j;
    probs.push_back(double(j - i) / total);
    i = j;
  }
  return detail::entropy_of(probs);
}

// Entropy value oracle over either an explicit table (exact) or a sample set
// (plug-in). Answers are memoized per subset; copies share the cache and the
// cache is safe to query from several threads.
class EntropyOracle {
 public:
  static EntropyOracle exact(JointTable table) {
    return EntropyOracle(std::make_shared<Impl>(Source(std::move(table))));
  }
  static EntropyOracle sampled(SampleSet samples) {
    return EntropyOracle(std::make_shared<Impl>(Source(std::move(samples))));
  }

  double operator()(Subset a) const {
    require_within(a, n());
    {
      std::lock_guard lock(impl_->mu);
      if (auto it = impl_->memo.find(a.mask()); it != impl_->memo.end()) return it->second;
    }
    const double h = std::visit(
        [&](const auto& src) {
          using T = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<T, JointTable>) {
            return entropy(src, a);
          } else {
            return estimate_entropy(src, a);
          }
        },
        impl_->source);
    std::lock_guard lock(impl_->mu);
    impl_->memo.emplace(a.mask(), h);
    return h;
  }

  const VarSet& vars() const {
    return std::visit([](const auto& src) -> const VarSet& { return src.vars(); }, impl_->source);
  }
  int n() const { return vars().n(); }
  bool is_exact() const { return std::holds_alternative<JointTable>(impl_->source); }

  std::size_t distinct_queries() const {
    std::lock_guard lock(impl_->mu);
    return impl_->memo.size();
  }

 private:
  using Source = std::variant<JointTable, SampleSet>;
  struct Impl {
    explicit Impl(Source s) : source(std::move(s)) {}
    Source source;
    mutable std::mutex mu;
    std::unordered_map<Subset::mask_type, double> memo;
  };

  explicit EntropyOracle(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
};

inline double cond_mutual_info(const EntropyOracle& h, Subset a, Subset b, Subset s) {
  require_within(a | b | s, h.n());
  detail::require_disjoint(a, b, s);
  return detail::cmi_from_entropies(h, a, b, s);
}

}  // namespace twl
