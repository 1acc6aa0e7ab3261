#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "twl/discrete_core.hpp"
#include "twl/error.hpp"
#include "twl/estimation.hpp"
#include "twl/treedecomp.hpp"

namespace twl::io {

namespace detail {

// Non-empty lines that do not start with '#'.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) throw Error(ErrorCode::ParseError, std::string("unexpected end of input, expected ") + what);
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(number_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int number_ = 0;
};

inline std::vector<long long> parse_ints(LineReader& r, const std::string& line, const std::string& keyword) {
  std::istringstream ss(line);
  std::string word;
  ss >> word;
  if (word != keyword) r.fail("expected '" + keyword + "'");
  std::vector<long long> values;
  long long x = 0;
  while (ss >> x) values.push_back(x);
  if (!ss.eof()) r.fail("bad integer after '" + keyword + "'");
  return values;
}

inline VarSet parse_cards(LineReader& r, std::size_t n) {
  const auto cards = parse_ints(r, r.require("cards line"), "cards");
  if (cards.size() != n) r.fail("expected " + std::to_string(n) + " cardinalities");
  std::vector<int> c;
  for (long long x : cards) {
    if (x < 2 || x > std::numeric_limits<int>::max()) r.fail("cardinality must be >= 2");
    c.push_back(static_cast<int>(x));
  }
  return VarSet(std::move(c));
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  return out;
}

}  // namespace detail

// vars n / cards c0 .. c(n-1) / one probability per line in cell order.
inline JointTable read_distribution(std::istream& in) {
  detail::LineReader r(in);
  const auto head = detail::parse_ints(r, r.require("vars line"), "vars");
  if (head.size() != 1 || head[0] < 1 || head[0] > Subset::kMaxElements) r.fail("expected 'vars n' with 1 <= n <= 32");
  const VarSet vars = detail::parse_cards(r, static_cast<std::size_t>(head[0]));
  if (vars.cells() > kMaxCells) throw Error(ErrorCode::TableTooLarge, "distribution exceeds 2^24 cells");
  std::vector<double> probs;
  probs.reserve(vars.cells());
  std::string line;
  while (r.next(line)) {
    std::istringstream ss(line);
    double p = 0.0;
    std::string extra;
    if (!(ss >> p) || (ss >> extra)) r.fail("expected one probability");
    probs.push_back(p);
  }
  JointTable t(vars, std::move(probs));
  validate(t);
  return t;
}

inline void write_distribution(std::ostream& out, const JointTable& t) {
  out << "vars " << t.n() << '\n' << "cards";
  for (int c : t.vars().cards()) out << ' ' << c;
  out << '\n' << std::setprecision(17);
  for (double p : t.probs()) out << p << '\n';
}

// samples n m / cards .. / m rows of n category indices.
inline SampleSet read_samples(std::istream& in) {
  detail::LineReader r(in);
  const auto head = detail::parse_ints(r, r.require("samples line"), "samples");
  if (head.size() != 2 || head[0] < 1 || head[0] > Subset::kMaxElements || head[1] < 1) {
    r.fail("expected 'samples n m' with n, m >= 1");
  }
  const auto n = static_cast<std::size_t>(head[0]);
  const auto m = static_cast<std::size_t>(head[1]);
  const VarSet vars = detail::parse_cards(r, n);
  std::vector<int> flat;
  flat.reserve(n * m);
  std::string line;
  std::size_t rows = 0;
  while (r.next(line)) {
    std::istringstream ss(line);
    long long x = 0;
    std::size_t count = 0;
    while (ss >> x) {
      flat.push_back(static_cast<int>(x));
      ++count;
    }
    if (!ss.eof() || count != n) r.fail("expected " + std::to_string(n) + " integers");
    ++rows;
  }
  if (rows != m) throw Error(ErrorCode::ParseError, "header promises " + std::to_string(m) + " rows, found " + std::to_string(rows));
  return SampleSet(vars, std::move(flat));
}

inline void write_samples(std::ostream& out, const SampleSet& s) {
  out << "samples " << s.n() << ' ' << s.rows() << '\n' << "cards";
  for (int c : s.vars().cards()) out << ' ' << c;
  out << '\n';
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
    out << '\n';
  }
}

// td n_bags / "bag i: v .." per bag / "edge i j" per tree edge.
inline TreeDecomposition read_td(std::istream& in) {
  detail::LineReader r(in);
  const auto head = detail::parse_ints(r, r.require("td line"), "td");
  if (head.size() != 1 || head[0] < 1) r.fail("expected 'td n_bags' with n_bags >= 1");
  const auto nb = static_cast<std::size_t>(head[0]);
  TreeDecomposition td;
  td.bags.resize(nb);
  std::vector<char> seen(nb, 0);
  std::string line;
  while (r.next(line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "bag") {
      long long idx = -1;
      char colon = 0;
      if (!(ss >> idx >> colon) || colon != ':' || idx < 0 || static_cast<std::size_t>(idx) >= nb) r.fail("expected 'bag i: ...'");
      if (seen[static_cast<std::size_t>(idx)]) r.fail("bag listed twice");
      seen[static_cast<std::size_t>(idx)] = 1;
      long long v = 0;
      while (ss >> v) {
        if (v < 0 || v >= Subset::kMaxElements) r.fail("vertex id out of range");
        td.bags[static_cast<std::size_t>(idx)] = td.bags[static_cast<std::size_t>(idx)].with(static_cast<int>(v));
      }
      if (!ss.eof()) r.fail("bad vertex id");
    } else if (word == "edge") {
      long long a = 0;
      long long b = 0;
      std::string extra;
      if (!(ss >> a >> b) || (ss >> extra)) r.fail("expected 'edge i j'");
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= nb || static_cast<std::size_t>(b) >= nb) {
        r.fail("edge endpoint out of range");
      }
      td.edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    } else {
      r.fail("expected 'bag' or 'edge'");
    }
  }
  for (std::size_t i = 0; i < nb; ++i)
    if (!seen[i]) throw Error(ErrorCode::ParseError, "bag " + std::to_string(i) + " missing");
  return td;
}

inline void write_td(std::ostream& out, const TreeDecomposition& td) {
  out << "td " << td.bags.size() << '\n';
  for (std::size_t i = 0; i < td.bags.size(); ++i) {
    out << "bag " << i << ':';
    for (int v : td.bags[i]) out << ' ' << v;
    out << '\n';
  }
  for (auto [a, b] : td.edges) out << "edge " << a << ' ' << b << '\n';
}

// Explicit set function over ground {0..n-1}: values indexed by bitmask.
struct OracleTable {
  int n = 0;
  std::vector<double> values;

  double operator()(Subset s) const { return values[s.mask()]; }
};

// oracle n / one "mask value" line for each of the 2^n subsets.
inline OracleTable read_oracle(std::istream& in) {
  detail::LineReader r(in);
  const auto head = detail::parse_ints(r, r.require("oracle line"), "oracle");
  if (head.size() != 1 || head[0] < 2 || head[0] > 20) r.fail("expected 'oracle n' with 2 <= n <= 20");
  OracleTable t{static_cast<int>(head[0]), {}};
  const std::size_t count = std::size_t{1} << t.n;
  t.values.assign(count, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(count, 0);
  std::string line;
  while (r.next(line)) {
    std::istringstream ss(line);
    long long mask = -1;
    double value = 0.0;
    std::string extra;
    if (!(ss >> mask >> value) || (ss >> extra)) r.fail("expected 'mask value'");
    if (mask < 0 || static_cast<std::size_t>(mask) >= count) r.fail("mask out of range");
    if (seen[static_cast<std::size_t>(mask)]) r.fail("mask listed twice");
    seen[static_cast<std::size_t>(mask)] = 1;
    t.values[static_cast<std::size_t>(mask)] = value;
  }
  for (std::size_t i = 0; i < count; ++i)
    if (!seen[i]) throw Error(ErrorCode::ParseError, "value for mask " + std::to_string(i) + " missing");
  return t;
}

inline void write_oracle(std::ostream& out, const OracleTable& t) {
  out << "oracle " << t.n << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < t.values.size(); ++i) out << i << ' ' << t.values[i] << '\n';
}

inline JointTable load_distribution(const std::string& path) {
  auto in = detail::open_in(path);
  return read_distribution(in);
}
inline SampleSet load_samples(const std::string& path) {
  auto in = detail::open_in(path);
  return read_samples(in);
}
inline TreeDecomposition load_td(const std::string& path) {
  auto in = detail::open_in(path);
  return read_td(in);
}
inline OracleTable load_oracle(const std::string& path) {
  auto in = detail::open_in(path);
  return read_oracle(in);
}
inline void save_distribution(const std::string& path, const JointTable& t) {
  auto out = detail::open_out(path);
  write_distribution(out, t);
}
inline void save_samples(const std::string& path, const SampleSet& s) {
  auto out = detail::open_out(path);
  write_samples(out, s);
}
inline void save_td(const std::string& path, const TreeDecomposition& td) {
  auto out = detail::open_out(path);
  write_td(out, td);
}

}  // namespace twl::io
