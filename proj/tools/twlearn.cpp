// twlearn: command-line front end for learning bounded tree-width models.
//
// Exit codes: 0 success, 1 bad input, 2 validation failure, 3 no
// compatible decomposition.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "twl/twl.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNoDecomposition = 3;

std::string num(double x) {
  std::ostringstream ss;
  ss << std::setprecision(15) << x;
  return ss.str();
}

struct LearnArgs {
  std::string input;
  std::string mode = "exact";
  int k = 1;
  double epsilon = 0.1;
  double delta = 0.1;
  std::optional<double> alpha;
  std::optional<double> eps1_override;
  std::optional<double> eps2_override;
  std::string out_td;
  std::string out_dist;
  std::string dump_family;
  bool verbose = false;
};

int run_learn(const LearnArgs& a) {
  twl::LearnConfig cfg;
  cfg.k = a.k;
  cfg.eps = a.epsilon;
  cfg.delta = a.delta;
  cfg.alpha = a.alpha;
  cfg.eps1_override = a.eps1_override;
  cfg.eps2_override = a.eps2_override;

  const bool exact = a.mode == "exact";
  const twl::LearnSource source = exact ? twl::LearnSource(twl::io::load_distribution(a.input))
                                        : twl::LearnSource(twl::io::load_samples(a.input));
  const twl::VarSet vars = exact ? std::get<twl::JointTable>(source).vars() : std::get<twl::SampleSet>(source).vars();
  const auto tol = twl::derive_tolerances(cfg, vars.n(), exact);
  if (a.verbose) {
    std::cerr << "n=" << vars.n() << " k=" << cfg.k << " eps1=" << num(tol.eps1) << " eps2=" << num(tol.eps2)
              << " delta1=" << num(tol.delta1) << " alpha=" << num(tol.alpha) << " threshold=" << num(tol.threshold);
    if (!exact) {
      std::cerr << " samples=" << std::get<twl::SampleSet>(source).rows();
      if (tol.eps1 > 0.0) {
        std::cerr << " required_samples=" << twl::required_samples(vars.n(), vars.max_card(), tol.eps1, tol.delta1);
      }
    }
    std::cerr << '\n';
  }
  if (!a.dump_family.empty()) {
    const auto h = exact ? twl::EntropyOracle::exact(std::get<twl::JointTable>(source))
                         : twl::EntropyOracle::sampled(std::get<twl::SampleSet>(source));
    std::ofstream out(a.dump_family);
    out << twl::format_family(twl::build_family(h, vars.all(), cfg.k, tol.eps1, tol.eps2));
  }

  const auto result = twl::learn(source, cfg);
  if (!result) {
    std::cerr << "no decomposition of width <= " << cfg.k << " is compatible with the partition family\n";
    return kExitNoDecomposition;
  }
  if (!a.out_td.empty()) twl::io::save_td(a.out_td, result->td);
  if (!a.out_dist.empty()) {
    if (vars.cells() <= twl::kMaxCells) {
      twl::io::save_distribution(a.out_dist, twl::materialize(result->model));
    } else {
      std::cerr << "projected distribution too large to write; skipped\n";
    }
  }
  std::cout << "kl=" << num(result->kl) << " width=" << result->td.width() << " bags=" << result->td.bags.size()
            << '\n';
  return kExitOk;
}

int run_project(const std::string& dist_path, const std::string& td_path) {
  const auto p = twl::io::load_distribution(dist_path);
  const auto td = twl::io::load_td(td_path);
  try {
    twl::validate_td(td, p.vars().all());
  } catch (const twl::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitInvalid;
  }
  std::cout << "kl=" << num(twl::projection_kl(p, td)) << '\n';
  return kExitOk;
}

int run_minimize(const std::string& path, bool brute) {
  const auto table = twl::io::load_oracle(path);
  const twl::Subset ground = twl::Subset::range(table.n);
  const auto r = brute ? twl::brute_force_minimize(table, ground) : twl::queyranne_minimize(table, ground);
  std::cout << "set=" << twl::to_string(r.set) << " value=" << num(r.value) << '\n';
  return kExitOk;
}

int run_validate(const std::string& td_path, std::optional<int> n, const std::string& dist_path) {
  const auto td = twl::io::load_td(td_path);
  twl::Subset vars = td.vertices();
  if (!dist_path.empty()) {
    vars = twl::io::load_distribution(dist_path).vars().all();
  } else if (n) {
    if (*n < 1 || *n > twl::Subset::kMaxElements) throw twl::Error(twl::ErrorCode::InvalidConfig, "--n out of range");
    vars = twl::Subset::range(*n);
  }
  try {
    twl::validate_td(td, vars);
  } catch (const twl::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitInvalid;
  }
  std::cout << "valid width=" << td.width() << " bags=" << td.bags.size() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn bounded tree-width graphical models from discrete distributions or samples"};
  app.require_subcommand(1);

  LearnArgs la;
  auto* learn = app.add_subcommand("learn", "Learn a decomposition and its projected model");
  learn->add_option("--input", la.input, "distribution or sample file")->required();
  learn->add_option("--mode", la.mode, "exact | samples")->check(CLI::IsMember({"exact", "samples"}));
  learn->add_option("--k", la.k, "width bound")->required()->check(CLI::Range(1, 31));
  learn->add_option("--epsilon", la.epsilon, "target KL divergence (bits)")->required()->check(CLI::PositiveNumber);
  learn->add_option("--delta", la.delta, "failure probability")->required()->check(CLI::Range(1e-300, 1.0 - 1e-12));
  learn->add_option("--alpha", la.alpha, "strong connectivity floor (bits), defaults to epsilon")->check(CLI::PositiveNumber);
  learn->add_option("--eps1-override", la.eps1_override, "per-query entropy accuracy")->check(CLI::NonNegativeNumber);
  learn->add_option("--eps2-override", la.eps2_override, "partition threshold")->check(CLI::NonNegativeNumber);
  learn->add_option("--out-td", la.out_td, "write the decomposition here");
  learn->add_option("--out-dist", la.out_dist, "write the projected distribution here");
  learn->add_option("--dump-family", la.dump_family, "write the partition family here");
  learn->add_flag("--verbose", la.verbose, "print the derived tolerances");

  std::string dist_path;
  std::string td_path;
  auto* project = app.add_subcommand("project", "KL divergence of a distribution from its projection on a decomposition");
  project->add_option("--dist", dist_path)->required();
  project->add_option("--td", td_path)->required();

  std::string oracle_path;
  bool brute = false;
  auto* minimize = app.add_subcommand("minimize", "Minimize a symmetric submodular function given as a value table");
  minimize->add_option("--oracle-file", oracle_path)->required();
  minimize->add_flag("--brute-force", brute, "exhaustive search instead of Queyranne");

  std::optional<int> validate_n;
  std::string validate_dist;
  auto* validate = app.add_subcommand("validate-td", "Check a tree decomposition");
  validate->add_option("--td", td_path)->required();
  validate->add_option("--n", validate_n, "variable count (default: vertices named in the file)");
  validate->add_option("--dist", validate_dist, "take the variable set from this distribution");

  twl::GeneratorSpec spec;
  double min_alpha = 0.0;
  std::string out_dist;
  std::string out_td;
  auto* gen = app.add_subcommand("gen-model", "Generate a random k-tree model that factorizes exactly");
  gen->add_option("--n", spec.n)->required();
  gen->add_option("--k", spec.k)->required();
  gen->add_option("--seed", spec.seed);
  gen->add_option("--card", spec.card);
  gen->add_option("--strength", spec.dependence_strength, "dependence strength in (0, 0.5)");
  gen->add_option("--min-alpha", min_alpha, "regenerate until measured alpha reaches this");
  gen->add_option("--out-dist", out_dist)->required();
  gen->add_option("--out-td", out_td)->required();

  std::size_t m = 0;
  std::uint64_t sample_seed = 1;
  std::string out_samples;
  auto* sample = app.add_subcommand("sample", "Draw i.i.d. samples from a distribution");
  sample->add_option("--dist", dist_path)->required();
  sample->add_option("--m", m)->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed);
  sample->add_option("--out", out_samples)->required();

  auto* alpha = app.add_subcommand("measure-alpha", "Strong-connectivity floor of a distribution over a decomposition");
  alpha->add_option("--dist", dist_path)->required();
  alpha->add_option("--td", td_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (*learn) return run_learn(la);
    if (*project) return run_project(dist_path, td_path);
    if (*minimize) return run_minimize(oracle_path, brute);
    if (*validate) return run_validate(td_path, validate_n, validate_dist);
    if (*gen) {
      const auto model = twl::generate_model(spec, min_alpha);
      twl::io::save_distribution(out_dist, model.dist);
      twl::io::save_td(out_td, model.td);
      std::cout << "alpha=" << num(model.alpha) << " attempts=" << model.attempts << " seed=" << model.seed_used << '\n';
      return kExitOk;
    }
    if (*sample) {
      twl::io::save_samples(out_samples, twl::draw_samples(twl::io::load_distribution(dist_path), m, sample_seed));
      return kExitOk;
    }
    if (*alpha) {
      const auto p = twl::io::load_distribution(dist_path);
      const auto td = twl::io::load_td(td_path);
      std::cout << "alpha=" << num(twl::measure_alpha(p, td)) << '\n';
      return kExitOk;
    }
  } catch (const twl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitBadInput;
}
