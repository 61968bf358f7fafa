#include "maglab/config.hpp"
#include "maglab/error.hpp"
#include "maglab/experiments.hpp"
#include "maglab/parallel.hpp"
#include "maglab/report.hpp"
#include "maglab/symbolic_checks.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { kPass = 0, kFail = 1, kInvalid = 2, kConfig = 3 };

int run(const std::string& config_path, const std::string& out_dir, int threads, bool verbose,
        const std::string& expected) {
  using namespace maglab;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  if (cfg.experiment != expected) {
    std::cerr << "config error: " << config_path << " describes experiment '" << cfg.experiment
              << "', not '" << expected << "'\n";
    return kConfig;
  }
  RunOptions opt;
  opt.threads = resolve_thread_count(threads);
  if (verbose) opt.log = &std::cerr;
  try {
    const SweepResult result = run_experiment(cfg, opt);
    const ReportPaths paths = report_paths(cfg, out_dir);
    emit_report(result, cfg, paths);
    for (const auto& c : result.criteria)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_number(c.value) << ' '
                << c.comparator << ' ' << format_number(c.threshold) << " [" << c.threshold_key
                << "]\n";
    std::cout << "verdict: " << to_string(result.verdict) << "\n";
    std::cout << "wrote " << paths.csv << " and " << paths.json << '\n';
    switch (result.verdict) {
    case Verdict::Pass: return kPass;
    case Verdict::Fail: return kFail;
    case Verdict::Invalid: return kInvalid;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return e.code() == Errc::ConfigError ? kConfig : kInvalid;
  }
  return kInvalid;
}

std::vector<int> to_zero_based(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v) out.push_back(x - 1);
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical and symbolic checks for magnetic Schrodinger operators"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int threads = 0;
  bool verbose = false;
  std::string chosen;
  for (const auto& name : maglab::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (MAGLAB_THREADS overrides)");
    sub->add_flag("--verbose", verbose, "progress on stderr");
    sub->callback([&chosen, name] { chosen = name; });
  }

  int d = 2;
  std::vector<int> sigma, alpha;
  CLI::App* expand = app.add_subcommand("expand", "print normal forms of commutators");
  expand->add_option("--d", d, "dimension")->check(CLI::Range(1, 8));
  expand->add_option("--sigma", sigma, "1-based word for [H, L_sigma]")->delimiter(',');
  expand->add_option("--alpha", alpha, "multi-index for [x^alpha, H]")->delimiter(',');
  expand->callback([&chosen] { chosen = "expand"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  if (chosen != "expand") return run(config_path, out_dir, threads, verbose, chosen);

  using namespace maglab;
  try {
    if (!sigma.empty()) {
      const SigmaWord w{to_zero_based(sigma)};
      std::cout << "[H, L_sigma] with multipliers left:\n"
                << leibniz_H_commutator(d, w).to_string() << "normal form:\n"
                << sym::normal_form(leibniz_H_commutator(d, w)).to_string();
    }
    if (!alpha.empty()) {
      if (static_cast<int>(alpha.size()) != d) {
        std::cerr << "--alpha needs " << d << " entries\n";
        return kConfig;
      }
      std::cout << "[x^alpha, H]:\n"
                << sym::normal_form(sym::commutator(sym::SymPoly::x_power(alpha), sym::SymPoly::H(d)))
                       .to_string();
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kInvalid;
  }
  return 0;
}
