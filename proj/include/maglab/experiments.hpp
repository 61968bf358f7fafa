#pragma once

#include "maglab/config.hpp"
#include "maglab/fit.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace maglab {

using Cell = std::variant<double, long, std::string>;

struct SweepRow {
  std::vector<Cell> cells;
  /// State stayed away from the box edge.
  bool boundary_ok = true;
  /// Solver or propagator converged.
  bool converged = true;
  bool valid() const { return boundary_ok && converged; }
};

/// One pass/fail decision. `threshold_key` names the tolerance entry (or the
/// built-in default) the value was compared against.
struct Criterion {
  std::string name;
  double value = 0;
  std::string comparator; // "<=", ">=", "=="
  std::string threshold_key;
  double threshold = 0;
  bool pass = false;
};

enum class Verdict { Pass, Fail, Invalid };
const char* to_string(Verdict v);

struct SweepResult {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<SweepRow> rows;
  std::map<std::string, LogLogFit> fits;
  std::vector<Criterion> criteria;
  std::vector<std::string> notes;
  Verdict verdict = Verdict::Invalid;
  /// Extra text output (symbolic expansions); empty for numeric sweeps.
  std::string text_artifact;

  std::size_t invalid_rows() const;
};

struct RunOptions {
  int threads = 1;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
};

/// Rows above this invalid fraction make the whole run invalid.
inline constexpr double kMaxInvalidFraction = 0.2;

SweepResult run_elliptic_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});
SweepResult run_spectrum_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});
SweepResult run_agmon(const ExperimentConfig& cfg, const RunOptions& opt = {});
SweepResult run_flow_seminorms(const ExperimentConfig& cfg, const RunOptions& opt = {});
SweepResult run_duhamel(const ExperimentConfig& cfg, const RunOptions& opt = {});
SweepResult run_symbolic(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Dispatches on cfg.experiment.
SweepResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

} // namespace maglab
