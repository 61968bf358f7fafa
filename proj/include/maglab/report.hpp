#pragma once

#include "maglab/config.hpp"
#include "maglab/experiments.hpp"

#include <string>

namespace maglab {

struct ReportPaths {
  std::string csv;
  std::string json;
  /// Written only when the result carries a text artifact.
  std::string text;
};

/// Default file names under `out_dir`, overridden by cfg.output when set
/// (relative entries resolve against out_dir).
ReportPaths report_paths(const ExperimentConfig& cfg, const std::string& out_dir);

std::string format_csv(const SweepResult& result);
std::string format_json(const SweepResult& result, const ExperimentConfig& cfg);

/// Writes the files atomically (temp file + rename). Throws IoError with the path.
void emit_report(const SweepResult& result, const ExperimentConfig& cfg, const ReportPaths& paths);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

} // namespace maglab
