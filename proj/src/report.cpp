#include "maglab/report.hpp"

#include "maglab/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace maglab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
  return csv_field(std::get<std::string>(c));
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) fail(Errc::IoError, "cannot create directory for " + path + ": " + ec.message());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) fail(Errc::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) fail(Errc::IoError, "cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::string resolve(const std::string& out_dir, const std::string& configured,
                    const std::string& fallback) {
  if (configured.empty()) return (fs::path(out_dir) / fallback).string();
  const fs::path p(configured);
  return p.is_absolute() ? p.string() : (fs::path(out_dir) / p).string();
}

} // namespace

ReportPaths report_paths(const ExperimentConfig& cfg, const std::string& out_dir) {
  ReportPaths p;
  p.csv = resolve(out_dir, cfg.output.csv, cfg.experiment + ".csv");
  p.json = resolve(out_dir, cfg.output.json, cfg.experiment + ".json");
  p.text = (fs::path(out_dir) / (cfg.experiment + "_expansions.txt")).string();
  return p;
}

std::string format_csv(const SweepResult& result) {
  std::ostringstream os;
  for (std::size_t i = 0; i < result.columns.size(); ++i)
    os << (i ? "," : "") << csv_field(result.columns[i]);
  os << (result.columns.empty() ? "" : ",") << "boundary_ok,converged,valid\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.cells.size(); ++i) os << (i ? "," : "") << cell_text(row.cells[i]);
    os << (row.cells.empty() ? "" : ",") << int(row.boundary_ok) << ',' << int(row.converged) << ','
       << int(row.valid()) << '\n';
  }
  return os.str();
}

std::string format_json(const SweepResult& result, const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = result.experiment;
  j["engine_version"] = kEngineVersion;
  j["config"] = json::parse(config_to_json(cfg));
  json fits = json::object();
  for (const auto& [name, f] : result.fits)
    fits[name] = {{"slope", number_or_null(f.slope)},
                  {"intercept", number_or_null(f.intercept)},
                  {"r2", number_or_null(f.r2)},
                  {"points", f.points}};
  j["fits"] = fits;
  json criteria = json::array();
  for (const auto& c : result.criteria)
    criteria.push_back({{"name", c.name},
                        {"value", number_or_null(c.value)},
                        {"comparator", c.comparator},
                        {"threshold_key", c.threshold_key},
                        {"threshold", number_or_null(c.threshold)},
                        {"pass", c.pass}});
  j["criteria"] = criteria;
  j["verdict"] = to_string(result.verdict);
  j["row_count"] = result.rows.size();
  j["invalid_rows"] = result.invalid_rows();
  j["notes"] = result.notes;
  return j.dump(2) + "\n";
}

void emit_report(const SweepResult& result, const ExperimentConfig& cfg, const ReportPaths& paths) {
  write_atomic(paths.csv, format_csv(result));
  write_atomic(paths.json, format_json(result, cfg));
  if (!result.text_artifact.empty() && !paths.text.empty())
    write_atomic(paths.text, result.text_artifact);
}

} // namespace maglab
