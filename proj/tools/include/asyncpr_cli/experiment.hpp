#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asyncpr/analysis.hpp"
#include "asyncpr_cli/config.hpp"

namespace asyncpr::cli {

/// Outcome of one pipeline run at one window count.
struct RunReport {
  std::string run_id;
  std::size_t p = 0;
  double final_time = 0.0;  // T_p
  Mode mode = Mode::sequential;
  // async only
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> delay_bound;

  std::size_t iterations = 0;  // k (sync), κ (async), 0 (sequential)
  double model_cost = 0.0;
  std::optional<double> fitted_C_bar;  // sync only
  double error_vs_oracle = 0.0;        // ‖λ - λ_seq‖_inf
  bool converged = true;
  std::string stop;  // stop reason or cause

  std::optional<ContractionReport> contraction;
  std::optional<bool> sync_converges;
  std::optional<bool> async_converges;
  CostParams cost;
  std::optional<SpeedupReport> speedup;  // async rows with a sync run at the same p
  std::optional<double> kappa_over_k;
};

nlohmann::json to_json(const RunReport& r);
/// Throws ConfigError when a required field is missing or mistyped.
RunReport report_from_json(const nlohmann::json& doc);

struct RunOptions {
  bool traces = false;
  std::optional<std::uint64_t> seed_override;  // replaces every schedule's seed
};

struct ExperimentOutcome {
  std::vector<RunReport> reports;
  bool all_converged = true;
};

/// Runs every (p, mode, schedule) combination in config order and writes
///   <out>/summary.csv, <out>/reports/<run_id>.json, and with traces
///   <out>/traces/<run_id>.jsonl.
/// The sequential oracle row is always produced, since every error column
/// is measured against it. Output bytes depend only on the inputs.
ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir,
                                 const RunOptions& options = {});

/// Columns p, T_p, mode, iterations, model_cost, fitted_C_bar, error_vs_oracle,
/// rows stably sorted by (p, mode). Errors use two-decimal scientific notation.
std::string emit_table(std::vector<RunReport> reports);

/// Reads <dir>/reports/*.json in file-name order.
std::vector<RunReport> read_reports(const std::filesystem::path& dir);

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(const std::string& value);

}  // namespace asyncpr::cli
