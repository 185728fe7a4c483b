#include "asyncpr_cli/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "asyncpr_cli/config.hpp"
#include "asyncpr_cli/experiment.hpp"

namespace asyncpr::cli {

namespace {

void configure_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_logger_st("asyncpr");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)once;
  const char* env = std::getenv("ASYNCPR_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  configure_logging();

  CLI::App app{"Synchronous and asynchronous Parareal experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool traces = false;
  std::optional<std::uint64_t> seed_override;
  CLI::App* run = app.add_subcommand("run", "Run an experiment configuration");
  run->add_option("--config", config_path, "JSON experiment configuration")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--traces", traces, "Write JSON-lines traces");
  run->add_option("--seed-override", seed_override, "Replace every schedule seed");

  std::string table_in;
  std::string table_out;
  CLI::App* table = app.add_subcommand("table", "Render run reports as a CSV table");
  table->add_option("--in", table_in, "Directory written by run")->required();
  table->add_option("--out", table_out, "CSV file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }

  try {
    if (*run) {
      const ExperimentConfig cfg = load_config(config_path);
      const ExperimentOutcome outcome = run_experiment(cfg, out_dir, {traces, seed_override});
      if (!outcome.all_converged) {
        spdlog::error("at least one run did not converge within max_events");
        return exit_not_converged;
      }
      return exit_ok;
    }
    const std::string csv = emit_table(read_reports(table_in));
    std::ofstream out(table_out, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("--out", "cannot write '" + table_out + "'");
    out << csv;
    return exit_ok;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config_error;
  }
}

}  // namespace asyncpr::cli
