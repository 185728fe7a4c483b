#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asyncpr/async_engine.hpp"
#include "asyncpr/linalg.hpp"
#include "asyncpr/model.hpp"

namespace asyncpr::cli {

/// Malformed experiment configuration; `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Mode { sequential, sync, async };

std::string_view to_string(Mode mode) noexcept;
Mode mode_from_string(std::string_view name);
/// sequential < sync < async.
int mode_rank(Mode mode) noexcept;

struct ProblemSpec {
  std::string name;  // "heat1d", "scalar-decay" or "custom"
  // heat1d
  std::size_t n = 8;
  double length = 1.0;
  double boundary_left = 0.0;
  double boundary_right = 0.0;
  double initial_temp = 1.0;
  // scalar-decay
  double rate = -1.0;
  double u0 = 1.0;
  // custom
  DenseMatrix generator;
  Vector source;
  Vector initial;

  /// The problem on [0, final_time].
  LinearIVP build(double final_time) const;
};

struct CostOverrides {
  std::optional<double> C_F;
  std::optional<double> C_G;
  double C_bar = 0.0;
  /// Measured sync costs keyed by p, inverted for the overhead when present.
  std::vector<std::pair<std::size_t, double>> measured_sync;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<std::size_t> windows;  // one experiment per p
  double coarse_dt = 0.2;
  double fine_dt = 0.002;
  StepRule coarse_rule = StepRule::backward_euler;
  StepRule fine_rule = StepRule::trapezoidal;
  std::size_t coarse_steps = 1;
  double epsilon = 1e-6;
  NormKind norm = NormKind::spectral;
  std::vector<AsyncSchedule> schedules;
  std::vector<Mode> modes{Mode::sequential, Mode::sync, Mode::async};
  CostOverrides cost;
  std::size_t max_events = 100000;
};

/// Throws ConfigError naming the first invalid field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace asyncpr::cli
