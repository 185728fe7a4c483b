#include "asyncpr_cli/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "asyncpr/async_parareal.hpp"
#include "asyncpr_cli/serialize.hpp"

namespace asyncpr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename T>
T required_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) throw ConfigError(key, "missing in report");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

std::string number(double v) { return fmt::format("{:.10g}", v); }

std::string optional_number(const std::optional<double>& v, const char* spec = "{:.10g}") {
  return v ? fmt::format(fmt::runtime(spec), *v) : std::string();
}

std::string flag(const std::optional<bool>& v) {
  return v ? (*v ? "true" : "false") : "";
}

struct WindowSetup {
  std::size_t p = 0;
  LinearIVP ivp;
  AffinePropagator coarse;
  AffinePropagator fine;
  InterfaceVector oracle;
  CostParams cost;
  std::optional<ContractionReport> contraction;
};

WindowSetup setup_window(const ExperimentConfig& cfg, std::size_t p) {
  const TimeDecomposition dec =
      TimeDecomposition::uniform(p, cfg.coarse_dt, cfg.fine_dt, cfg.coarse_steps);
  WindowSetup w;
  w.p = p;
  w.ivp = cfg.problem.build(dec.final_time());
  w.coarse = make_propagator(cfg.coarse_rule, w.ivp, dec.coarse_dt, dec.coarse_steps);
  w.fine = make_propagator(cfg.fine_rule, w.ivp, dec.coarse_dt, dec.fine_steps());
  w.oracle = sequential_fine_solve(w.fine, w.ivp.initial, p);
  w.cost.p = p;
  w.cost.C_F = cfg.cost.C_F.value_or(w.fine.cost_units);
  w.cost.C_G = cfg.cost.C_G.value_or(w.coarse.cost_units);
  w.cost.C_bar = cfg.cost.C_bar;
  try {
    w.contraction = contraction_factors(w.coarse, w.fine, p, cfg.norm);
  } catch (const ConvergenceFailure& e) {
    spdlog::warn("p={}: contraction factors unavailable: {}", p, e.what());
  }
  return w;
}

RunReport base_report(const WindowSetup& w, const ExperimentConfig& cfg, Mode mode) {
  RunReport r;
  r.p = w.p;
  r.final_time = static_cast<double>(w.p) * cfg.coarse_dt;
  r.mode = mode;
  r.cost = w.cost;
  r.contraction = w.contraction;
  if (w.contraction) {
    r.sync_converges = sync_convergence_check(*w.contraction).converges;
    r.async_converges = async_convergence_check(*w.contraction).converges;
  }
  return r;
}

std::optional<double> measured_for(const ExperimentConfig& cfg, std::size_t p) {
  for (const auto& [pk, t] : cfg.cost.measured_sync) {
    if (pk == p) return t;
  }
  return std::nullopt;
}

}  // namespace

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json to_json(const RunReport& r) {
  return {{"run_id", r.run_id},
          {"p", r.p},
          {"T_p", r.final_time},
          {"mode", std::string(to_string(r.mode))},
          {"policy", r.policy},
          {"seed", optional_json(r.seed)},
          {"delay_bound", optional_json(r.delay_bound)},
          {"iterations", r.iterations},
          {"model_cost", r.model_cost},
          {"fitted_C_bar", optional_json(r.fitted_C_bar)},
          {"error_vs_oracle", r.error_vs_oracle},
          {"converged", r.converged},
          {"stop", r.stop},
          {"contraction", r.contraction ? to_json(*r.contraction) : json(nullptr)},
          {"sync_converges", optional_json(r.sync_converges)},
          {"async_converges", optional_json(r.async_converges)},
          {"cost", to_json(r.cost)},
          {"speedup", r.speedup ? to_json(*r.speedup) : json(nullptr)},
          {"kappa_over_k", optional_json(r.kappa_over_k)}};
}

RunReport report_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<report>", "expected a JSON object");
  RunReport r;
  r.run_id = required_field<std::string>(doc, "run_id");
  r.p = required_field<std::size_t>(doc, "p");
  r.final_time = required_field<double>(doc, "T_p");
  const auto mode = required_field<std::string>(doc, "mode");
  try {
    r.mode = mode_from_string(mode);
  } catch (const InvalidArgument& e) {
    throw ConfigError("mode", e.what());
  }
  r.policy = optional_field<std::string>(doc, "policy").value_or("");
  r.seed = optional_field<std::uint64_t>(doc, "seed");
  r.delay_bound = optional_field<std::size_t>(doc, "delay_bound");
  r.iterations = required_field<std::size_t>(doc, "iterations");
  r.model_cost = required_field<double>(doc, "model_cost");
  r.fitted_C_bar = optional_field<double>(doc, "fitted_C_bar");
  r.error_vs_oracle = required_field<double>(doc, "error_vs_oracle");
  r.converged = optional_field<bool>(doc, "converged").value_or(true);
  r.stop = optional_field<std::string>(doc, "stop").value_or("");
  return r;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir,
                                 const RunOptions& options) {
  fs::create_directories(out_dir / "reports");
  if (options.traces) fs::create_directories(out_dir / "traces");

  const auto wants = [&](Mode m) {
    return std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end();
  };

  ExperimentOutcome outcome;
  for (std::size_t p : cfg.windows) {
    const WindowSetup w = setup_window(cfg, p);

    RunReport seq = base_report(w, cfg, Mode::sequential);
    seq.run_id = fmt::format("p{:03d}_0_sequential", p);
    seq.model_cost = static_cast<double>(p) * w.cost.C_F;
    seq.stop = "exact";
    outcome.reports.push_back(seq);

    std::optional<std::size_t> k_sync;
    if (wants(Mode::sync)) {
      const SyncTrace trace = run_parareal(w.coarse, w.fine, w.ivp.initial, p, cfg.epsilon);
      RunReport r = base_report(w, cfg, Mode::sync);
      r.run_id = fmt::format("p{:03d}_1_sync", p);
      r.iterations = trace.k_final;
      r.cost.k = trace.k_final;
      r.model_cost = sync_cost(r.cost);
      try {
        r.fitted_C_bar = fit_overhead(measured_for(cfg, p).value_or(r.model_cost), p,
                                      trace.k_final, r.cost.C_F, r.cost.C_G);
      } catch (const InvalidArgument&) {
        r.fitted_C_bar.reset();
      }
      r.error_vs_oracle = block_max_norm(subtract(trace.final_state(), w.oracle));
      r.stop = std::string(to_string(trace.stop_reason));
      k_sync = trace.k_final;
      if (options.traces) {
        std::ostringstream os;
        write_jsonl(os, trace);
        write_file(out_dir / "traces" / (r.run_id + ".jsonl"), os.str());
      }
      spdlog::info("{}: k={} error={:.3e}", r.run_id, r.iterations, r.error_vs_oracle);
      outcome.reports.push_back(std::move(r));
    }

    if (wants(Mode::async)) {
      for (std::size_t s = 0; s < cfg.schedules.size(); ++s) {
        AsyncSchedule sched = cfg.schedules[s];
        if (options.seed_override) sched.seed = *options.seed_override;
        RunReport r = base_report(w, cfg, Mode::async);
        r.run_id = fmt::format("p{:03d}_2_async_{:03d}_{}_s{}_d{}", p, s, to_string(sched.policy),
                               sched.seed, sched.delay_bound);
        r.policy = std::string(to_string(sched.policy));
        r.seed = sched.seed;
        r.delay_bound = sched.delay_bound;

        AsyncTrace trace;
        try {
          trace = run_async_parareal(w.coarse, w.fine, w.ivp.initial, p, sched, cfg.epsilon);
          r.stop = std::string(to_string(trace.stop_cause));
        } catch (const HorizonExhausted& e) {
          trace = e.trace();
          r.converged = false;
          r.stop = "horizon";
          spdlog::warn("{}: {}", r.run_id, e.what());
        }
        r.iterations = kappa(trace).max;
        r.cost.kappa = r.iterations;
        r.model_cost = async_cost(r.cost);
        r.error_vs_oracle = block_max_norm(subtract(trace.final_state(), w.oracle));
        if (k_sync) {
          r.cost.k = *k_sync;
          if (*k_sync > 0) {
            r.kappa_over_k = static_cast<double>(r.iterations) / static_cast<double>(*k_sync);
          }
          if (p >= 2 && r.cost.C_F + r.cost.C_G > 0.0) r.speedup = speedup_bound(r.cost);
        }
        if (options.traces) {
          std::ostringstream os;
          write_jsonl(os, trace);
          write_file(out_dir / "traces" / (r.run_id + ".jsonl"), os.str());
        }
        spdlog::info("{}: kappa={} events={} error={:.3e}", r.run_id, r.iterations,
                     trace.stop_event, r.error_vs_oracle);
        outcome.all_converged = outcome.all_converged && r.converged;
        outcome.reports.push_back(std::move(r));
      }
    }
  }

  std::ostringstream summary;
  summary << "run_id,p,T_p,mode,policy,seed,delay_bound,iterations,model_cost,fitted_C_bar,"
             "error_vs_oracle,converged,stop,alpha,alpha_tilde,sync_converges,async_converges,"
             "kappa_over_k\n";
  for (const RunReport& r : outcome.reports) {
    summary << csv_field(r.run_id) << ',' << r.p << ',' << number(r.final_time) << ','
            << to_string(r.mode) << ',' << csv_field(r.policy) << ','
            << (r.seed ? std::to_string(*r.seed) : "") << ','
            << (r.delay_bound ? std::to_string(*r.delay_bound) : "") << ',' << r.iterations << ','
            << number(r.model_cost) << ',' << optional_number(r.fitted_C_bar) << ','
            << fmt::format("{:.2E}", r.error_vs_oracle) << ',' << (r.converged ? "true" : "false")
            << ',' << csv_field(r.stop) << ','
            << (r.contraction ? number(r.contraction->alpha) : "") << ','
            << (r.contraction ? number(r.contraction->alpha_tilde) : "") << ','
            << flag(r.sync_converges) << ',' << flag(r.async_converges) << ','
            << optional_number(r.kappa_over_k, "{:.4g}") << '\n';
    write_file(out_dir / "reports" / (r.run_id + ".json"), to_json(r).dump(2) + "\n");
  }
  write_file(out_dir / "summary.csv", summary.str());
  return outcome;
}

std::string emit_table(std::vector<RunReport> reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& b) {
    if (a.p != b.p) return a.p < b.p;
    return mode_rank(a.mode) < mode_rank(b.mode);
  });
  std::string out = "p,T_p,mode,iterations,model_cost,fitted_C_bar,error_vs_oracle\n";
  for (const RunReport& r : reports) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.p, csv_field(fmt::format("{:.6g}", r.final_time)),
                       to_string(r.mode), r.iterations,
                       csv_field(fmt::format("{:.2f}", r.model_cost)),
                       r.mode == Mode::sync ? optional_number(r.fitted_C_bar, "{:.3f}") : "",
                       fmt::format("{:.2E}", r.error_vs_oracle));
  }
  return out;
}

std::vector<RunReport> read_reports(const fs::path& dir) {
  const fs::path reports_dir = dir / "reports";
  if (!fs::is_directory(reports_dir)) {
    throw ConfigError("--in", "no reports directory under '" + dir.string() + "'");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(reports_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunReport> out;
  for (const fs::path& f : files) {
    std::ifstream in(f);
    try {
      out.push_back(report_from_json(json::parse(in)));
    } catch (const json::parse_error& e) {
      throw ConfigError(f.filename().string(), std::string("invalid JSON: ") + e.what());
    }
  }
  return out;
}

}  // namespace asyncpr::cli
