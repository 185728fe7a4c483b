#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asyncpr_cli/app.hpp"
#include "asyncpr_cli/config.hpp"
#include "asyncpr_cli/experiment.hpp"

using namespace asyncpr;
using namespace asyncpr::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("asyncpr_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json scalar_config() {
  return json::parse(R"({
    "problem": {"name": "scalar-decay", "rate": -1.0, "u0": 1.0},
    "decomposition": {"p": [3, 4], "coarse_dt": 0.25, "fine_dt": 0.01},
    "epsilon": 1e-6,
    "schedules": [
      {"policy": "random-fair", "seed": 42, "delay_bound": 2},
      {"policy": "adversarial-stale", "seed": 3, "delay_bound": 2}
    ]
  })");
}

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& p, const json& doc) {
  std::ofstream out(p);
  out << doc.dump(2);
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "asyncpr");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config parsing accepts the shipped shape") {
  const ExperimentConfig cfg = parse_config(scalar_config());
  CHECK(cfg.windows == std::vector<std::size_t>{3, 4});
  CHECK(cfg.schedules.size() == 2);
  CHECK(cfg.schedules[1].policy == ActivationPolicy::adversarial_stale);
  CHECK(cfg.modes.size() == 3);
  CHECK(cfg.coarse_rule == StepRule::backward_euler);
  CHECK(cfg.fine_rule == StepRule::trapezoidal);
}

TEST_CASE("config errors name the offending field") {
  json d = scalar_config();
  d["problem"]["name"] = "wave";
  CHECK(field_of(d) == "problem.name");

  d = scalar_config();
  d["decomposition"]["p"] = json::array({2, -1});
  CHECK(field_of(d) == "decomposition.p[1]");

  d = scalar_config();
  d["decomposition"]["fine_dt"] = 0.03;
  CHECK(field_of(d) == "decomposition.fine_dt");

  d = scalar_config();
  d["epsilon"] = 0.0;
  CHECK(field_of(d) == "epsilon");

  d = scalar_config();
  d["norm"] = "frobenius";
  CHECK(field_of(d) == "norm");

  d = scalar_config();
  d["schedules"][1]["policy"] = "chaotic";
  CHECK(field_of(d) == "schedules[1].policy");

  d = scalar_config();
  d.erase("schedules");
  CHECK(field_of(d) == "schedules");

  d = scalar_config();
  d["modes"] = json::array({"sync", "sync"});
  CHECK(field_of(d) == "modes[1]");

  d = scalar_config();
  d["cost"] = json::parse(R"({"measured_sync": {"four": 10.0}})");
  CHECK(field_of(d) == "cost.measured_sync.four");

  d = scalar_config();
  d.erase("decomposition");
  CHECK(field_of(d) == "decomposition");

  d = json::parse(R"({"problem": {"name": "custom", "A": [[1, 0], [0]], "u0": [1, 1]},
                      "decomposition": {"p": 2}, "modes": ["sync"]})");
  CHECK(field_of(d) == "problem.A");
}

TEST_CASE("csv field quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_field("") == "");
}

TEST_CASE("table rows are sorted by p then mode and formatted") {
  CHECK(emit_table({}) == "p,T_p,mode,iterations,model_cost,fitted_C_bar,error_vs_oracle\n");

  RunReport a;
  a.p = 8;
  a.final_time = 1.6;
  a.mode = Mode::async;
  a.iterations = 17;
  a.model_cost = 341.6;
  a.error_vs_oracle = 1.234e-7;
  RunReport b = a;
  b.p = 4;
  b.mode = Mode::sync;
  b.iterations = 3;
  b.model_cost = 288.994;
  b.fitted_C_bar = 1.5304;
  b.error_vs_oracle = 0.0;
  RunReport c = a;
  c.p = 8;
  c.mode = Mode::sequential;
  c.iterations = 0;
  c.model_cost = 1;
  const std::vector<std::string> rows = lines(emit_table({a, b, c}));
  REQUIRE(rows.size() == 4);
  CHECK(rows[1] == "4,1.6,sync,3,288.99,1.530,0.00E+00");
  CHECK(rows[2] == "8,1.6,sequential,0,1.00,,1.23E-07");
  CHECK(rows[3] == "8,1.6,async,17,341.60,,1.23E-07");
}

TEST_CASE("reports survive a JSON round trip") {
  RunReport r;
  r.run_id = "p004_1_sync";
  r.p = 4;
  r.final_time = 1.0;
  r.mode = Mode::sync;
  r.iterations = 3;
  r.model_cost = 12.5;
  r.fitted_C_bar = 0.25;
  r.error_vs_oracle = 1e-9;
  r.stop = "threshold";
  const RunReport back = report_from_json(to_json(r));
  CHECK(back.run_id == r.run_id);
  CHECK(back.mode == Mode::sync);
  CHECK(back.iterations == 3);
  CHECK(back.fitted_C_bar == r.fitted_C_bar);
  CHECK(to_json(back) == to_json(r));
  json broken = to_json(r);
  broken.erase("p");
  CHECK_THROWS_AS(report_from_json(broken), ConfigError);
}

TEST_CASE("cli exit codes") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  write_json(cfg, scalar_config());
  CHECK(invoke({"run", "--config", cfg.string(), "--out", (tmp.path / "ok").string()}) == exit_ok);
  CHECK(fs::exists(tmp.path / "ok" / "summary.csv"));
  CHECK(invoke({"table", "--in", (tmp.path / "ok").string(), "--out", (tmp.path / "t.csv").string()}) ==
        exit_ok);

  json bad = scalar_config();
  bad["epsilon"] = -1;
  write_json(tmp.path / "bad.json", bad);
  CHECK(invoke({"run", "--config", (tmp.path / "bad.json").string(), "--out", (tmp.path / "x").string()}) ==
        exit_config_error);
  CHECK(invoke({"run", "--config", (tmp.path / "missing.json").string(), "--out", (tmp.path / "x").string()}) ==
        exit_config_error);
  CHECK(invoke({"run", "--out", (tmp.path / "x").string()}) == exit_config_error);
  CHECK(invoke({"bogus"}) == exit_config_error);
  CHECK(invoke({"table", "--in", (tmp.path / "nowhere").string(), "--out", (tmp.path / "t2.csv").string()}) ==
        exit_config_error);

  json starved = json::parse(R"({
    "problem": {"name": "heat1d", "n": 6},
    "decomposition": {"p": 8, "coarse_dt": 0.2, "fine_dt": 0.002},
    "max_events": 5,
    "schedules": [{"policy": "random-fair", "seed": 1, "delay_bound": 2}]
  })");
  write_json(tmp.path / "starved.json", starved);
  CHECK(invoke({"run", "--config", (tmp.path / "starved.json").string(), "--out",
             (tmp.path / "starved").string()}) == exit_not_converged);
  const std::string table = slurp(tmp.path / "starved" / "summary.csv");
  CHECK(table.find("async") != std::string::npos);
}

TEST_CASE("reruns are byte-identical, traces included") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  write_json(cfg, scalar_config());
  const fs::path a = tmp.path / "a";
  const fs::path b = tmp.path / "b";
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", a.string(), "--traces"}) == exit_ok);
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", b.string(), "--traces"}) == exit_ok);
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
    ++compared;
  }
  // summary, 2 windows × 4 reports, 2 windows × 3 iterative traces
  CHECK(compared == 1 + 2 * 4 + 2 * 3);

  const fs::path c = tmp.path / "c";
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", c.string(), "--seed-override", "7"}) == exit_ok);
  bool all_seven = true;
  for (const RunReport& r : read_reports(c)) {
    if (r.mode == Mode::async) all_seven = all_seven && r.seed == 7u;
  }
  CHECK(all_seven);
}

TEST_CASE("sequential-only configuration yields one row per window") {
  TempDir tmp;
  json d = scalar_config();
  d["decomposition"]["p"] = 5;
  d["modes"] = json::array({"sequential"});
  d.erase("schedules");
  const ExperimentOutcome out = run_experiment(parse_config(d), tmp.path);
  REQUIRE(out.reports.size() == 1);
  const RunReport& r = out.reports[0];
  CHECK(r.mode == Mode::sequential);
  CHECK(r.iterations == 0);
  CHECK(r.error_vs_oracle == 0.0);
  CHECK(r.model_cost == doctest::Approx(5.0 * r.cost.C_F));
  CHECK(lines(slurp(tmp.path / "summary.csv")).size() == 2);
}

TEST_CASE("tighter tolerance never takes fewer iterations; async error within sync error + eps") {
  json d = json::parse(R"({
    "problem": {"name": "heat1d", "n": 8},
    "decomposition": {"p": [4, 8], "coarse_dt": 0.2, "fine_dt": 0.002},
    "schedules": [
      {"policy": "random-fair", "seed": 1, "delay_bound": 1},
      {"policy": "round-robin", "seed": 0, "delay_bound": 0},
      {"policy": "adversarial-stale", "seed": 3, "delay_bound": 3}
    ]
  })");
  auto run_with = [&](double eps) {
    TempDir tmp;
    json e = d;
    e["epsilon"] = eps;
    return run_experiment(parse_config(e), tmp.path);
  };
  const ExperimentOutcome loose = run_with(1e-5);
  const ExperimentOutcome tight = run_with(1e-6);
  REQUIRE(loose.all_converged);
  REQUIRE(tight.all_converged);
  REQUIRE(loose.reports.size() == tight.reports.size());
  for (std::size_t i = 0; i < loose.reports.size(); ++i) {
    CHECK(loose.reports[i].run_id == tight.reports[i].run_id);
    if (loose.reports[i].mode == Mode::sync) {
      CHECK(tight.reports[i].iterations >= loose.reports[i].iterations);
    }
  }
  for (const ExperimentOutcome* o : {&loose, &tight}) {
    const double eps = o == &loose ? 1e-5 : 1e-6;
    double sync_err = 0.0;
    for (const RunReport& r : o->reports) {
      if (r.mode == Mode::sync) sync_err = r.error_vs_oracle;
      if (r.mode == Mode::async) {
        CHECK(r.error_vs_oracle <= sync_err + eps);
        REQUIRE(r.kappa_over_k.has_value());
        CHECK(*r.kappa_over_k >= 1.0);
      }
    }
  }
}
