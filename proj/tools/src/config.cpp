#include "asyncpr_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace asyncpr::cli {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number_at(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  return v ? number_at(*v, join(path, key)) : fallback;
}

std::size_t count_at(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(field, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::size_t count(const json& obj, const std::string& key, const std::string& path,
                  std::size_t fallback) {
  const json* v = find(obj, key);
  return v ? count_at(*v, join(path, key)) : fallback;
}

std::string text(const json& obj, const std::string& key, const std::string& path,
                 const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
  return v->get<std::string>();
}

const json& object(const json& obj, const std::string& key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(join(path, key), "missing");
  if (!v->is_object()) throw ConfigError(join(path, key), "expected an object");
  return *v;
}

Vector vector_at(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number_at(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename Parse>
auto named(const std::string& field, Parse parse) {
  try {
    return parse();
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
}

ProblemSpec parse_problem(const json& p) {
  const std::string path = "problem";
  ProblemSpec spec;
  spec.name = text(p, "name", path, "");
  if (spec.name == "heat1d") {
    spec.n = count(p, "n", path, spec.n);
    if (spec.n == 0) throw ConfigError("problem.n", "must be positive");
    spec.length = number(p, "length", path, spec.length);
    if (!(spec.length > 0.0)) throw ConfigError("problem.length", "must be positive");
    spec.boundary_left = number(p, "boundary_left", path, spec.boundary_left);
    spec.boundary_right = number(p, "boundary_right", path, spec.boundary_right);
    spec.initial_temp = number(p, "initial", path, spec.initial_temp);
  } else if (spec.name == "scalar-decay") {
    spec.rate = number(p, "rate", path, spec.rate);
    spec.u0 = number(p, "u0", path, spec.u0);
  } else if (spec.name == "custom") {
    const json* a = find(p, "A");
    if (!a || !a->is_array() || a->empty()) throw ConfigError("problem.A", "expected a nonempty matrix");
    const std::size_t n = a->size();
    std::vector<double> entries;
    for (std::size_t r = 0; r < n; ++r) {
      const Vector row = vector_at((*a)[r], "problem.A[" + std::to_string(r) + "]");
      if (row.size() != n) throw ConfigError("problem.A", "matrix must be square");
      entries.insert(entries.end(), row.begin(), row.end());
    }
    spec.generator = DenseMatrix(n, n, std::move(entries));
    const json* c = find(p, "c");
    spec.source = c ? vector_at(*c, "problem.c") : Vector(n, 0.0);
    const json* u0 = find(p, "u0");
    if (!u0) throw ConfigError("problem.u0", "missing");
    spec.initial = vector_at(*u0, "problem.u0");
    if (spec.source.size() != n) throw ConfigError("problem.c", "length differs from A");
    if (spec.initial.size() != n) throw ConfigError("problem.u0", "length differs from A");
  } else {
    throw ConfigError("problem.name", "unknown problem '" + spec.name +
                                          "' (expected heat1d, scalar-decay or custom)");
  }
  return spec;
}

AsyncSchedule parse_schedule(const json& s, const std::string& path, std::size_t max_events) {
  if (!s.is_object()) throw ConfigError(path, "expected an object");
  AsyncSchedule sched;
  const std::string policy = text(s, "policy", path, "random-fair");
  sched.policy = named(join(path, "policy"), [&] { return activation_policy_from_string(policy); });
  sched.seed = count(s, "seed", path, 0);
  sched.delay_bound = count(s, "delay_bound", path, 0);
  sched.max_events = max_events;
  return sched;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::sequential: return "sequential";
    case Mode::sync: return "sync";
    case Mode::async: return "async";
  }
  return "unknown";
}

Mode mode_from_string(std::string_view name) {
  if (name == "sequential") return Mode::sequential;
  if (name == "sync") return Mode::sync;
  if (name == "async") return Mode::async;
  throw InvalidArgument("unknown mode '" + std::string(name) + "'");
}

int mode_rank(Mode mode) noexcept { return static_cast<int>(mode); }

LinearIVP ProblemSpec::build(double final_time) const {
  if (name == "heat1d") {
    return heat1d_system(n, length, boundary_left, boundary_right, initial_temp, final_time);
  }
  if (name == "scalar-decay") return scalar_decay(rate, u0, final_time);
  LinearIVP ivp{generator, source, initial, final_time, "custom"};
  ivp.validate();
  return ivp;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
  ExperimentConfig cfg;
  cfg.problem = parse_problem(object(doc, "problem", ""));

  const json& dec = object(doc, "decomposition", "");
  const json* p = find(dec, "p");
  if (!p) throw ConfigError("decomposition.p", "missing");
  if (p->is_array()) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      cfg.windows.push_back(count_at((*p)[i], "decomposition.p[" + std::to_string(i) + "]"));
    }
  } else {
    cfg.windows.push_back(count_at(*p, "decomposition.p"));
  }
  if (cfg.windows.empty()) throw ConfigError("decomposition.p", "no window count given");
  for (std::size_t w : cfg.windows) {
    if (w == 0) throw ConfigError("decomposition.p", "must be at least 1");
  }
  cfg.coarse_dt = number(dec, "coarse_dt", "decomposition", cfg.coarse_dt);
  cfg.fine_dt = number(dec, "fine_dt", "decomposition", cfg.fine_dt);
  if (!(cfg.coarse_dt > 0.0)) throw ConfigError("decomposition.coarse_dt", "must be positive");
  if (!(cfg.fine_dt > 0.0)) throw ConfigError("decomposition.fine_dt", "must be positive");

  if (const json* prop = find(doc, "propagators")) {
    if (!prop->is_object()) throw ConfigError("propagators", "expected an object");
    const std::string coarse = text(*prop, "coarse", "propagators", "backward-euler");
    const std::string fine = text(*prop, "fine", "propagators", "trapezoidal");
    cfg.coarse_rule = named("propagators.coarse", [&] { return step_rule_from_string(coarse); });
    cfg.fine_rule = named("propagators.fine", [&] { return step_rule_from_string(fine); });
    cfg.coarse_steps = count(*prop, "coarse_steps", "propagators", cfg.coarse_steps);
    if (cfg.coarse_steps == 0) throw ConfigError("propagators.coarse_steps", "must be positive");
  }
  named("decomposition.fine_dt", [&] {
    return TimeDecomposition::uniform(cfg.windows.front(), cfg.coarse_dt, cfg.fine_dt,
                                      cfg.coarse_steps)
        .fine_steps();
  });

  cfg.epsilon = number(doc, "epsilon", "", cfg.epsilon);
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  const std::string norm = text(doc, "norm", "", "spectral");
  cfg.norm = named("norm", [&] { return norm_kind_from_string(norm); });
  cfg.max_events = count(doc, "max_events", "", cfg.max_events);
  if (cfg.max_events == 0) throw ConfigError("max_events", "must be positive");

  if (const json* modes = find(doc, "modes")) {
    if (!modes->is_array() || modes->empty()) throw ConfigError("modes", "expected a nonempty array");
    cfg.modes.clear();
    for (std::size_t i = 0; i < modes->size(); ++i) {
      const std::string field = "modes[" + std::to_string(i) + "]";
      if (!(*modes)[i].is_string()) throw ConfigError(field, "expected a string");
      const Mode m = named(field, [&] { return mode_from_string((*modes)[i].get<std::string>()); });
      if (std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end()) {
        throw ConfigError(field, "mode listed twice");
      }
      cfg.modes.push_back(m);
    }
  }

  if (const json* scheds = find(doc, "schedules")) {
    if (!scheds->is_array()) throw ConfigError("schedules", "expected an array");
    for (std::size_t i = 0; i < scheds->size(); ++i) {
      cfg.schedules.push_back(
          parse_schedule((*scheds)[i], "schedules[" + std::to_string(i) + "]", cfg.max_events));
    }
  }
  const bool wants_async =
      std::find(cfg.modes.begin(), cfg.modes.end(), Mode::async) != cfg.modes.end();
  if (wants_async && cfg.schedules.empty()) {
    throw ConfigError("schedules", "async mode needs at least one schedule");
  }

  if (const json* cost = find(doc, "cost")) {
    if (!cost->is_object()) throw ConfigError("cost", "expected an object");
    if (find(*cost, "C_F")) cfg.cost.C_F = number(*cost, "C_F", "cost", 0.0);
    if (find(*cost, "C_G")) cfg.cost.C_G = number(*cost, "C_G", "cost", 0.0);
    cfg.cost.C_bar = number(*cost, "C_bar", "cost", 0.0);
    if ((cfg.cost.C_F && *cfg.cost.C_F < 0.0) || (cfg.cost.C_G && *cfg.cost.C_G < 0.0) ||
        cfg.cost.C_bar < 0.0) {
      throw ConfigError("cost", "costs must be nonnegative");
    }
    if (const json* measured = find(*cost, "measured_sync")) {
      if (!measured->is_object()) {
        throw ConfigError("cost.measured_sync", "expected an object keyed by p");
      }
      for (const auto& [key, value] : measured->items()) {
        const std::string field = "cost.measured_sync." + key;
        std::size_t pos = 0;
        std::size_t pk = 0;
        try {
          pk = std::stoul(key, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos == 0 || pos != key.size()) throw ConfigError(field, "key must be a window count");
        cfg.cost.measured_sync.emplace_back(pk, number_at(value, field));
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace asyncpr::cli
