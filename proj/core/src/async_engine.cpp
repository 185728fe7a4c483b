#include "asyncpr/async_engine.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <sstream>
#include <string>

namespace asyncpr {

namespace {

// Chooses the component of each event.
class Activation {
 public:
  Activation(ActivationPolicy policy, std::size_t active_count, std::size_t window,
             std::mt19937_64& rng)
      : policy_(policy), window_(window), rng_(rng), last_fired_(active_count, -1) {}

  // Returns a position in the active list.
  std::size_t next(std::size_t event) {
    const std::size_t n = last_fired_.size();
    std::size_t pick = 0;
    if (policy_ == ActivationPolicy::round_robin) {
      pick = event % n;
    } else {
      pick = tight(event) ? earliest_deadline() : static_cast<std::size_t>(rng_() % n);
    }
    last_fired_[pick] = static_cast<long long>(event);
    return pick;
  }

 private:
  long long deadline(std::size_t j) const {
    return last_fired_[j] + static_cast<long long>(window_);
  }

  // Unit jobs with deadlines stay schedulable after an arbitrary choice as
  // long as fewer than t+1 components are due within the next t+1 events.
  bool tight(std::size_t event) const {
    std::vector<long long> deadlines(last_fired_.size());
    for (std::size_t j = 0; j < deadlines.size(); ++j) deadlines[j] = deadline(j);
    std::sort(deadlines.begin(), deadlines.end());
    const auto e = static_cast<long long>(event);
    for (std::size_t r = 0; r < deadlines.size(); ++r) {
      if (deadlines[r] - e <= static_cast<long long>(r)) return true;
    }
    return false;
  }

  std::size_t earliest_deadline() const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < last_fired_.size(); ++j) {
      if (deadline(j) < deadline(best)) best = j;
    }
    return best;
  }

  ActivationPolicy policy_;
  std::size_t window_;
  std::mt19937_64& rng_;
  std::vector<long long> last_fired_;
};

bool same_value(const Vector& a, const Vector& b) { return a == b; }

double change(const Vector& a, const Vector& b) { return max_abs(subtract(a, b)); }

}  // namespace

class AsyncEngine {
 public:
  AsyncEngine(const AsyncMapping& mapping, const BlockVector& init, const AsyncSchedule& schedule,
              const SimulationOptions& options)
      : mapping_(mapping),
        schedule_(schedule),
        options_(options),
        rng_(schedule.seed),
        window_(schedule.fairness_window(mapping.active.size())),
        activation_(schedule.policy, mapping.active.size(), window_, rng_),
        state_(init),
        history_(init.size()),
        consumed_(init.size()),
        deltas_(init.size(), std::numeric_limits<double>::infinity()),
        counts_(init.size(), 0),
        fired_in_round_(init.size(), false) {
    for (std::size_t c = 0; c < init.size(); ++c) {
      history_[c].push_back(init[c]);
      consumed_[c].assign(mapping.reads[c].size(), 0);
    }
    trace_.active = mapping.active;
    trace_.initial = init;
    if (options_.record_snapshots) trace_.snapshots.push_back(init);
  }

  AsyncTrace run(const StopPredicate& stop) {
    for (std::size_t event = 0; event < schedule_.max_events; ++event) {
      const bool round_closed = step(event);
      EngineView view;
      view.events_ = event + 1;
      view.state_ = &state_;
      view.counts_ = &counts_;
      view.deltas_ = &deltas_;
      view.history_ = &history_;
      view.consumed_ = &consumed_;
      view.round_complete_ = round_closed;
      if (stop && stop(view)) return finish(StopCause::predicate);
      if (options_.detect_quiescence && quiescent()) return finish(StopCause::quiescence);
    }
    trace_.stop_event = trace_.events.size();
    trace_.per_component_counts = counts_;
    if (!options_.record_snapshots) trace_.snapshots.push_back(state_);
    std::ostringstream os;
    os << "simulate_async: no stop condition met within " << schedule_.max_events << " events";
    throw HorizonExhausted(os.str(), std::move(trace_));
  }

 private:
  AsyncTrace finish(StopCause cause) {
    trace_.stop_event = trace_.events.size();
    trace_.stop_cause = cause;
    trace_.per_component_counts = counts_;
    if (!options_.record_snapshots) trace_.snapshots.push_back(state_);
    return std::move(trace_);
  }

  std::size_t sample_staleness() {
    const std::size_t d = schedule_.delay_bound;
    if (schedule_.policy == ActivationPolicy::adversarial_stale) return d;
    if (d == 0) return 0;
    return static_cast<std::size_t>(rng_() % (d + 1));
  }

  // Executes one event; returns whether it closed a round.
  bool step(std::size_t event) {
    const std::size_t component = mapping_.active[activation_.next(event)];
    const auto& specs = mapping_.reads[component];
    std::vector<std::size_t>& consumed = consumed_[component];

    UpdateRecord record;
    record.k_global = event;
    record.component = component;
    record.reads.resize(specs.size());
    std::vector<std::size_t> versions(specs.size());
    // Carried reads refer to the previous event's versions, so resolve them
    // before any fresh read overwrites `consumed`.
    for (std::size_t r = 0; r < specs.size(); ++r) {
      if (specs[r].rule == ReadRule::carry) versions[r] = consumed[specs[r].carry_from];
    }
    for (std::size_t r = 0; r < specs.size(); ++r) {
      if (specs[r].rule != ReadRule::fresh) continue;
      const std::size_t newest = history_[specs[r].source].size() - 1;
      const std::size_t lag = std::min(sample_staleness(), newest);
      versions[r] = std::max(consumed[r], newest - lag);
    }

    std::vector<const Vector*> inputs(specs.size());
    for (std::size_t r = 0; r < specs.size(); ++r) {
      const std::size_t src = specs[r].source;
      inputs[r] = &history_[src][versions[r]];
      record.reads[r] = ReadRecord{src, specs[r].slot, versions[r], history_[src].size() - 1,
                                   specs[r].rule == ReadRule::carry};
    }

    Vector value = mapping_.eval(component, inputs);
    if (value.size() != state_.block_dim()) {
      throw DimensionError("simulate_async: eval returned a block of the wrong dimension");
    }
    record.frozen = same_value(value, state_[component]);
    record.delta = change(value, state_[component]);
    record.digest = value_digest(value);

    consumed = versions;
    deltas_[component] = record.delta;
    ++counts_[component];
    state_[component] = value;
    history_[component].push_back(std::move(value));
    trace_.events.push_back(std::move(record));
    if (options_.record_snapshots) trace_.snapshots.push_back(state_);

    fired_in_round_[component] = true;
    const bool closed = std::all_of(mapping_.active.begin(), mapping_.active.end(),
                                    [&](std::size_t c) { return fired_in_round_[c]; });
    if (closed) std::fill(fired_in_round_.begin(), fired_in_round_.end(), false);
    return closed;
  }

  // No admissible future read can change any component: every active
  // component has fired, its latest inputs equal the current source values,
  // and every version a fresh read could still pick carries that value.
  bool quiescent() const {
    for (std::size_t c : mapping_.active) {
      if (counts_[c] == 0) return false;
      const auto& specs = mapping_.reads[c];
      for (std::size_t r = 0; r < specs.size(); ++r) {
        const auto& versions = history_[specs[r].source];
        const Vector& current = versions.back();
        const std::size_t used = consumed_[c][r];
        if (!same_value(versions[used], current)) return false;
        if (specs[r].rule != ReadRule::fresh) continue;
        const std::size_t newest = versions.size() - 1;
        const std::size_t floor_version =
            std::max(used, newest - std::min(schedule_.delay_bound, newest));
        for (std::size_t v = floor_version; v < newest; ++v) {
          if (!same_value(versions[v], current)) return false;
        }
      }
    }
    return true;
  }

  const AsyncMapping& mapping_;
  AsyncSchedule schedule_;
  SimulationOptions options_;
  std::mt19937_64 rng_;
  std::size_t window_;
  Activation activation_;
  BlockVector state_;
  std::vector<std::vector<Vector>> history_;
  std::vector<std::vector<std::size_t>> consumed_;
  std::vector<double> deltas_;
  std::vector<std::size_t> counts_;
  std::vector<bool> fired_in_round_;
  AsyncTrace trace_;
};

void AsyncMapping::validate() const {
  if (reads.size() != block_count) {
    throw InvalidArgument("AsyncMapping: read list count differs from block count");
  }
  if (active.empty()) throw InvalidArgument("AsyncMapping: no active component");
  if (!eval) throw InvalidArgument("AsyncMapping: missing eval function");
  std::vector<bool> seen(block_count, false);
  for (std::size_t c : active) {
    if (c >= block_count) throw InvalidArgument("AsyncMapping: active component out of range");
    if (seen[c]) throw InvalidArgument("AsyncMapping: active component listed twice");
    seen[c] = true;
  }
  for (const auto& list : reads) {
    for (std::size_t r = 0; r < list.size(); ++r) {
      const ReadSpec& s = list[r];
      if (s.source >= block_count) throw InvalidArgument("AsyncMapping: read source out of range");
      if (s.slot < 1 || s.slot > arity) throw InvalidArgument("AsyncMapping: read slot out of range");
      if (s.rule == ReadRule::carry &&
          (s.carry_from >= list.size() || list[s.carry_from].rule != ReadRule::fresh ||
           list[s.carry_from].source != s.source)) {
        throw InvalidArgument("AsyncMapping: carried read must follow a fresh read of the same source");
      }
    }
  }
}

std::string_view to_string(ActivationPolicy policy) noexcept {
  switch (policy) {
    case ActivationPolicy::round_robin: return "round-robin";
    case ActivationPolicy::random_fair: return "random-fair";
    case ActivationPolicy::adversarial_stale: return "adversarial-stale";
  }
  return "unknown";
}

ActivationPolicy activation_policy_from_string(std::string_view name) {
  if (name == "round-robin") return ActivationPolicy::round_robin;
  if (name == "random-fair") return ActivationPolicy::random_fair;
  if (name == "adversarial-stale") return ActivationPolicy::adversarial_stale;
  throw InvalidArgument("unknown schedule policy '" + std::string(name) + "'");
}

std::string_view to_string(StopCause cause) noexcept {
  switch (cause) {
    case StopCause::predicate: return "predicate";
    case StopCause::quiescence: return "quiescence";
    case StopCause::none: return "none";
  }
  return "unknown";
}

AsyncTrace simulate_async(const AsyncMapping& mapping, const BlockVector& init,
                          const AsyncSchedule& schedule, const StopPredicate& stop,
                          const SimulationOptions& options) {
  mapping.validate();
  if (init.size() != mapping.block_count) {
    throw DimensionError("simulate_async: initial state block count differs from the mapping");
  }
  AsyncEngine engine(mapping, init, schedule, options);
  return engine.run(stop);
}

ValidationReport validate_schedule(const AsyncTrace& trace, std::size_t delay_bound,
                                   std::size_t window) {
  ValidationReport report;
  const std::size_t n = trace.events.size();
  if (window > 0) {
    for (std::size_t c : trace.active) {
      long long previous = -1;
      auto check_gap = [&](long long next) {
        if (next - previous > static_cast<long long>(window)) {
          report.fairness.push_back({c, static_cast<std::size_t>(previous + 1)});
        }
      };
      for (const auto& e : trace.events) {
        if (e.component != c) continue;
        const auto idx = static_cast<long long>(e.k_global);
        check_gap(idx);
        previous = idx;
      }
      // Trailing gap: the window starting right after the last firing must
      // still fit inside the trace to count.
      if (previous + static_cast<long long>(window) <= static_cast<long long>(n) - 1) {
        report.fairness.push_back({c, static_cast<std::size_t>(previous + 1)});
      }
    }
  }
  for (const auto& e : trace.events) {
    for (const auto& r : e.reads) {
      const std::size_t bound = r.carried ? delay_bound + (window > 0 ? window - 1 : 0) : delay_bound;
      const bool ahead = r.version > r.source_version;
      if (ahead || r.source_version - r.version > bound) {
        report.staleness.push_back(
            {e.k_global, e.component, r.source, r.slot, r.version, r.source_version, bound});
      }
    }
  }
  return report;
}

KappaResult kappa(const AsyncTrace& trace) {
  std::size_t blocks = trace.initial.size();
  for (std::size_t c : trace.active) blocks = std::max(blocks, c + 1);
  std::vector<std::size_t> per_component(blocks, 0);
  for (const UpdateRecord& ev : trace.events) {
    if (ev.component < blocks) ++per_component[ev.component];
  }
  KappaResult out;
  out.counts.reserve(trace.active.size());
  for (std::size_t c : trace.active) {
    out.counts.push_back(per_component[c]);
    out.max = std::max(out.max, per_component[c]);
  }
  return out;
}

std::uint64_t value_digest(std::span<const double> value) noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : value) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace asyncpr
