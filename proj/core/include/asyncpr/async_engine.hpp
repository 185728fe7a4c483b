#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "asyncpr/errors.hpp"
#include "asyncpr/linalg.hpp"

namespace asyncpr {

// Virtual-time simulation of asynchronous fixed-point iterations
//
//   x_i^{k+1} = f̃_i(x^{τ(k),1}, …, x^{τ(k),m})  if i ∈ P^(k),  x_i^k otherwise,
//
// with singleton update sets P^(k) = {i}: one event updates one component
// and advances the global counter k̃ by one. Every update produces a new
// version of its component; reads name the version they consumed.

/// How a read slot picks the version it consumes.
///  - fresh: the newest version admissible under the delay bound, sampled per
///    event; never older than what this read consumed at its previous event.
///  - carry: the version that read `carry_from` consumed at this component's
///    previous event (version 0 before the first event).
enum class ReadRule { fresh, carry };

struct ReadSpec {
  std::size_t source = 0;
  std::size_t slot = 1;  // 1-based, 1 ≤ slot ≤ arity
  ReadRule rule = ReadRule::fresh;
  std::size_t carry_from = 0;  // index into the component's read list
};

/// f̃ split per component. `eval(i, inputs)` receives one vector per entry of
/// `reads[i]`, in order. Components not listed in `active` are constants.
struct AsyncMapping {
  std::size_t block_count = 0;
  std::size_t arity = 1;
  std::vector<std::size_t> active;
  std::vector<std::vector<ReadSpec>> reads;
  std::function<Vector(std::size_t, std::span<const Vector* const>)> eval;

  /// Throws InvalidArgument when read sets or active list are out of range.
  void validate() const;
};

enum class ActivationPolicy { round_robin, random_fair, adversarial_stale };

std::string_view to_string(ActivationPolicy policy) noexcept;
ActivationPolicy activation_policy_from_string(std::string_view name);

/// Seeded generator of update sets and read delays.
///  - round_robin: active components in ascending order, cyclically.
///  - random_fair: uniform random choice, overridden by earliest deadline
///    whenever a component would otherwise miss its fairness window.
///  - adversarial_stale: random_fair activation, every fresh read takes the
///    oldest admissible version.
/// Fresh reads sample a staleness in {0, …, D} per slot (D for adversarial).
struct AsyncSchedule {
  std::uint64_t seed = 0;
  std::size_t delay_bound = 0;  // D
  ActivationPolicy policy = ActivationPolicy::round_robin;
  std::size_t max_events = 100000;

  /// W = (number of active components)·(D + 1).
  std::size_t fairness_window(std::size_t active_count) const noexcept {
    return active_count * (delay_bound + 1);
  }
};

struct ReadRecord {
  std::size_t source = 0;
  std::size_t slot = 1;
  std::size_t version = 0;         // τ
  std::size_t source_version = 0;  // newest version of source at the event
  bool carried = false;
};

struct UpdateRecord {
  std::size_t k_global = 0;  // 0-based event index
  std::size_t component = 0;
  std::vector<ReadRecord> reads;
  bool frozen = false;       // update left the value unchanged
  double delta = 0.0;        // max-abs change of the component
  std::uint64_t digest = 0;  // FNV-1a of the new value's bytes
};

enum class StopCause { predicate, quiescence, none };
std::string_view to_string(StopCause cause) noexcept;

struct AsyncTrace {
  std::vector<std::size_t> active;
  BlockVector initial;
  std::vector<UpdateRecord> events;
  std::vector<std::size_t> per_component_counts;  // indexed by component
  /// snapshots[k] = state after k events; only the final state when
  /// snapshots are not recorded.
  std::vector<BlockVector> snapshots;
  std::size_t stop_event = 0;          // number of events executed
  StopCause stop_cause = StopCause::none;

  const BlockVector& final_state() const {
    return snapshots.empty() ? initial : snapshots.back();
  }
};

/// Read-only view of the engine handed to stop predicates after each event.
class EngineView {
 public:
  std::size_t events() const noexcept { return events_; }
  const BlockVector& state() const noexcept { return *state_; }
  std::span<const std::size_t> counts() const noexcept { return *counts_; }
  /// Max-abs change of each component's latest update; +inf before its first.
  std::span<const double> last_deltas() const noexcept { return *deltas_; }
  /// True when this event closes a round: every active component has fired
  /// since the previous round boundary.
  bool round_complete() const noexcept { return round_complete_; }

  std::size_t latest_version(std::size_t component) const { return (*history_)[component].size() - 1; }
  const Vector& version_value(std::size_t component, std::size_t version) const {
    return (*history_)[component][version];
  }
  /// Version consumed by read `read_index` of `component` at its latest event.
  std::size_t consumed_version(std::size_t component, std::size_t read_index) const {
    return (*consumed_)[component][read_index];
  }

 private:
  friend class AsyncEngine;
  std::size_t events_ = 0;
  const BlockVector* state_ = nullptr;
  const std::vector<std::size_t>* counts_ = nullptr;
  const std::vector<double>* deltas_ = nullptr;
  const std::vector<std::vector<Vector>>* history_ = nullptr;
  const std::vector<std::vector<std::size_t>>* consumed_ = nullptr;
  bool round_complete_ = false;
};

using StopPredicate = std::function<bool(const EngineView&)>;

struct SimulationOptions {
  /// Stop once no admissible future read can change any component.
  bool detect_quiescence = true;
  bool record_snapshots = true;
};

/// max_events reached before any stop condition. Carries the partial trace.
class HorizonExhausted : public Error {
 public:
  HorizonExhausted(const std::string& what, AsyncTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const AsyncTrace& trace() const noexcept { return trace_; }

 private:
  AsyncTrace trace_;
};

/// Runs the simulation until the predicate fires, quiescence is detected, or
/// the schedule's max_events is exhausted (HorizonExhausted).
/// Deterministic: identical inputs give identical traces.
AsyncTrace simulate_async(const AsyncMapping& mapping, const BlockVector& init,
                          const AsyncSchedule& schedule, const StopPredicate& stop = {},
                          const SimulationOptions& options = {});

struct FairnessViolation {
  std::size_t component = 0;
  std::size_t window_start = 0;
};

struct StalenessViolation {
  std::size_t event = 0;
  std::size_t component = 0;
  std::size_t source = 0;
  std::size_t slot = 0;
  std::size_t version = 0;
  std::size_t source_version = 0;
  std::size_t bound = 0;
};

struct ValidationReport {
  std::vector<FairnessViolation> fairness;
  std::vector<StalenessViolation> staleness;
  bool ok() const noexcept { return fairness.empty() && staleness.empty(); }
};

/// Checks both convergence assumptions on a finished trace.
/// Fairness: every active component appears in each window of `window`
/// consecutive events (one violation reported per gap, at its first window).
/// Boundedness: fresh reads are at most `delay_bound` versions behind the
/// source; carried reads at most delay_bound + window - 1; no read is ahead.
ValidationReport validate_schedule(const AsyncTrace& trace, std::size_t delay_bound,
                                   std::size_t window);

struct KappaResult {
  std::vector<std::size_t> counts;  // per active component, in trace.active order
  std::size_t max = 0;              // κ(k̃)
};

/// κ_i(k̃) = number of events updating component i, κ = max_i κ_i.
KappaResult kappa(const AsyncTrace& trace);

std::uint64_t value_digest(std::span<const double> value) noexcept;

}  // namespace asyncpr
