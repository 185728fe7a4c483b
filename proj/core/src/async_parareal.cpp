#include "asyncpr/async_parareal.hpp"

#include <algorithm>

#include "asyncpr/errors.hpp"

namespace asyncpr {

AsyncMapping async_parareal_mapping(const AffinePropagator& coarse, const AffinePropagator& fine,
                                    std::span<const double> u0, std::size_t p) {
  if (p == 0) throw InvalidArgument("async_parareal_mapping: p must be at least 1");
  if (coarse.dim() != fine.dim() || coarse.dim() != u0.size()) {
    throw DimensionError("async_parareal_mapping: propagator/state dimension mismatch");
  }
  AsyncMapping m;
  m.block_count = p + 1;
  m.arity = 2;
  m.reads.resize(p + 1);
  for (std::size_t i = 1; i <= p; ++i) {
    m.active.push_back(i);
    m.reads[i] = {ReadSpec{i - 1, 1, ReadRule::fresh, 0}, ReadSpec{i - 1, 2, ReadRule::carry, 0}};
  }
  // Copies keep the mapping self-contained once the caller's propagators go away.
  m.eval = [coarse, fine, anchor = Vector(u0.begin(), u0.end())](
               std::size_t i, std::span<const Vector* const> in) -> Vector {
    if (i == 0) return anchor;
    return parareal_correction(coarse, fine, *in[0], *in[1]);
  };
  return m;
}

bool async_stop_check(std::span<const double> worker_deltas, double epsilon, bool drained) {
  if (!drained) return false;
  return std::all_of(worker_deltas.begin(), worker_deltas.end(),
                     [epsilon](double d) { return d < epsilon; });
}

bool parareal_drained(const EngineView& view, std::size_t p, double epsilon) {
  for (std::size_t i = 1; i <= p; ++i) {
    const std::size_t used = view.consumed_version(i, 0);
    const Vector& consumed = view.version_value(i - 1, used);
    for (std::size_t v = used + 1; v <= view.latest_version(i - 1); ++v) {
      if (!(max_abs(subtract(view.version_value(i - 1, v), consumed)) < epsilon)) return false;
    }
  }
  return true;
}

AsyncTrace run_async_parareal(const AffinePropagator& coarse, const AffinePropagator& fine,
                              std::span<const double> u0, std::size_t p,
                              const AsyncSchedule& schedule, double epsilon,
                              const SimulationOptions& options) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("run_async_parareal: epsilon must be nonnegative");
  const AsyncMapping mapping = async_parareal_mapping(coarse, fine, u0, p);
  const InterfaceVector init = coarse_init(coarse, u0, p);

  StopPredicate stop;
  if (epsilon > 0.0) {
    stop = [p, epsilon](const EngineView& view) {
      if (!view.round_complete()) return false;
      const auto deltas = view.last_deltas().subspan(1, p);
      return async_stop_check(deltas, epsilon, parareal_drained(view, p, epsilon));
    };
  }
  SimulationOptions opts = options;
  opts.detect_quiescence = true;
  return simulate_async(mapping, init, schedule, stop, opts);
}

}  // namespace asyncpr
