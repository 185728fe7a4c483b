#pragma once

#include <cstddef>
#include <span>

#include "asyncpr/async_engine.hpp"
#include "asyncpr/model.hpp"
#include "asyncpr/parareal.hpp"

namespace asyncpr {

/// The two-slot Parareal mapping:
///   f̃_0(λ⁽¹⁾, λ⁽²⁾) = u0,
///   f̃_i(λ⁽¹⁾, λ⁽²⁾) = G(λ⁽¹⁾_{i-1}) + F(λ⁽²⁾_{i-1}) - G(λ⁽²⁾_{i-1}).
/// Slot 1 is the freshest admissible version of λ_{i-1}; slot 2 carries the
/// version slot 1 consumed at worker i's previous update, which is what the
/// distributed worker loop reuses as its stored coarse value. Component 0 is
/// constant; components 1…p are active.
AsyncMapping async_parareal_mapping(const AffinePropagator& coarse, const AffinePropagator& fine,
                                    std::span<const double> u0, std::size_t p);

/// True iff max delta < epsilon (strict) and drained.
bool async_stop_check(std::span<const double> worker_deltas, double epsilon, bool drained);

/// Every worker's in-flight inputs are within epsilon of what it last used:
/// each version of λ_{i-1} newer than the one worker i consumed in slot 1
/// differs from it by less than epsilon in max-abs.
bool parareal_drained(const EngineView& view, std::size_t p, double epsilon);

/// Initializes with coarse_init and simulates the asynchronous worker loop.
/// With epsilon > 0 the run stops at the first round boundary where
/// async_stop_check holds (each worker has reported a fresh delta since the
/// previous check); exact quiescence always stops it. epsilon = 0 runs to
/// exact quiescence only.
AsyncTrace run_async_parareal(const AffinePropagator& coarse, const AffinePropagator& fine,
                              std::span<const double> u0, std::size_t p,
                              const AsyncSchedule& schedule, double epsilon,
                              const SimulationOptions& options = {});

}  // namespace asyncpr
