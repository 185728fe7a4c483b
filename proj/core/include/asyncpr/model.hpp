#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "asyncpr/linalg.hpp"

namespace asyncpr {

/// du/dt = A u + c on [0, T], u(0) = u0.
struct LinearIVP {
  DenseMatrix generator;  // A, units 1/time
  Vector source;          // c, carries Dirichlet boundary contributions
  Vector initial;         // u0
  double final_time = 0.0;
  std::string label;

  std::size_t dim() const noexcept { return initial.size(); }

  /// Throws DimensionError / InvalidArgument on a malformed problem.
  void validate() const;
};

/// Uniform split of [0, T] into p windows, one coarse step of ΔT per window
/// and s = ΔT/δt fine steps.
struct TimeDecomposition {
  std::size_t windows = 0;  // p
  double coarse_dt = 0.0;   // ΔT = T_i - T_{i-1}
  double fine_dt = 0.0;     // δt
  std::size_t coarse_steps = 1;

  static TimeDecomposition uniform(std::size_t p, double coarse_dt, double fine_dt,
                                   std::size_t coarse_steps = 1);

  double final_time() const noexcept { return static_cast<double>(windows) * coarse_dt; }
  double boundary(std::size_t i) const noexcept { return static_cast<double>(i) * coarse_dt; }
  /// Integer count ΔT/δt; validated at construction.
  std::size_t fine_steps() const;
};

/// λ ↦ matrix·λ + offset, with an abstract cost in work units
/// (one implicit solve = one unit by default).
struct AffinePropagator {
  DenseMatrix matrix;
  Vector offset;
  double cost_units = 0.0;

  std::size_t dim() const noexcept { return offset.size(); }
};

enum class StepRule { backward_euler, trapezoidal };

std::string_view to_string(StepRule rule) noexcept;
StepRule step_rule_from_string(std::string_view name);

/// 1D heat equation u_t = u_xx on (0, length) with Dirichlet boundaries,
/// second-order centred differences on n_interior nodes.
LinearIVP heat1d_system(std::size_t n_interior, double length, double boundary_left,
                        double boundary_right, double initial_temp, double final_time);

/// Scalar u' = rate·u.
LinearIVP scalar_decay(double rate, double u0, double final_time);

/// Exact composition of `steps` backward Euler maps
/// u ↦ (I - δt A)^{-1}(u + δt c), δt = span/steps.
/// Throws SingularSystemError if I - δt A is singular.
AffinePropagator backward_euler_propagator(const LinearIVP& ivp, double span,
                                           std::size_t steps, double unit_step_cost = 1.0);

/// Exact composition of `steps` trapezoidal maps
/// u ↦ (I - δt/2 A)^{-1}((I + δt/2 A) u + δt c).
AffinePropagator trapezoidal_propagator(const LinearIVP& ivp, double span,
                                        std::size_t steps, double unit_step_cost = 1.0);

AffinePropagator make_propagator(StepRule rule, const LinearIVP& ivp, double span,
                                 std::size_t steps, double unit_step_cost = 1.0);

/// matrix·state + offset.
Vector apply(const AffinePropagator& prop, std::span<const double> state);

/// outer ∘ inner: the map applying `inner` first. Costs add.
AffinePropagator compose(const AffinePropagator& outer, const AffinePropagator& inner);

/// onestep^count, costs summed.
AffinePropagator fine_from_onestep(const AffinePropagator& onestep, std::size_t count);

AffinePropagator identity_propagator(std::size_t dim, double cost_units = 0.0);

}  // namespace asyncpr
