#include "asyncpr/model.hpp"

#include <cmath>
#include <sstream>

#include "asyncpr/errors.hpp"

namespace asyncpr {

namespace {

void require_positive(double v, std::string_view what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be a positive finite number");
  }
}

// The single-step affine map u ↦ S u + s for a θ-method:
// (I - θ δt A) u⁺ = (I + (1-θ) δt A) u + δt c.
AffinePropagator theta_step(const LinearIVP& ivp, double dt, double theta, double unit_cost) {
  const std::size_t n = ivp.dim();
  const DenseMatrix eye = DenseMatrix::identity(n);
  const DenseMatrix lhs = eye - (theta * dt) * ivp.generator;
  const DenseMatrix rhs = eye + ((1.0 - theta) * dt) * ivp.generator;
  try {
    const LuFactorization lu(lhs);
    Vector scaled_source(n);
    for (std::size_t i = 0; i < n; ++i) scaled_source[i] = dt * ivp.source[i];
    return {lu.solve(rhs), lu.solve(scaled_source), unit_cost};
  } catch (const SingularSystemError& e) {
    std::ostringstream os;
    os << "singular step matrix at dt=" << dt << ": " << e.what();
    throw SingularSystemError(os.str(), e.pivot(), e.column());
  }
}

AffinePropagator repeat(const AffinePropagator& step, std::size_t steps) {
  AffinePropagator out = step;
  for (std::size_t s = 1; s < steps; ++s) out = compose(step, out);
  return out;
}

AffinePropagator theta_propagator(const LinearIVP& ivp, double span, std::size_t steps,
                                  double theta, double unit_cost) {
  ivp.validate();
  require_positive(span, "propagator span");
  if (steps == 0) throw InvalidArgument("propagator step count must be at least 1");
  return repeat(theta_step(ivp, span / static_cast<double>(steps), theta, unit_cost), steps);
}

}  // namespace

void LinearIVP::validate() const {
  if (!generator.square()) throw DimensionError("LinearIVP: generator must be square");
  if (generator.rows() != source.size() || generator.rows() != initial.size()) {
    throw DimensionError("LinearIVP: generator, source and initial state differ in dimension");
  }
  if (initial.empty()) throw InvalidArgument("LinearIVP: empty state");
  require_positive(final_time, "LinearIVP final time");
  for (double v : source)
    if (!std::isfinite(v)) throw NonFiniteError("LinearIVP: non-finite source entry");
  for (double v : initial)
    if (!std::isfinite(v)) throw NonFiniteError("LinearIVP: non-finite initial entry");
}

TimeDecomposition TimeDecomposition::uniform(std::size_t p, double coarse_dt, double fine_dt,
                                             std::size_t coarse_steps) {
  if (p == 0) throw InvalidArgument("TimeDecomposition: p must be at least 1");
  require_positive(coarse_dt, "coarse step ΔT");
  require_positive(fine_dt, "fine step δt");
  if (coarse_steps == 0) throw InvalidArgument("TimeDecomposition: coarse_steps must be at least 1");
  TimeDecomposition d{p, coarse_dt, fine_dt, coarse_steps};
  (void)d.fine_steps();
  return d;
}

std::size_t TimeDecomposition::fine_steps() const {
  const double ratio = coarse_dt / fine_dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
    std::ostringstream os;
    os << "TimeDecomposition: fine step " << fine_dt << " does not divide coarse step "
       << coarse_dt;
    throw InvalidArgument(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

std::string_view to_string(StepRule rule) noexcept {
  return rule == StepRule::backward_euler ? "backward-euler" : "trapezoidal";
}

StepRule step_rule_from_string(std::string_view name) {
  if (name == "backward-euler" || name == "backward_euler") return StepRule::backward_euler;
  if (name == "trapezoidal") return StepRule::trapezoidal;
  throw InvalidArgument("unknown step rule '" + std::string(name) + "'");
}

LinearIVP heat1d_system(std::size_t n_interior, double length, double boundary_left,
                        double boundary_right, double initial_temp, double final_time) {
  if (n_interior == 0) throw InvalidArgument("heat1d_system: degenerate problem, n_interior = 0");
  require_positive(length, "heat1d_system length");
  require_positive(final_time, "heat1d_system final time");

  const double h = length / static_cast<double>(n_interior + 1);
  const double inv_h2 = 1.0 / (h * h);
  DenseMatrix a(n_interior, n_interior);
  for (std::size_t i = 0; i < n_interior; ++i) {
    a(i, i) = -2.0 * inv_h2;
    if (i > 0) a(i, i - 1) = inv_h2;
    if (i + 1 < n_interior) a(i, i + 1) = inv_h2;
  }
  Vector c(n_interior, 0.0);
  c.front() += boundary_left * inv_h2;
  c.back() += boundary_right * inv_h2;

  std::ostringstream label;
  label << "heat1d(n=" << n_interior << ")";
  LinearIVP ivp{std::move(a), std::move(c), Vector(n_interior, initial_temp), final_time,
                label.str()};
  ivp.validate();
  return ivp;
}

LinearIVP scalar_decay(double rate, double u0, double final_time) {
  LinearIVP ivp{DenseMatrix{{rate}}, Vector{0.0}, Vector{u0}, final_time, "scalar-decay"};
  ivp.validate();
  return ivp;
}

AffinePropagator backward_euler_propagator(const LinearIVP& ivp, double span, std::size_t steps,
                                           double unit_step_cost) {
  return theta_propagator(ivp, span, steps, 1.0, unit_step_cost);
}

AffinePropagator trapezoidal_propagator(const LinearIVP& ivp, double span, std::size_t steps,
                                        double unit_step_cost) {
  return theta_propagator(ivp, span, steps, 0.5, unit_step_cost);
}

AffinePropagator make_propagator(StepRule rule, const LinearIVP& ivp, double span,
                                 std::size_t steps, double unit_step_cost) {
  return rule == StepRule::backward_euler
             ? backward_euler_propagator(ivp, span, steps, unit_step_cost)
             : trapezoidal_propagator(ivp, span, steps, unit_step_cost);
}

Vector apply(const AffinePropagator& prop, std::span<const double> state) {
  if (state.size() != prop.dim()) throw DimensionError("apply: state dimension mismatch");
  Vector out = prop.matrix * state;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += prop.offset[i];
  return out;
}

AffinePropagator compose(const AffinePropagator& outer, const AffinePropagator& inner) {
  if (outer.dim() != inner.dim()) throw DimensionError("compose: propagator dimension mismatch");
  return {outer.matrix * inner.matrix, asyncpr::apply(outer, inner.offset),
          outer.cost_units + inner.cost_units};
}

AffinePropagator fine_from_onestep(const AffinePropagator& onestep, std::size_t count) {
  if (count == 0) throw InvalidArgument("fine_from_onestep: count must be at least 1");
  return repeat(onestep, count);
}

AffinePropagator identity_propagator(std::size_t dim, double cost_units) {
  return {DenseMatrix::identity(dim), Vector(dim, 0.0), cost_units};
}

}  // namespace asyncpr
