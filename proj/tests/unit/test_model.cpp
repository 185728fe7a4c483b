#include <doctest.h>

#include <cmath>
#include <random>

#include "asyncpr/errors.hpp"
#include "asyncpr/model.hpp"
#include "../support/convert.hpp"

using namespace asyncpr;

TEST_CASE("heat1d discretization") {
  const LinearIVP one = heat1d_system(1, 1.0, 2.0, 3.0, 0.0, 1.0);
  CHECK(one.generator == DenseMatrix{{-8.0}});
  CHECK(one.source == Vector{4.0 * (2.0 + 3.0)});

  const LinearIVP h = heat1d_system(5, 1.0, 0.0, 0.0, 1.0, 1.0);
  CHECK(testutil::to_rows(h.generator) == oracle::heat_generator(5, 1.0));
  CHECK(h.initial == Vector(5, 1.0));
  CHECK_THROWS_AS(heat1d_system(0, 1.0, 0.0, 0.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(heat1d_system(3, 1.0, 0.0, 0.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("heat1d steady state with matching boundaries") {
  const LinearIVP h = heat1d_system(6, 2.0, 23.0, 23.0, 23.0, 1.0);
  const Vector r = add(h.generator * h.initial, h.source);
  CHECK(max_abs(r) <= 1e-10);
  const AffinePropagator be = backward_euler_propagator(h, 0.2, 3);
  const AffinePropagator tr = trapezoidal_propagator(h, 0.2, 7);
  const Vector be_out = asyncpr::apply(be, h.initial);
  const Vector tr_out = asyncpr::apply(tr, h.initial);
  for (std::size_t i = 0; i < h.dim(); ++i) {
    CHECK(be_out[i] == doctest::Approx(23.0).epsilon(1e-12));
    CHECK(tr_out[i] == doctest::Approx(23.0).epsilon(1e-12));
  }
}

TEST_CASE("scalar propagator closed forms") {
  const LinearIVP d = scalar_decay(-1.0, 1.0, 1.0);
  const AffinePropagator g = backward_euler_propagator(d, 0.25, 1);
  CHECK(g.matrix(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(g.offset == Vector{0.0});
  CHECK(g.cost_units == 1.0);

  const AffinePropagator f = trapezoidal_propagator(d, 0.25, 25);
  // (0.995/1.005)^25
  CHECK(f.matrix(0, 0) == doctest::Approx(0.7787991605471265).epsilon(1e-14));
  CHECK(f.matrix(0, 0) == doctest::Approx(oracle::trapezoid_scalar(-1.0, 0.25, 25)).epsilon(1e-14));
  CHECK(std::abs(f.matrix(0, 0) - std::exp(-0.25)) < 2e-6);
  CHECK(f.cost_units == 25.0);

  CHECK(backward_euler_propagator(d, 0.3, 4).matrix(0, 0) ==
        doctest::Approx(oracle::backward_euler_scalar(-1.0, 0.3, 4)).epsilon(1e-14));
}

TEST_CASE("zero dynamics give the identity propagator") {
  const LinearIVP z{DenseMatrix(3, 3, 0.0), Vector(3, 0.0), Vector{1, 2, 3}, 1.0, "zero"};
  for (StepRule rule : {StepRule::backward_euler, StepRule::trapezoidal}) {
    const AffinePropagator p = make_propagator(rule, z, 0.37, 5);
    CHECK(p.matrix == DenseMatrix::identity(3));
    CHECK(p.offset == Vector(3, 0.0));
  }
}

TEST_CASE("singular step matrix is reported") {
  // I - δt·A with A = 1/δt is exactly singular.
  const LinearIVP bad = scalar_decay(4.0, 1.0, 1.0);
  CHECK_THROWS_AS(backward_euler_propagator(bad, 0.25, 1), SingularSystemError);
  CHECK_THROWS_AS(trapezoidal_propagator(bad, 0.5, 1), SingularSystemError);
}

TEST_CASE("apply, compose and fine_from_onestep") {
  const AffinePropagator id = identity_propagator(2);
  CHECK(asyncpr::apply(id, Vector{3.0, -1.0}) == Vector{3.0, -1.0});
  const AffinePropagator s{DenseMatrix{{0.8}}, Vector{0.0}, 1.0};
  CHECK(asyncpr::apply(s, Vector{1.0}) == Vector{0.8});
  CHECK_THROWS_AS(asyncpr::apply(s, Vector{1.0, 2.0}), DimensionError);

  const AffinePropagator nine{DenseMatrix{{0.9}}, Vector{0.0}, 1.5};
  const AffinePropagator four = fine_from_onestep(nine, 4);
  CHECK(four.matrix(0, 0) == doctest::Approx(0.6561).epsilon(1e-15));
  CHECK(four.cost_units == 6.0);
  const AffinePropagator once = fine_from_onestep(nine, 1);
  CHECK(once.matrix == nine.matrix);
  CHECK(once.cost_units == nine.cost_units);
}

TEST_CASE("algebraic composition equals sequential application") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + t % 5;
    std::vector<AffinePropagator> maps;
    for (int j = 0; j < 3; ++j) {
      Vector off(n);
      for (auto& v : off) v = u(rng);
      maps.push_back({testutil::to_dense(oracle::random_matrix(rng, n)), off, 1.0});
    }
    Vector x(n);
    for (auto& v : x) v = u(rng);
    const Vector seq = asyncpr::apply(maps[2], asyncpr::apply(maps[1], asyncpr::apply(maps[0], x)));
    const Vector left = asyncpr::apply(compose(compose(maps[2], maps[1]), maps[0]), x);
    const Vector right = asyncpr::apply(compose(maps[2], compose(maps[1], maps[0])), x);
    const double scale = std::max(1.0, max_abs(seq));
    CHECK(max_abs(subtract(left, seq)) <= 1e-12 * scale);
    CHECK(max_abs(subtract(right, seq)) <= 1e-12 * scale);
  }
}

TEST_CASE("heat propagators are contractive for every step size (A-stability)") {
  for (std::size_t n = 1; n <= 8; ++n) {
    const LinearIVP h = heat1d_system(n, 1.0, 0.0, 0.0, 1.0, 1.0);
    for (double dt : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
      for (StepRule rule : {StepRule::backward_euler, StepRule::trapezoidal}) {
        const AffinePropagator p = make_propagator(rule, h, dt, 1);
        CHECK(operator_norm(p.matrix, NormKind::spectral) < 1.0);
      }
    }
  }
}

TEST_CASE("heat propagator norms match eigenvalue closed forms") {
  const std::size_t n = 6;
  const LinearIVP h = heat1d_system(n, 1.0, 0.0, 0.0, 1.0, 1.0);
  const double span = 0.2;
  const AffinePropagator g = backward_euler_propagator(h, span, 1);
  const AffinePropagator f = trapezoidal_propagator(h, span, 100);
  double g_expected = 0.0;
  double fg_expected = 0.0;
  for (double ev : oracle::heat_eigenvalues(n, 1.0)) {
    const double gv = oracle::backward_euler_scalar(ev, span, 1);
    const double fv = oracle::trapezoid_scalar(ev, span, 100);
    g_expected = std::max(g_expected, std::abs(gv));
    fg_expected = std::max(fg_expected, std::abs(fv - gv));
  }
  CHECK(operator_norm(g.matrix, NormKind::spectral) == doctest::Approx(g_expected).epsilon(1e-10));
  CHECK(operator_norm(f.matrix - g.matrix, NormKind::spectral) ==
        doctest::Approx(fg_expected).epsilon(1e-9));
}

TEST_CASE("trapezoidal error is second order") {
  const double span = 0.25;
  const double exact = std::exp(-span);
  const LinearIVP d = scalar_decay(-1.0, 1.0, 1.0);
  double prev = 0.0;
  for (std::size_t steps : {10u, 20u, 40u, 80u}) {
    const double err = std::abs(trapezoidal_propagator(d, span, steps).matrix(0, 0) - exact);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.2));
    prev = err;
  }
}

TEST_CASE("time decomposition") {
  const TimeDecomposition dec = TimeDecomposition::uniform(16, 0.2, 0.002);
  CHECK(dec.fine_steps() == 100);
  CHECK(dec.final_time() == doctest::Approx(3.2));
  CHECK(dec.boundary(0) == 0.0);
  CHECK(dec.boundary(16) == dec.final_time());
  CHECK_THROWS_AS(TimeDecomposition::uniform(4, 0.2, 0.003), InvalidArgument);
  CHECK_THROWS_AS(TimeDecomposition::uniform(0, 0.2, 0.002), InvalidArgument);
}

TEST_CASE("step rule names") {
  CHECK(step_rule_from_string("backward-euler") == StepRule::backward_euler);
  CHECK(step_rule_from_string("trapezoidal") == StepRule::trapezoidal);
  CHECK(to_string(StepRule::trapezoidal) == "trapezoidal");
  CHECK_THROWS_AS(step_rule_from_string("rk4"), InvalidArgument);
}
