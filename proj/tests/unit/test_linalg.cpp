#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "asyncpr/errors.hpp"
#include "asyncpr/linalg.hpp"
#include "../support/convert.hpp"

using namespace asyncpr;

TEST_CASE("dense matrix rejects non-finite entries") {
  CHECK_THROWS_AS(DenseMatrix(1, 1, std::numeric_limits<double>::quiet_NaN()), NonFiniteError);
  CHECK_THROWS_AS((DenseMatrix{{1.0, std::numeric_limits<double>::infinity()}}), NonFiniteError);
  CHECK_THROWS_AS(DenseMatrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("matrix arithmetic") {
  const DenseMatrix a{{1, 2}, {3, 4}};
  const DenseMatrix b{{0, 1}, {1, 0}};
  CHECK(a * b == DenseMatrix{{2, 1}, {4, 3}});
  CHECK(a + b == DenseMatrix{{1, 3}, {4, 4}});
  CHECK(a - b == DenseMatrix{{1, 1}, {2, 4}});
  CHECK(2.0 * a == DenseMatrix{{2, 4}, {6, 8}});
  CHECK(a.transpose() == DenseMatrix{{1, 3}, {2, 4}});
  const Vector x{1.0, -1.0};
  CHECK(a * x == Vector{-1.0, -1.0});
  CHECK_THROWS_AS(a * DenseMatrix(3, 1), DimensionError);
}

TEST_CASE("weighted max norm") {
  const BlockVector x(std::vector<Vector>{{2.0}, {-3.0}});
  CHECK(weighted_max_norm(x, Vector{1.0, 1.0}) == 3.0);
  CHECK(weighted_max_norm(x, Vector{2.0, 3.0}) == 1.0);
  CHECK(weighted_max_norm(BlockVector(4, 3, 0.0), Vector{1, 2, 3, 4}) == 0.0);
  CHECK_THROWS_AS(weighted_max_norm(x, Vector{1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(weighted_max_norm(x, Vector{1.0}), DimensionError);
}

TEST_CASE("weighted max norm with unit weights is the block max-abs norm") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vector> blocks(5, Vector(3));
    for (auto& b : blocks)
      for (auto& v : b) v = u(rng);
    const BlockVector x(blocks);
    CHECK(weighted_max_norm(x, Vector(5, 1.0)) == block_max_norm(x, NormKind::infinity));
  }
}

TEST_CASE("operator norm examples") {
  for (NormKind kind : {NormKind::infinity, NormKind::spectral}) {
    CHECK(operator_norm(DenseMatrix::identity(3), kind) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(operator_norm(DenseMatrix{{0, -0.5}, {-0.5, 0}}, NormKind::spectral) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(operator_norm(DenseMatrix::diagonal(Vector{0.8, 0.3}), NormKind::infinity) == 0.8);
  CHECK(operator_norm(DenseMatrix{{1, -2}, {3, 4}}, NormKind::infinity) == 7.0);
  CHECK(operator_norm(DenseMatrix(2, 2, 0.0), NormKind::spectral) == 0.0);
  CHECK_THROWS_AS(operator_norm(DenseMatrix(2, 3), NormKind::infinity), DimensionError);
}

TEST_CASE("spectral norm matches closed-form singular values on 2x2 and 3x3") {
  std::mt19937_64 rng(2024);
  for (std::size_t n : {2u, 3u}) {
    for (int t = 0; t < 100; ++t) {
      const oracle::Mat m = oracle::random_matrix(rng, n);
      const double expected = oracle::spectral_norm_small(m);
      CHECK(operator_norm(testutil::to_dense(m), NormKind::spectral) ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectral radius examples") {
  CHECK(spectral_radius(DenseMatrix::diagonal(Vector{0.9, -0.2})) ==
        doctest::Approx(0.9).epsilon(1e-10));
  CHECK(spectral_radius(DenseMatrix{{0, 0.5}, {0.5, 0}}) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(spectral_radius(DenseMatrix{{0, 0, 0}, {1, 0, 0}, {2, 3, 0}}) == 0.0);
  // Dominant ± pair and a dominant complex pair are resolved by the two-step fit.
  CHECK(spectral_radius(DenseMatrix::diagonal(Vector{0.7, -0.7, 0.1})) ==
        doctest::Approx(0.7).epsilon(1e-10));
  const double c = std::cos(0.3);
  const double s = std::sin(0.3);
  CHECK(spectral_radius(DenseMatrix{{0.9 * c, -0.9 * s}, {0.9 * s, 0.9 * c}}) ==
        doctest::Approx(0.9).epsilon(1e-10));
  CHECK_THROWS_AS(spectral_radius(DenseMatrix(2, 3)), DimensionError);
}

TEST_CASE("spectral radius matches the characteristic polynomial on 2x2 and 3x3") {
  std::mt19937_64 rng(99);
  int compared = 0;
  for (std::size_t n : {2u, 3u}) {
    for (int t = 0; t < 100; ++t) {
      const oracle::Mat m = oracle::random_matrix(rng, n);
      const double expected =
          n == 2 ? oracle::spectral_radius_2x2(m) : oracle::spectral_radius_3x3(m);
      try {
        CHECK(spectral_radius(testutil::to_dense(m)) == doctest::Approx(expected).epsilon(1e-8));
        ++compared;
      } catch (const ConvergenceFailure& e) {
        // Nearly tied dominant eigenvalues of distinct modulus; the estimate is still close.
        CHECK(e.last_estimate() == doctest::Approx(expected).epsilon(1e-2));
      }
    }
  }
  CHECK(compared >= 190);
}

TEST_CASE("spectral radius gives up on a non-normal matrix with no settled estimate") {
  // Two dominant modes of equal modulus, one real and one complex pair:
  // neither the one-step ratio nor the two-term recurrence fits.
  const double th = 1.0;
  const DenseMatrix d{{2.0, 0.0, 0.0},
                      {0.0, 2.0 * std::cos(th), -2.0 * std::sin(th)},
                      {0.0, 2.0 * std::sin(th), 2.0 * std::cos(th)}};
  const DenseMatrix s{{1.0, 0.3, 0.2}, {0.1, 1.0, 0.4}, {0.5, 0.2, 1.0}};
  const DenseMatrix m = s * d * LuFactorization(s).solve(DenseMatrix::identity(3));
  try {
    (void)spectral_radius(m);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.iterations() > 0);
    CHECK(e.last_estimate() == doctest::Approx(2.0).epsilon(0.5));
  }
}

TEST_CASE("abs_matrix") {
  CHECK(abs_matrix(DenseMatrix{{0, -0.5}, {-0.5, 0}}) == DenseMatrix{{0, 0.5}, {0.5, 0}});
  CHECK(abs_matrix(DenseMatrix(2, 2, 0.0)) == DenseMatrix(2, 2, 0.0));
  CHECK(abs_matrix(DenseMatrix{{1, -2}, {-3, 4}}) == DenseMatrix{{1, 2}, {3, 4}});
}

TEST_CASE("radius is below both operator norms and below the radius of |M|") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> dim(2, 8);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const DenseMatrix m = testutil::to_dense(oracle::random_matrix(rng, dim(rng)));
    double rho = 0.0;
    try {
      rho = spectral_radius(m);
    } catch (const ConvergenceFailure& e) {
      rho = e.last_estimate();
    }
    const double slack = 1.0 + 1e-6;
    CHECK(rho <= operator_norm(m, NormKind::infinity) * slack);
    CHECK(rho <= operator_norm(m, NormKind::spectral) * slack);
    // |M| is nonnegative; its Perron root dominates and power iteration settles.
    CHECK(rho <= spectral_radius(abs_matrix(m)) * slack);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("LU solves and flags singular systems") {
  const DenseMatrix a{{0, 2, 1}, {1, 1, 0}, {3, 0, 1}};
  const Vector x{1.0, -2.0, 0.5};
  const Vector b = a * x;
  const Vector y = LuFactorization(a).solve(b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-14));
  try {
    LuFactorization(DenseMatrix{{1, 2}, {2, 4}});
    FAIL("expected SingularSystemError");
  } catch (const SingularSystemError& e) {
    CHECK(e.column() == 1);
  }
}

TEST_CASE("block vectors flatten and unflatten") {
  const BlockVector x(std::vector<Vector>{{1, 2}, {3, 4}, {5, 6}});
  CHECK(x.flatten() == Vector{1, 2, 3, 4, 5, 6});
  CHECK(BlockVector::unflatten(x.flatten(), 2) == x);
  CHECK_THROWS_AS(BlockVector(std::vector<Vector>{{1, 2}, {3}}), DimensionError);
  CHECK(block_max_norm(x, NormKind::spectral) == doctest::Approx(std::sqrt(61.0)));
}

TEST_CASE("norm kind names round trip") {
  for (NormKind k : {NormKind::infinity, NormKind::spectral}) {
    CHECK(norm_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(norm_kind_from_string("frobenius"), InvalidArgument);
}
