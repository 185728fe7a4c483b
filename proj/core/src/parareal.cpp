#include "asyncpr/parareal.hpp"

#include <algorithm>

#include "asyncpr/errors.hpp"

namespace asyncpr {

namespace {

void require_windows(std::size_t p, std::string_view op) {
  if (p == 0) throw InvalidArgument(std::string(op) + ": p must be at least 1");
}

void require_dims(const AffinePropagator& coarse, const AffinePropagator& fine,
                  std::size_t state_dim, std::string_view op) {
  if (coarse.dim() != fine.dim() || coarse.dim() != state_dim) {
    throw DimensionError(std::string(op) + ": propagator/state dimension mismatch");
  }
}

double max_block_change(const InterfaceVector& a, const InterfaceVector& b) {
  return block_max_norm(subtract(a, b), NormKind::infinity);
}

}  // namespace

Vector parareal_correction(const AffinePropagator& fine, std::span<const double> coarse_new,
                           std::span<const double> coarse_old, std::span<const double> prev_old) {
  Vector out = asyncpr::apply(fine, prev_old);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += coarse_new[j] - coarse_old[j];
  return out;
}

Vector parareal_correction(const AffinePropagator& coarse, const AffinePropagator& fine,
                           std::span<const double> prev_new, std::span<const double> prev_old) {
  return parareal_correction(fine, asyncpr::apply(coarse, prev_new), asyncpr::apply(coarse, prev_old), prev_old);
}

InterfaceVector sequential_fine_solve(const AffinePropagator& fine, std::span<const double> u0,
                                      std::size_t p) {
  require_windows(p, "sequential_fine_solve");
  if (u0.size() != fine.dim()) throw DimensionError("sequential_fine_solve: state dimension mismatch");
  std::vector<Vector> blocks;
  blocks.reserve(p + 1);
  blocks.emplace_back(u0.begin(), u0.end());
  for (std::size_t i = 1; i <= p; ++i) blocks.push_back(asyncpr::apply(fine, blocks.back()));
  return InterfaceVector(std::move(blocks));
}

InterfaceVector coarse_init(const AffinePropagator& coarse, std::span<const double> u0,
                            std::size_t p) {
  require_windows(p, "coarse_init");
  if (u0.size() != coarse.dim()) throw DimensionError("coarse_init: state dimension mismatch");
  std::vector<Vector> blocks;
  blocks.reserve(p + 1);
  blocks.emplace_back(u0.begin(), u0.end());
  for (std::size_t i = 1; i <= p; ++i) blocks.push_back(asyncpr::apply(coarse, blocks.back()));
  return InterfaceVector(std::move(blocks));
}

InterfaceVector parareal_iterate(const AffinePropagator& coarse, const AffinePropagator& fine,
                                 const InterfaceVector& lam) {
  if (lam.size() < 2) throw DimensionError("parareal_iterate: need at least two interface blocks");
  require_dims(coarse, fine, lam.block_dim(), "parareal_iterate");
  InterfaceVector next = lam;
  for (std::size_t i = 1; i < lam.size(); ++i) {
    next[i] = parareal_correction(coarse, fine, next[i - 1], lam[i - 1]);
  }
  return next;
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::threshold: return "threshold";
    case StopReason::k_max: return "k_max";
    case StopReason::exact: return "exact";
  }
  return "unknown";
}

SyncTrace run_parareal(const AffinePropagator& coarse, const AffinePropagator& fine,
                       std::span<const double> u0, std::size_t p, double epsilon,
                       std::optional<std::size_t> k_max) {
  require_windows(p, "run_parareal");
  require_dims(coarse, fine, u0.size(), "run_parareal");
  if (!(epsilon >= 0.0)) throw InvalidArgument("run_parareal: epsilon must be nonnegative");
  const std::size_t limit = std::min(k_max.value_or(p), p);

  SyncTrace trace;
  trace.iterates.push_back(coarse_init(coarse, u0, p));
  // Coarse values G(λ_{i-1}^k) kept per window, as the distributed scheme does.
  std::vector<Vector> coarse_prev(p + 1);
  for (std::size_t i = 1; i <= p; ++i) coarse_prev[i] = trace.iterates[0][i];

  std::size_t k = 0;
  while (true) {
    if (k == p) {
      trace.stop_reason = StopReason::exact;
      break;
    }
    if (k == limit) {
      trace.stop_reason = StopReason::k_max;
      break;
    }
    const InterfaceVector& current = trace.iterates.back();
    InterfaceVector next = current;
    for (std::size_t i = k + 1; i <= p; ++i) {
      Vector coarse_new = asyncpr::apply(coarse, next[i - 1]);
      next[i] = parareal_correction(fine, coarse_new, coarse_prev[i], current[i - 1]);
      coarse_prev[i] = std::move(coarse_new);
    }
    ++k;
    trace.deltas.push_back(max_block_change(next, current));
    trace.iterates.push_back(std::move(next));
    if (trace.deltas.back() < epsilon) {
      trace.stop_reason = StopReason::threshold;
      break;
    }
  }
  trace.k_final = k;
  return trace;
}

// --- block system ------------------------------------------------------------

BlockSystem build_parareal_system(const AffinePropagator& coarse, const AffinePropagator& fine,
                                  std::span<const double> u0, std::size_t p) {
  require_windows(p, "build_parareal_system");
  require_dims(coarse, fine, u0.size(), "build_parareal_system");
  const std::size_t d = u0.size();
  const std::size_t n = (p + 1) * d;
  BlockSystem sys{DenseMatrix::identity(n), DenseMatrix::identity(n), Vector(n, 0.0), p, d};
  for (std::size_t i = 1; i <= p; ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        sys.a_block(i * d + r, (i - 1) * d + c) = -fine.matrix(r, c);
        sys.m_block(i * d + r, (i - 1) * d + c) = -coarse.matrix(r, c);
      }
      sys.b_block[i * d + r] = fine.offset[r];
    }
  }
  std::copy(u0.begin(), u0.end(), sys.b_block.begin());
  return sys;
}

DenseMatrix BlockSystem::coarse_block() const {
  DenseMatrix g(block_dim, block_dim);
  for (std::size_t r = 0; r < block_dim; ++r)
    for (std::size_t c = 0; c < block_dim; ++c) g(r, c) = -m_block(block_dim + r, c);
  return g;
}

// Solves M X = R for X, using X_0 = R_0 and X_i = R_i + 𝒢 X_{i-1}.
DenseMatrix BlockSystem::solve_lower(const DenseMatrix& rhs) const {
  const std::size_t d = block_dim;
  const DenseMatrix g = coarse_block();
  DenseMatrix x = rhs;
  for (std::size_t i = 1; i <= p; ++i) {
    for (std::size_t col = 0; col < rhs.cols(); ++col) {
      for (std::size_t r = 0; r < d; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += g(r, c) * x((i - 1) * d + c, col);
        x(i * d + r, col) += s;
      }
    }
  }
  return x;
}

DenseMatrix BlockSystem::iteration_matrix() const {
  return DenseMatrix::identity(a_block.rows()) - solve_lower(a_block);
}

Vector BlockSystem::preconditioned_rhs() const {
  const DenseMatrix col(b_block.size(), 1, b_block);
  const DenseMatrix x = solve_lower(col);
  return Vector(x.entries().begin(), x.entries().end());
}

InterfaceVector BlockSystem::richardson_apply(const InterfaceVector& lam) const {
  const Vector flat = lam.flatten();
  if (flat.size() != a_block.rows()) throw DimensionError("richardson_apply: dimension mismatch");
  return InterfaceVector::unflatten(add(iteration_matrix() * flat, preconditioned_rhs()),
                                    block_dim);
}

Vector BlockSystem::residual(const InterfaceVector& lam) const {
  const Vector flat = lam.flatten();
  if (flat.size() != a_block.rows()) throw DimensionError("residual: dimension mismatch");
  return subtract(a_block * flat, b_block);
}

}  // namespace asyncpr
