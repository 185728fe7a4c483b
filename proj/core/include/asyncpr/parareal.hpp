#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "asyncpr/linalg.hpp"
#include "asyncpr/model.hpp"

namespace asyncpr {

/// Interface states (λ_0, …, λ_p) at the window boundaries T_0 … T_p.
using InterfaceVector = BlockVector;

/// The Parareal correction for one window:
///   F(prev_old) + (G(prev_new) - G(prev_old)).
/// Grouping the coarse difference first makes it exactly zero when both
/// inputs are the same value, so an unchanged predecessor yields F(prev)
/// bit for bit. Shared by the synchronous and asynchronous drivers.
Vector parareal_correction(const AffinePropagator& coarse, const AffinePropagator& fine,
                           std::span<const double> prev_new, std::span<const double> prev_old);

/// Same correction when G(prev_new) is already available.
Vector parareal_correction(const AffinePropagator& fine, std::span<const double> coarse_new,
                           std::span<const double> coarse_old, std::span<const double> prev_old);

/// λ_0 = u0, λ_i = F(λ_{i-1}): the reference the iterations converge to.
InterfaceVector sequential_fine_solve(const AffinePropagator& fine, std::span<const double> u0,
                                      std::size_t p);

/// λ⁰_0 = u0, λ⁰_i = G(λ⁰_{i-1}).
InterfaceVector coarse_init(const AffinePropagator& coarse, std::span<const double> u0,
                            std::size_t p);

/// One full Parareal sweep in ascending i; λ⁺_{i} uses the freshly updated
/// λ⁺_{i-1} in its coarse term.
InterfaceVector parareal_iterate(const AffinePropagator& coarse, const AffinePropagator& fine,
                                 const InterfaceVector& lam);

enum class StopReason { threshold, k_max, exact };
std::string_view to_string(StopReason reason) noexcept;

struct SyncTrace {
  std::vector<InterfaceVector> iterates;  // λ⁰, λ¹, …, λ^{k_final}
  std::size_t k_final = 0;
  StopReason stop_reason = StopReason::exact;
  std::vector<double> deltas;  // deltas[k-1] = ||λᵏ - λᵏ⁻¹||_inf

  const InterfaceVector& final_state() const { return iterates.back(); }
};

/// Distributed Parareal with partial termination: in the sweep producing
/// λ^{k+1}, components i <= k are copied rather than recomputed.
/// Stops when ||λᵏ - λᵏ⁻¹||_inf < epsilon, at k = k_max, or at k = p.
/// k_max defaults to p and is clamped to p.
SyncTrace run_parareal(const AffinePropagator& coarse, const AffinePropagator& fine,
                       std::span<const double> u0, std::size_t p, double epsilon,
                       std::optional<std::size_t> k_max = std::nullopt);

/// A λ = b with M the coarse preconditioner; Parareal is the Richardson
/// iteration λ ↦ (I - M⁻¹A) λ + M⁻¹ b on this system.
struct BlockSystem {
  DenseMatrix a_block;  // identity diagonal, -ℱ subdiagonal
  DenseMatrix m_block;  // identity diagonal, -𝒢 subdiagonal
  Vector b_block;       // (u0, ζ, …, ζ) flattened
  std::size_t p = 0;
  std::size_t block_dim = 0;

  /// I - M⁻¹A by block forward substitution.
  DenseMatrix iteration_matrix() const;
  /// M⁻¹ b by block forward substitution.
  Vector preconditioned_rhs() const;
  /// (I - M⁻¹A) λ + M⁻¹ b on the stacked vector.
  InterfaceVector richardson_apply(const InterfaceVector& lam) const;
  /// A λ - b.
  Vector residual(const InterfaceVector& lam) const;

 private:
  DenseMatrix coarse_block() const;
  DenseMatrix solve_lower(const DenseMatrix& rhs) const;
};

BlockSystem build_parareal_system(const AffinePropagator& coarse, const AffinePropagator& fine,
                                  std::span<const double> u0, std::size_t p);

}  // namespace asyncpr
