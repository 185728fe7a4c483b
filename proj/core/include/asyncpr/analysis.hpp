#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "asyncpr/async_engine.hpp"
#include "asyncpr/linalg.hpp"
#include "asyncpr/model.hpp"
#include "asyncpr/parareal.hpp"

namespace asyncpr {

// Contraction constants of the Parareal error recursion
//   e_i^{k+1} = 𝒢 e_{i-1}^{k+1} + (ℱ - 𝒢) e_{i-1}^k
// measured in the block max norm whose inner norm matches `norm_kind`.

struct ContractionReport {
  double norm_G = 0.0;
  double norm_FmG = 0.0;
  double theta = 0.0;        // ≥ norm_G
  double alpha = 0.0;        // ((1 - θᵖ)/(1 - θ))·norm_FmG, p·norm_FmG at θ = 1
  double alpha_tilde = 0.0;  // norm_G + norm_FmG
  std::size_t p = 0;
  NormKind norm_kind = NormKind::spectral;
};

/// Builds a report from precomputed norms. Throws InvalidArgument for
/// negative norms, p = 0, or theta < norm_G.
ContractionReport make_contraction_report(double norm_G, double norm_FmG, std::size_t p,
                                          NormKind kind,
                                          std::optional<double> theta = std::nullopt);

/// Norms of the linear parts 𝒢 and ℱ - 𝒢, then make_contraction_report.
ContractionReport contraction_factors(const AffinePropagator& coarse, const AffinePropagator& fine,
                                      std::size_t p, NormKind kind,
                                      std::optional<double> theta = std::nullopt);

struct ConvergenceVerdict {
  bool converges = false;
  double margin = 0.0;  // smallest slack of the defining strict inequalities
};

/// ‖𝒢‖ < 1 and α̃ < 1 + ‖𝒢‖ᵖ‖ℱ - 𝒢‖.
ConvergenceVerdict sync_convergence_check(const ContractionReport& report);

/// α̃ < 1, margin 1 - α̃.
ConvergenceVerdict async_convergence_check(const ContractionReport& report);

struct FactorComparison {
  bool applicable = false;  // α̃ < 1
  bool alpha_below = false;
  double gap = 0.0;  // α̃ - α
};

FactorComparison compare_factors(const ContractionReport& report);

/// Per-k bound αᵏ·‖λ⁰ - λ*‖ for k = 0 … k_final, and the measured errors.
struct SyncErrorBound {
  std::vector<double> bound;
  std::vector<double> error;
  /// error[k] ≤ bound[k]·(1 + slack) for every k.
  bool holds(double slack = 1e-10) const;
};

SyncErrorBound sync_error_bound(const SyncTrace& trace, const ContractionReport& report,
                                const InterfaceVector& lam_star);

inline constexpr std::size_t saturated_depth = std::numeric_limits<std::size_t>::max();

/// Contraction depth σ after k events, k = 0 … stop_event. Inactive
/// components are exact constants (saturated depth); initial versions of
/// active ones have depth 0; an update gets 1 + the smallest depth among
/// the versions it read. σ is the smallest current depth over active
/// components. For a contraction of factor c in a norm compatible with the
/// reads, the error after k events is at most c^σ times the initial error.
std::vector<std::size_t> contraction_depths(const AsyncTrace& trace);

/// σ from contraction_depths and the bound α̃^σ·‖λ⁰ - λ*‖ after k events;
/// a saturated σ bounds by 0.
struct SigmaEnvelope {
  std::vector<std::size_t> sigma;
  std::vector<double> bound;
  std::vector<double> error;  // measured, when the trace has snapshots
  bool holds(double slack = 1e-10) const;
};

/// Throws InvalidArgument when α̃ ≥ 1, DimensionError on size mismatch.
SigmaEnvelope sigma_envelope(const AsyncTrace& trace, const ContractionReport& report,
                             const InterfaceVector& lam_star, const InterfaceVector& lam0);

/// Smallest iteration (sync) or event count (async) after which the state
/// equals lam_seq within 1e-12 relative. Empty when never reached.
std::optional<std::size_t> check_finite_termination(const SyncTrace& trace,
                                                     const InterfaceVector& lam_seq);
std::optional<std::size_t> check_finite_termination(const AsyncTrace& trace,
                                                    const InterfaceVector& lam_seq);

/// ‖x - ref‖_inf ≤ 1e-12·max(‖ref‖_inf, tiny) blockwise over the stack.
bool matches_reference(const InterfaceVector& x, const InterfaceVector& ref, double rel = 1e-12);

// --- cost model, abstract work units -----------------------------------------

struct CostParams {
  std::size_t p = 0;
  double C_F = 0.0;
  double C_G = 0.0;
  double C_bar = 0.0;  // average non-overlapped overhead per iteration
  std::size_t k = 0;
  std::size_t kappa = 0;
};

/// p·C_G + k·(C_F + C_G + (p - 1 - (k + 1)/2)·C̄). Throws for k > p.
double sync_cost(const CostParams& c);

/// p·C_G + κ·(C_F + C_G).
double async_cost(const CostParams& c);

struct SpeedupReport {
  double bound = 0.0;     // 1 + (p - 2)·C̄/(C_F + C_G)
  double achieved = 0.0;  // sync_cost / async_cost
  bool within_bound = true;
};

/// Throws for p < 2 or C_F + C_G = 0.
SpeedupReport speedup_bound(const CostParams& c);

struct AsymptoticSpeedups {
  double sync_vs_seq = 0.0;   // C_F / (C_G + k·C̄)
  double async_vs_seq = 0.0;  // C_F / C_G
  double async_vs_sync = 0.0; // 1 + k·C̄ / C_G
};

/// Limits as p grows. Throws for C_G = 0.
AsymptoticSpeedups asymptotic_speedups(const CostParams& c);

/// Inverts sync_cost for C̄, floored at 0. Throws when k(p - 1) - k(k + 1)/2 ≤ 0.
double fit_overhead(double measured, std::size_t p, std::size_t k, double C_F, double C_G);

// --- linear relaxation ---------------------------------------------------------

struct RelaxationVerdict {
  bool converges = false;
  double radius = 0.0;  // ρ(|I - M⁻¹A|)
};

/// Throws SingularSystemError for singular M.
RelaxationVerdict chazan_miranker_check(const DenseMatrix& a, const DenseMatrix& m);

/// Scalar-component Jacobi relaxation x_i ← (b_i - Σ_{j≠i} a_ij x_j)/a_ii as
/// an async mapping: every component active, one fresh read per neighbour.
AsyncMapping jacobi_mapping(const DenseMatrix& a, std::span<const double> b);

}  // namespace asyncpr
