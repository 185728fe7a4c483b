#include "asyncpr/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "asyncpr/errors.hpp"

namespace asyncpr {

namespace {

double depth_bound(double alpha_tilde, std::size_t depth, double e0) {
  if (depth == saturated_depth) return 0.0;
  return std::pow(alpha_tilde, static_cast<double>(depth)) * e0;
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw InvalidArgument(std::string("cost model: ") + what + " must be nonnegative");
}

void require_cost(const CostParams& c) {
  require_nonnegative(c.C_F, "C_F");
  require_nonnegative(c.C_G, "C_G");
  require_nonnegative(c.C_bar, "C_bar");
}

}  // namespace

ContractionReport make_contraction_report(double norm_G, double norm_FmG, std::size_t p,
                                          NormKind kind, std::optional<double> theta) {
  if (!(norm_G >= 0.0) || !(norm_FmG >= 0.0)) {
    throw InvalidArgument("contraction report: norms must be nonnegative");
  }
  if (p == 0) throw InvalidArgument("contraction report: p must be at least 1");
  const double th = theta.value_or(norm_G);
  if (!(th >= norm_G)) throw InvalidArgument("contraction report: theta below ||G||");

  ContractionReport r;
  r.norm_G = norm_G;
  r.norm_FmG = norm_FmG;
  r.theta = th;
  r.p = p;
  r.norm_kind = kind;
  r.alpha_tilde = norm_G + norm_FmG;
  const double pd = static_cast<double>(p);
  if (th == 1.0) {
    r.alpha = pd * norm_FmG;
  } else {
    r.alpha = (1.0 - std::pow(th, pd)) / (1.0 - th) * norm_FmG;
  }
  return r;
}

ContractionReport contraction_factors(const AffinePropagator& coarse, const AffinePropagator& fine,
                                      std::size_t p, NormKind kind, std::optional<double> theta) {
  if (coarse.dim() != fine.dim()) throw DimensionError("contraction_factors: dimension mismatch");
  const double g = operator_norm(coarse.matrix, kind);
  const double fg = operator_norm(fine.matrix - coarse.matrix, kind);
  return make_contraction_report(g, fg, p, kind, theta);
}

ConvergenceVerdict sync_convergence_check(const ContractionReport& r) {
  const double first = 1.0 - r.norm_G;
  const double second =
      1.0 + std::pow(r.norm_G, static_cast<double>(r.p)) * r.norm_FmG - r.alpha_tilde;
  return {first > 0.0 && second > 0.0, std::min(first, second)};
}

ConvergenceVerdict async_convergence_check(const ContractionReport& r) {
  const double margin = 1.0 - r.alpha_tilde;
  return {margin > 0.0, margin};
}

FactorComparison compare_factors(const ContractionReport& r) {
  FactorComparison out;
  if (!(r.alpha_tilde < 1.0)) return out;
  out.applicable = true;
  out.alpha_below = r.alpha < r.alpha_tilde;
  out.gap = r.alpha_tilde - r.alpha;
  return out;
}

bool SyncErrorBound::holds(double slack) const {
  for (std::size_t k = 0; k < error.size(); ++k) {
    if (!(error[k] <= bound[k] * (1.0 + slack))) return false;
  }
  return true;
}

SyncErrorBound sync_error_bound(const SyncTrace& trace, const ContractionReport& report,
                                const InterfaceVector& lam_star) {
  if (trace.iterates.empty()) throw InvalidArgument("sync_error_bound: empty trace");
  SyncErrorBound out;
  const double e0 = block_max_norm(subtract(trace.iterates[0], lam_star), report.norm_kind);
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    out.bound.push_back(std::pow(report.alpha, static_cast<double>(k)) * e0);
    out.error.push_back(block_max_norm(subtract(trace.iterates[k], lam_star), report.norm_kind));
  }
  return out;
}

std::vector<std::size_t> contraction_depths(const AsyncTrace& trace) {
  const std::size_t n = trace.initial.size();
  // depth[c][v]: contraction depth of version v of component c.
  std::vector<std::vector<std::size_t>> depth(n, std::vector<std::size_t>{saturated_depth});
  for (std::size_t c : trace.active) depth[c][0] = 0;

  auto current = [&]() {
    std::size_t s = saturated_depth;
    for (std::size_t c : trace.active) s = std::min(s, depth[c].back());
    return s;
  };

  std::vector<std::size_t> sigma{current()};
  sigma.reserve(trace.events.size() + 1);
  for (const UpdateRecord& ev : trace.events) {
    std::size_t d = saturated_depth;
    for (const ReadRecord& rd : ev.reads) d = std::min(d, depth[rd.source][rd.version]);
    depth[ev.component].push_back(d == saturated_depth ? d : d + 1);
    sigma.push_back(current());
  }
  return sigma;
}

bool SigmaEnvelope::holds(double slack) const {
  for (std::size_t k = 0; k < error.size(); ++k) {
    if (!(error[k] <= bound[k] * (1.0 + slack))) return false;
  }
  return true;
}

SigmaEnvelope sigma_envelope(const AsyncTrace& trace, const ContractionReport& report,
                             const InterfaceVector& lam_star, const InterfaceVector& lam0) {
  if (!(report.alpha_tilde < 1.0)) {
    throw InvalidArgument("sigma_envelope: undefined for alpha_tilde >= 1");
  }
  if (lam_star.size() != lam0.size() || lam_star.block_dim() != lam0.block_dim() ||
      trace.initial.size() != lam0.size()) {
    throw DimensionError("sigma_envelope: interface size mismatch");
  }
  if (std::find(trace.active.begin(), trace.active.end(), 0) != trace.active.end()) {
    throw InvalidArgument("sigma_envelope: component 0 must be the exact constant");
  }
  const double e0 = block_max_norm(subtract(lam0, lam_star), report.norm_kind);

  const std::vector<std::size_t> sigma = contraction_depths(trace);
  SigmaEnvelope out;
  const bool with_errors = trace.snapshots.size() == trace.events.size() + 1;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out.sigma.push_back(sigma[k]);
    out.bound.push_back(depth_bound(report.alpha_tilde, sigma[k], e0));
    if (with_errors) {
      out.error.push_back(block_max_norm(subtract(trace.snapshots[k], lam_star), report.norm_kind));
    }
  }
  return out;
}

bool matches_reference(const InterfaceVector& x, const InterfaceVector& ref, double rel) {
  if (x.size() != ref.size() || x.block_dim() != ref.block_dim()) return false;
  const double scale = std::max(block_max_norm(ref, NormKind::infinity),
                                std::numeric_limits<double>::min());
  return block_max_norm(subtract(x, ref), NormKind::infinity) <= rel * scale;
}

std::optional<std::size_t> check_finite_termination(const SyncTrace& trace,
                                                    const InterfaceVector& lam_seq) {
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    if (matches_reference(trace.iterates[k], lam_seq)) return k;
  }
  return std::nullopt;
}

std::optional<std::size_t> check_finite_termination(const AsyncTrace& trace,
                                                    const InterfaceVector& lam_seq) {
  if (trace.snapshots.empty()) {
    throw InvalidArgument("check_finite_termination: trace was recorded without snapshots");
  }
  for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
    if (matches_reference(trace.snapshots[k], lam_seq)) return k;
  }
  return std::nullopt;
}

double sync_cost(const CostParams& c) {
  require_cost(c);
  if (c.k > c.p) throw InvalidArgument("sync_cost: k exceeds p");
  const double p = static_cast<double>(c.p);
  const double k = static_cast<double>(c.k);
  return p * c.C_G + k * (c.C_F + c.C_G + (p - 1.0 - (k + 1.0) / 2.0) * c.C_bar);
}

double async_cost(const CostParams& c) {
  require_cost(c);
  return static_cast<double>(c.p) * c.C_G + static_cast<double>(c.kappa) * (c.C_F + c.C_G);
}

SpeedupReport speedup_bound(const CostParams& c) {
  require_cost(c);
  if (c.p < 2) throw InvalidArgument("speedup_bound: p must be at least 2");
  const double work = c.C_F + c.C_G;
  if (!(work > 0.0)) throw InvalidArgument("speedup_bound: C_F + C_G must be positive");
  SpeedupReport out;
  out.bound = 1.0 + static_cast<double>(c.p - 2) * c.C_bar / work;
  const double denom = async_cost(c);
  if (c.k > 0 && c.kappa > 0 && denom > 0.0) {
    out.achieved = sync_cost(c) / denom;
    out.within_bound = c.kappa < c.k || out.achieved <= out.bound * (1.0 + 1e-12);
  }
  return out;
}

AsymptoticSpeedups asymptotic_speedups(const CostParams& c) {
  require_cost(c);
  if (!(c.C_G > 0.0)) throw InvalidArgument("asymptotic_speedups: undefined limit for C_G = 0");
  const double k = static_cast<double>(c.k);
  return {c.C_F / (c.C_G + k * c.C_bar), c.C_F / c.C_G, 1.0 + k * c.C_bar / c.C_G};
}

double fit_overhead(double measured, std::size_t p, std::size_t k, double C_F, double C_G) {
  const double pd = static_cast<double>(p);
  const double kd = static_cast<double>(k);
  const double denom = kd * (pd - 1.0) - kd * (kd + 1.0) / 2.0;
  if (!(denom > 0.0)) throw InvalidArgument("fit_overhead: overhead term vanishes, cannot fit");
  const double fitted = (measured - pd * C_G - kd * (C_F + C_G)) / denom;
  return std::max(fitted, 0.0);
}

RelaxationVerdict chazan_miranker_check(const DenseMatrix& a, const DenseMatrix& m) {
  if (!a.square() || !m.square() || a.rows() != m.rows()) {
    throw DimensionError("chazan_miranker_check: A and M must be square of equal size");
  }
  const LuFactorization lu(m);
  const DenseMatrix iter = DenseMatrix::identity(a.rows()) - lu.solve(a);
  const double radius = spectral_radius(abs_matrix(iter));
  return {radius < 1.0, radius};
}

AsyncMapping jacobi_mapping(const DenseMatrix& a, std::span<const double> b) {
  if (!a.square() || a.rows() != b.size()) throw DimensionError("jacobi_mapping: size mismatch");
  const std::size_t n = a.rows();
  std::vector<std::vector<std::size_t>> neighbours(n);
  AsyncMapping m;
  m.block_count = n;
  m.arity = 1;
  m.reads.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (a(i, i) == 0.0) throw InvalidArgument("jacobi_mapping: zero diagonal entry");
    m.active.push_back(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || a(i, j) == 0.0) continue;
      neighbours[i].push_back(j);
      m.reads[i].push_back(ReadSpec{j, 1, ReadRule::fresh, 0});
    }
  }
  m.eval = [a, rhs = Vector(b.begin(), b.end()), neighbours](
               std::size_t i, std::span<const Vector* const> in) -> Vector {
    double s = rhs[i];
    for (std::size_t r = 0; r < neighbours[i].size(); ++r) s -= a(i, neighbours[i][r]) * (*in[r])[0];
    return Vector{s / a(i, i)};
  };
  return m;
}

}  // namespace asyncpr
