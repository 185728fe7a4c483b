#include "asyncpr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "asyncpr/errors.hpp"

namespace asyncpr {

namespace {

constexpr std::size_t kPowerIterationCap = 10000;
constexpr double kNormTolerance = 1e-12;
constexpr double kRadiusTolerance = 1e-10;
constexpr double kSingularPivotRatio = 1e-14;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void scale_in_place(Vector& x, double s) {
  for (double& v : x) v *= s;
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        std::string_view op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs "
       << b.rows() << "x" << b.cols();
    throw DimensionError(os.str());
  }
}

void require_square(const DenseMatrix& m, std::string_view op) {
  if (!m.square()) {
    std::ostringstream os;
    os << op << ": matrix must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

// Deterministic start vectors: all-ones, alternating signs, then the
// canonical basis. Together they span R^n, so a matrix that annihilates all
// of them after n steps is nilpotent.
std::vector<Vector> start_vectors(std::size_t n) {
  std::vector<Vector> starts;
  starts.emplace_back(n, 1.0);
  if (n > 1) {
    Vector alt(n);
    for (std::size_t i = 0; i < n; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
    starts.push_back(std::move(alt));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    starts.push_back(std::move(e));
  }
  return starts;
}

bool normalize(Vector& x) {
  const double n = euclidean_norm(x);
  if (n == 0.0) return false;
  scale_in_place(x, 1.0 / n);
  return true;
}

// Removes the component along unit vector q.
void orthogonalize(Vector& x, const Vector& q) {
  const double c = dot(x, q);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * q[i];
}

struct SymmetricRun {
  double eigenvalue = 0.0;
  Vector vector;
  bool converged = false;
};

// Power iteration with Rayleigh quotients on a symmetric positive
// semidefinite matrix.
SymmetricRun symmetric_power_run(const DenseMatrix& s, Vector x) {
  SymmetricRun run;
  if (!normalize(x)) return run;
  double previous = -1.0;
  for (std::size_t it = 0; it < kPowerIterationCap; ++it) {
    Vector y = s * x;
    const double rq = dot(x, y);
    const double ny = euclidean_norm(y);
    run.eigenvalue = std::max(rq, 0.0);
    run.vector = x;
    if (ny == 0.0) {
      run.converged = true;
      return run;
    }
    if (previous >= 0.0 && std::abs(rq - previous) <= kNormTolerance * std::abs(rq)) {
      run.converged = true;
      return run;
    }
    previous = rq;
    scale_in_place(y, 1.0 / ny);
    x = std::move(y);
  }
  return run;
}

enum class RunOutcome { converged, collapsed, capped };

struct GeneralRun {
  RunOutcome outcome = RunOutcome::capped;
  double estimate = 0.0;
  double two_step = 0.0;
};

// Magnitude of the dominant root of z^2 + a z + b.
double dominant_root_magnitude(double a, double b) {
  const double disc = a * a - 4.0 * b;
  if (disc < 0.0) return std::sqrt(std::max(b, 0.0));
  const double r = std::sqrt(disc);
  return std::max(std::abs((-a + r) / 2.0), std::abs((-a - r) / 2.0));
}

GeneralRun general_power_run(const DenseMatrix& m, Vector x) {
  GeneralRun run;
  if (!normalize(x)) {
    run.outcome = RunOutcome::collapsed;
    return run;
  }
  constexpr int kStableStreak = 3;
  double prev_one = -1.0;
  double prev_fit = -1.0;
  int one_streak = 0;
  int fit_streak = 0;
  for (std::size_t it = 0; it < kPowerIterationCap; ++it) {
    Vector u1 = m * x;
    const double n1 = euclidean_norm(u1);
    if (n1 == 0.0) {
      run.outcome = RunOutcome::collapsed;
      return run;
    }
    const Vector u2 = m * u1;
    const double n2 = euclidean_norm(u2);
    run.two_step = std::sqrt(n2);

    // One-step ratio |Mx| / |x| with |x| = 1.
    const double one = n1;
    if (prev_one > 0.0 && std::abs(one - prev_one) <= kRadiusTolerance * one) {
      ++one_streak;
    } else {
      one_streak = 0;
    }
    prev_one = one;
    if (one_streak >= kStableStreak) {
      run.outcome = RunOutcome::converged;
      run.estimate = one;
      return run;
    }

    // Two-step recurrence fit, resolves ± pairs and complex pairs.
    const double g11 = dot(u1, u1);
    const double g12 = dot(u1, x);
    const double g22 = 1.0;
    const double det = g11 * g22 - g12 * g12;
    if (det > 1e-10 * g11 * g22) {
      const double r1 = -dot(u1, u2);
      const double r2 = -dot(x, u2);
      const double a = (r1 * g22 - g12 * r2) / det;
      const double b = (g11 * r2 - g12 * r1) / det;
      double residual2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = u2[i] + a * u1[i] + b * x[i];
        residual2 += r * r;
      }
      const double fit = dominant_root_magnitude(a, b);
      const bool small_residual = n2 == 0.0 || std::sqrt(residual2) <= 1e-8 * n2;
      if (small_residual && prev_fit > 0.0 &&
          std::abs(fit - prev_fit) <= kRadiusTolerance * fit) {
        ++fit_streak;
      } else {
        fit_streak = 0;
      }
      prev_fit = fit;
      if (fit_streak >= kStableStreak) {
        run.outcome = RunOutcome::converged;
        run.estimate = fit;
        return run;
      }
    } else {
      fit_streak = 0;
      prev_fit = -1.0;
    }

    scale_in_place(u1, 1.0 / n1);
    x = std::move(u1);
  }
  run.outcome = RunOutcome::capped;
  return run;
}

}  // namespace

// --- DenseMatrix -----------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw NonFiniteError("DenseMatrix: non-finite fill value");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("DenseMatrix: entry count does not match rows*cols");
  }
  require_finite("DenseMatrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
  require_finite("DenseMatrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
  DenseMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  m.require_finite("DenseMatrix::diagonal");
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double DenseMatrix::max_abs() const noexcept { return asyncpr::max_abs(entries_); }

void DenseMatrix::require_finite(std::string_view context) const {
  for (double v : entries_) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(context) + ": non-finite matrix entry");
    }
  }
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimension mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Vector operator*(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matrix-vector product: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "matrix sum");
  DenseMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b(r, c);
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "matrix difference");
  DenseMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) -= b(r, c);
  return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) *= s;
  out.require_finite("scalar multiple");
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector sum: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector difference: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double max_abs(std::span<const double> x) noexcept {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double euclidean_norm(std::span<const double> x) noexcept {
  // Scaled accumulation keeps tiny and huge entries from under/overflowing.
  const double scale = max_abs(x);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

std::string_view to_string(NormKind kind) noexcept {
  return kind == NormKind::infinity ? "infinity" : "spectral";
}

NormKind norm_kind_from_string(std::string_view name) {
  if (name == "infinity" || name == "inf") return NormKind::infinity;
  if (name == "spectral" || name == "2") return NormKind::spectral;
  throw InvalidArgument("unknown norm kind '" + std::string(name) + "'");
}

double vector_norm(std::span<const double> x, NormKind kind) noexcept {
  return kind == NormKind::infinity ? max_abs(x) : euclidean_norm(x);
}

// --- BlockVector -----------------------------------------------------------

BlockVector::BlockVector(std::size_t block_count, std::size_t block_dim, double fill)
    : blocks_(block_count, Vector(block_dim, fill)), block_dim_(block_dim) {}

BlockVector::BlockVector(std::vector<Vector> blocks) : blocks_(std::move(blocks)) {
  block_dim_ = blocks_.empty() ? 0 : blocks_.front().size();
  for (const auto& b : blocks_) {
    if (b.size() != block_dim_) throw DimensionError("BlockVector: blocks differ in dimension");
  }
}

Vector BlockVector::flatten() const {
  Vector flat;
  flat.reserve(blocks_.size() * block_dim_);
  for (const auto& b : blocks_) flat.insert(flat.end(), b.begin(), b.end());
  return flat;
}

BlockVector BlockVector::unflatten(std::span<const double> flat, std::size_t block_dim) {
  if (block_dim == 0 || flat.size() % block_dim != 0) {
    throw DimensionError("BlockVector::unflatten: length is not a multiple of block_dim");
  }
  std::vector<Vector> blocks;
  for (std::size_t off = 0; off < flat.size(); off += block_dim) {
    blocks.emplace_back(flat.begin() + off, flat.begin() + off + block_dim);
  }
  return BlockVector(std::move(blocks));
}

double weighted_max_norm(const BlockVector& x, std::span<const double> weights) {
  if (weights.size() != x.size()) {
    throw DimensionError("weighted_max_norm: weight count does not match block count");
  }
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      throw InvalidArgument("weighted_max_norm: weights must be strictly positive");
    }
    out = std::max(out, max_abs(x[i]) / weights[i]);
  }
  return out;
}

double block_max_norm(const BlockVector& x, NormKind kind) {
  double out = 0.0;
  for (const auto& b : x.blocks()) out = std::max(out, vector_norm(b, kind));
  return out;
}

BlockVector subtract(const BlockVector& a, const BlockVector& b) {
  if (a.size() != b.size()) throw DimensionError("BlockVector difference: block count mismatch");
  std::vector<Vector> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(subtract(a[i], b[i]));
  return BlockVector(std::move(out));
}

// --- norms and spectra -----------------------------------------------------

double operator_norm(const DenseMatrix& m, NormKind kind) {
  require_square(m, "operator_norm");
  m.require_finite("operator_norm");
  if (kind == NormKind::infinity) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double s = 0.0;
      for (double v : m.row(r)) s += std::abs(v);
      best = std::max(best, s);
    }
    return best;
  }
  if (m.max_abs() == 0.0) return 0.0;

  const DenseMatrix gram = m.transpose() * m;
  const auto starts = start_vectors(m.rows());
  SymmetricRun first;
  std::size_t next = 0;
  for (; next < starts.size(); ++next) {
    first = symmetric_power_run(gram, starts[next]);
    if (first.eigenvalue > 0.0 || !first.converged) break;
  }
  if (!first.converged) {
    throw ConvergenceFailure("operator_norm: power iteration did not converge",
                             std::sqrt(first.eigenvalue), kPowerIterationCap);
  }
  double best = first.eigenvalue;
  // Restart from the alternating-sign vector orthogonal to the first
  // eigenvector; catches a start vector with no dominant component.
  if (m.rows() > 1 && !first.vector.empty()) {
    Vector alt = starts[1];
    orthogonalize(alt, first.vector);
    const SymmetricRun second = symmetric_power_run(gram, alt);
    if (second.converged) best = std::max(best, second.eigenvalue);
  }
  return std::sqrt(best);
}

double spectral_radius(const DenseMatrix& m) {
  require_square(m, "spectral_radius");
  m.require_finite("spectral_radius");
  if (m.rows() == 0 || m.max_abs() == 0.0) return 0.0;

  const auto starts = start_vectors(m.rows());
  std::optional<double> best;
  std::optional<GeneralRun> failed;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const GeneralRun run = general_power_run(m, starts[s]);
    if (run.outcome == RunOutcome::collapsed) continue;
    if (run.outcome == RunOutcome::converged) {
      best = std::max(best.value_or(0.0), run.estimate);
    } else if (!failed) {
      failed = run;
    }
    // The all-ones and alternating starts are both tried; past them, the
    // first basis vector that survives is enough.
    if (s >= 1 && best) break;
  }
  if (best) return *best;
  if (failed) {
    throw ConvergenceFailure("spectral_radius: power iteration did not converge",
                             failed->two_step, kPowerIterationCap);
  }
  // Every start vector was annihilated: the matrix is nilpotent.
  return 0.0;
}

DenseMatrix abs_matrix(const DenseMatrix& m) {
  m.require_finite("abs_matrix");
  DenseMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = std::abs(m(r, c));
  return out;
}

// --- LU ----------------------------------------------------------------------

LuFactorization::LuFactorization(const DenseMatrix& m) : lu_(m), perm_(m.rows()) {
  require_square(m, "LuFactorization");
  m.require_finite("LuFactorization");
  const std::size_t n = m.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double threshold = kSingularPivotRatio * m.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    double pivot_abs = std::abs(lu_(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(lu_(r, k)) > pivot_abs) {
        pivot_abs = std::abs(lu_(r, k));
        pivot_row = r;
      }
    }
    if (pivot_abs <= threshold) {
      std::ostringstream os;
      os << "LU: singular matrix, pivot " << pivot_abs << " in column " << k;
      throw SingularSystemError(os.str(), pivot_abs, k);
    }
    if (pivot_row != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(pivot_row, c));
      std::swap(perm_[k], perm_[pivot_row]);
    }
    const double pivot = lu_(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double factor = lu_(r, k) / pivot;
      lu_(r, k) = factor;
      if (factor == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= factor * lu_(k, c);
    }
  }
}

Vector LuFactorization::solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw DimensionError("LU solve: right-hand side dimension mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
    x[ii] = s / lu_(ii, ii);
  }
  return x;
}

DenseMatrix LuFactorization::solve(const DenseMatrix& rhs) const {
  if (rhs.rows() != size()) throw DimensionError("LU solve: right-hand side row mismatch");
  DenseMatrix out(rhs.rows(), rhs.cols());
  Vector col(rhs.rows());
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t r = 0; r < rhs.rows(); ++r) col[r] = rhs(r, c);
    const Vector x = solve(col);
    for (std::size_t r = 0; r < rhs.rows(); ++r) out(r, c) = x[r];
  }
  return out;
}

}  // namespace asyncpr
