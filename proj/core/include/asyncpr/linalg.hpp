#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace asyncpr {

using Vector = std::vector<double>;

/// Dense row-major matrix. Every entry is finite; constructors reject NaN/Inf.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  double operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return entries_[r * cols_ + c];
  }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<const double> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  DenseMatrix transpose() const;
  double max_abs() const noexcept;

  /// Throws NonFiniteError if any entry is NaN or infinite.
  void require_finite(std::string_view context) const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> x) noexcept;
double euclidean_norm(std::span<const double> x) noexcept;

/// Closed set of norms the analysis can be carried out in.
///  - infinity: max-abs on vectors, max absolute row sum on matrices
///  - spectral: Euclidean norm on vectors, largest singular value on matrices
enum class NormKind { infinity, spectral };

std::string_view to_string(NormKind kind) noexcept;
NormKind norm_kind_from_string(std::string_view name);

/// Vector norm consistent with operator_norm(., kind).
double vector_norm(std::span<const double> x, NormKind kind) noexcept;

/// Ordered list of equally sized blocks, e.g. interface states (λ_0, …, λ_p).
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(std::size_t block_count, std::size_t block_dim, double fill = 0.0);
  explicit BlockVector(std::vector<Vector> blocks);

  std::size_t size() const noexcept { return blocks_.size(); }
  std::size_t block_dim() const noexcept { return block_dim_; }

  const Vector& operator[](std::size_t i) const { return blocks_[i]; }
  Vector& operator[](std::size_t i) { return blocks_[i]; }
  const std::vector<Vector>& blocks() const noexcept { return blocks_; }

  Vector flatten() const;
  static BlockVector unflatten(std::span<const double> flat, std::size_t block_dim);

  friend bool operator==(const BlockVector&, const BlockVector&) = default;

 private:
  std::vector<Vector> blocks_;
  std::size_t block_dim_ = 0;
};

/// max_i ||x_i||_inf / w_i. Throws InvalidArgument for a nonpositive weight
/// and DimensionError when the weight count differs from the block count.
double weighted_max_norm(const BlockVector& x, std::span<const double> weights);

/// max_i ||x_i|| with the inner vector norm selected by kind.
double block_max_norm(const BlockVector& x, NormKind kind = NormKind::infinity);

/// Block-wise difference a - b.
BlockVector subtract(const BlockVector& a, const BlockVector& b);

/// Infinity kind is the exact max row sum. Spectral kind runs power iteration
/// on MᵀM (relative tolerance 1e-12, at most 10 000 steps) and throws
/// ConvergenceFailure carrying the last estimate if it does not settle.
double operator_norm(const DenseMatrix& m, NormKind kind);

/// Largest eigenvalue magnitude by power iteration from the all-ones vector
/// (tolerance 1e-10, at most 10 000 steps). A dominant complex pair is
/// resolved by fitting the two-step recurrence x_{k+2} + a x_{k+1} + b x_k = 0
/// on the iterates; if neither estimate settles, ConvergenceFailure carries
/// the two-step ratio sqrt(|M²x| / |x|).
double spectral_radius(const DenseMatrix& m);

DenseMatrix abs_matrix(const DenseMatrix& m);

/// LU with partial pivoting. A pivot below 1e-14 * max|entry| is singular.
class LuFactorization {
 public:
  explicit LuFactorization(const DenseMatrix& m);

  std::size_t size() const noexcept { return lu_.rows(); }
  Vector solve(std::span<const double> rhs) const;
  DenseMatrix solve(const DenseMatrix& rhs) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace asyncpr
