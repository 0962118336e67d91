#pragma once

// Sparse symmetric matrices and their Cholesky factorization.
//
// SparsePrecision stores the upper triangle (row <= col) in compressed
// column form. The sparsity pattern is shared between matrices produced
// from one another with new values, which lets a symbolic analysis be
// computed once and reused for every numerical refactorization.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace inlite {

using DenseVector = Eigen::VectorXd;

struct Triplet {
  int row;
  int col;
  double value;
};

class SparsePrecision {
 public:
  SparsePrecision() = default;

  // Canonical upper-triangle storage. Entries given below the diagonal are
  // mirrored; duplicates are summed. Explicit zeros stay in the pattern.
  static SparsePrecision from_triplets(int dim, std::span<const Triplet> triplets);
  static SparsePrecision identity(int dim, double scale = 1.0);

  int dim() const { return dim_; }
  // Entries stored in the upper triangle, diagonal included.
  std::size_t stored_nonzeros() const { return values_.size(); }
  // Nonzeros of the full symmetric matrix (both triangles).
  std::size_t nonzeros() const;

  double operator()(int row, int col) const;

  std::span<const int> col_ptr() const { return pattern_->col_ptr; }
  std::span<const int> row_index() const { return pattern_->row_index; }
  std::span<const double> values() const { return values_; }

  // Same pattern, new values (length must equal stored_nonzeros()).
  SparsePrecision with_values(std::vector<double> values) const;

  // Position of (row, col) in values(), or -1 when not stored.
  std::ptrdiff_t find(int row, int col) const;

  DenseVector multiply(const DenseVector& x) const;
  double quadratic_form(const DenseVector& x) const;
  Eigen::MatrixXd to_dense() const;
  std::vector<Triplet> to_triplets() const;

  std::uint64_t pattern_hash() const;
  bool same_pattern(const SparsePrecision& other) const;

 private:
  struct Pattern {
    std::vector<int> col_ptr;
    std::vector<int> row_index;
  };

  int dim_ = 0;
  std::shared_ptr<const Pattern> pattern_;
  std::vector<double> values_;
};

SparsePrecision build_sparse(std::span<const Triplet> triplets, int dim);

// Q + diag(c). The off-diagonal pattern is untouched; a missing diagonal
// entry is inserted.
SparsePrecision add_diag(const SparsePrecision& q, const DenseVector& c);

// Text fixture format: header "dim nnz", then nnz lines "row col value",
// 0-based.
SparsePrecision read_triplets(std::istream& in);
SparsePrecision read_triplet_file(const std::string& path);

enum class Ordering { kMinimumDegree, kNatural };

// Fill-reducing permutation: perm[k] is the original index placed at k.
std::vector<int> minimum_degree_ordering(const SparsePrecision& q);

// Ordering, elimination tree and column structure of L for one sparsity
// pattern. Immutable; shared by every factor computed with it.
class SymbolicCholesky {
 public:
  static std::shared_ptr<const SymbolicCholesky> analyze(
      const SparsePrecision& q, Ordering ordering = Ordering::kMinimumDegree);

  int dim() const { return dim_; }
  std::span<const int> permutation() const { return perm_; }
  std::span<const int> inverse_permutation() const { return pinv_; }
  std::span<const int> parent() const { return parent_; }
  std::span<const int> l_col_ptr() const { return l_col_ptr_; }
  std::size_t l_nonzeros() const { return static_cast<std::size_t>(l_col_ptr_.back()); }
  std::uint64_t pattern_hash() const { return pattern_hash_; }

 private:
  friend class CholeskyFactor;

  int dim_ = 0;
  std::uint64_t pattern_hash_ = 0;
  std::vector<int> perm_;
  std::vector<int> pinv_;
  std::vector<int> parent_;
  std::vector<int> l_col_ptr_;
  // Upper triangle of P Q P^T and where each value of Q lands in it.
  std::vector<int> c_col_ptr_;
  std::vector<int> c_row_index_;
  std::vector<int> q_to_c_;
};

enum class VarianceMethod { kUnitSolves, kSelectedInverse };

// L L^T = P Q P^T.
class CholeskyFactor {
 public:
  static CholeskyFactor factorize(const SparsePrecision& q,
                                  std::shared_ptr<const SymbolicCholesky> symbolic);

  int dim() const { return symbolic_->dim(); }
  std::span<const int> permutation() const { return symbolic_->permutation(); }
  const std::shared_ptr<const SymbolicCholesky>& symbolic() const { return symbolic_; }

  DenseVector solve(const DenseVector& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  double log_det() const;
  DenseVector marginal_variances(VarianceMethod method = VarianceMethod::kUnitSolves) const;

  // L in the permuted order, dense. Meant for small test problems.
  Eigen::MatrixXd lower_dense() const;

 private:
  void forward(double* x) const;
  void backward(double* x) const;

  std::shared_ptr<const SymbolicCholesky> symbolic_;
  std::vector<int> l_row_index_;
  std::vector<double> l_values_;
};

CholeskyFactor cholesky(const SparsePrecision& q, Ordering ordering = Ordering::kMinimumDegree);

}  // namespace inlite
