#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "honem/common.hpp"

namespace honem {

struct Triplet {
  EntityId row = 0;
  EntityId col = 0;
  double value = 0.0;
};

// Immutable CSR matrix. Entries are kept sorted by (row, col) and exact
// zeros are pruned at construction, so nnz() counts nonzero values.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Sorts by (row, col), sums duplicates, drops zeros.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  // Value at (i, j); 0 for absent entries.
  double at(EntityId i, EntityId j) const;

  std::span<const EntityId> row_indices(std::size_t i) const {
    return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  std::vector<Triplet> triplets() const;

  SparseMatrix transposed() const;
  SparseMatrix scaled(double c) const;

  // y = A x, kernel-dispatched row products.
  void multiply(const double* x, double* y) const;

  bool all_finite() const;
  double frobenius_norm() const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
           a.row_ptr_ == b.row_ptr_ && a.col_idx_ == b.col_idx_ &&
           a.values_ == b.values_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<EntityId> col_idx_;
  std::vector<double> values_;
};

}  // namespace honem
