#include "honem/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "honem/kernels.hpp"

namespace honem {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row >= rows || t.col >= cols)
      throw DataError("sparse entry (" + std::to_string(t.row) + "," +
                      std::to_string(t.col) + ") outside " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      " matrix");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });

  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < entries.size() && entries[j].row == entries[i].row &&
           entries[j].col == entries[i].col) {
      sum += entries[j].value;
      ++j;
    }
    if (sum != 0.0) {
      m.col_idx_.push_back(entries[i].col);
      m.values_.push_back(sum);
      ++m.row_ptr_[entries[i].row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

double SparseMatrix::at(EntityId i, EntityId j) const {
  if (i >= rows_ || j >= cols_) return 0.0;
  auto idx = row_indices(i);
  auto it = std::lower_bound(idx.begin(), idx.end(), j);
  if (it == idx.end() || *it != j) return 0.0;
  return row_values(i)[static_cast<std::size_t>(it - idx.begin())];
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k)
      out.push_back({static_cast<EntityId>(r), idx[k], val[k]});
  }
  return out;
}

SparseMatrix SparseMatrix::transposed() const {
  auto t = triplets();
  for (Triplet& e : t) std::swap(e.row, e.col);
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::scaled(double c) const {
  SparseMatrix m = *this;
  kernels::scal(c, m.values_.data(), m.values_.size());
  return m;
}

void SparseMatrix::multiply(const double* x, double* y) const {
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t begin = row_ptr_[r];
    y[r] = kernels::sparse_dot(values_.data() + begin, col_idx_.data() + begin,
                               x, row_ptr_[r + 1] - begin);
  }
}

bool SparseMatrix::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double SparseMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace honem
