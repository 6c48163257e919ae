#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "honem/corpus.hpp"
#include "honem/sparse.hpp"

namespace honem {

// Column-major dense matrix. Columns are contiguous so the kernel layer can
// treat each column as a plain vector.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // data[j * rows + i]

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }
};

// Leading singular triplets of a square sparse matrix, sigma descending.
// Columns of `left`/`right` beyond the numerical rank are zero.
struct SingularTriplets {
  std::size_t d = 0;
  std::vector<double> sigma;  // length d
  DenseMatrix left;           // n x d
  DenseMatrix right;          // n x d
};

struct SvdOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 4;
};

// Randomized truncated SVD via Gaussian subspace iteration. Deterministic for
// a fixed (matrix, d, seed, options) tuple on a given platform.
SingularTriplets truncated_svd(const SparseMatrix& s, std::size_t d,
                               std::uint64_t seed, const SvdOptions& options = {});

// Row i holds the embedding of entity i. Content = U*sqrt(sigma),
// context = V*sqrt(sigma).
struct EmbeddingMatrix {
  std::size_t dimension = 0;
  std::uint64_t seed = 0;
  DenseMatrix content;  // n x d
  DenseMatrix context;  // n x d
};

EmbeddingMatrix embed(const SparseMatrix& s, std::size_t d, std::uint64_t seed,
                      const SvdOptions& options = {});

void write_embedding(std::ostream& out, const EmbeddingMatrix& e,
                     const Vocabulary& vocab);

struct LoadedEmbedding {
  EmbeddingMatrix embedding;
  Vocabulary vocabulary;
};

LoadedEmbedding read_embedding(std::istream& in);
LoadedEmbedding read_embedding_file(const std::string& path);

// Test matrix entries: standard normal draws from a seeded mt19937_64 via
// Box-Muller, fixed here so results do not depend on the C++ runtime.
void fill_gaussian(DenseMatrix& m, std::uint64_t seed);

}  // namespace honem
