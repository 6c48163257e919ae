#include "honem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "honem/kernels.hpp"
#include "honem/parallel.hpp"

namespace honem {

namespace {

constexpr double kTwoPi = 6.2831853071795864769;

// y = A x for every column of x. Columns are independent, so workers write
// disjoint output columns and the result is schedule-invariant.
void spmm(const SparseMatrix& a, const DenseMatrix& x, DenseMatrix& y) {
  parallel::parallel_for(x.cols, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) a.multiply(x.col(j), y.col(j));
  });
}

double column_norm(const DenseMatrix& m, std::size_t j) {
  return std::sqrt(kernels::dot(m.col(j), m.col(j), m.rows));
}

// In-place modified Gram-Schmidt with one re-orthogonalization pass.
// Columns that collapse below `drop_tol` are zeroed rather than normalized,
// so rank-deficient inputs yield zero columns instead of noise directions.
void orthonormalize(DenseMatrix& q, double drop_tol) {
  const std::size_t n = q.rows;
  for (std::size_t j = 0; j < q.cols; ++j) {
    double* col = q.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        const double proj = kernels::dot(q.col(k), col, n);
        if (proj != 0.0) kernels::axpy(-proj, q.col(k), col, n);
      }
    const double norm = column_norm(q, j);
    if (norm <= drop_tol)
      std::fill(col, col + n, 0.0);
    else
      kernels::scal(1.0 / norm, col, n);
  }
}

// One-sided Jacobi: right-rotate column pairs of `g` until all pairs are
// orthogonal, accumulating the rotations into `w` (m x m, starts identity).
// On exit g = original_g * w, with mutually orthogonal columns.
void jacobi_orthogonalize(DenseMatrix& g, DenseMatrix& w) {
  const std::size_t n = g.rows;
  const std::size_t m = g.cols;
  for (std::size_t j = 0; j < m; ++j) w(j, j) = 1.0;

  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 64;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) {
        const double app = kernels::dot(g.col(p), g.col(p), n);
        const double aqq = kernels::dot(g.col(q), g.col(q), n);
        const double apq = kernels::dot(g.col(p), g.col(q), n);
        if (std::abs(apq) <= kTol * std::sqrt(app * aqq) || apq == 0.0)
          continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double gp = g(i, p), gq = g(i, q);
          g(i, p) = c * gp - s * gq;
          g(i, q) = s * gp + c * gq;
        }
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
      }
    if (!rotated) return;
  }
}

}  // namespace

void fill_gaussian(DenseMatrix& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Box-Muller over explicit 53-bit uniforms. std::normal_distribution is
  // implementation-defined, this is not.
  const auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  std::size_t i = 0;
  const std::size_t total = m.data.size();
  while (i < total) {
    const double u1 = ((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    m.data[i++] = r * std::cos(kTwoPi * u2);
    if (i < total) m.data[i++] = r * std::sin(kTwoPi * u2);
  }
}

SingularTriplets truncated_svd(const SparseMatrix& s, std::size_t d,
                               std::uint64_t seed, const SvdOptions& options) {
  if (s.rows() != s.cols())
    throw std::invalid_argument("truncated_svd: matrix must be square");
  const std::size_t n = s.rows();
  if (d < 1 || d > n)
    throw std::invalid_argument("truncated_svd: need 1 <= d <= " +
                                std::to_string(n));
  if (!s.all_finite()) throw DataError("truncated_svd: non-finite input entry");

  const std::size_t m = std::min(d + options.oversampling, n);
  const double drop_tol = 1e-12 * std::max(1.0, s.frobenius_norm());

  DenseMatrix omega(n, m);
  fill_gaussian(omega, seed);

  const SparseMatrix st = s.transposed();
  DenseMatrix q(n, m), z(n, m);
  spmm(s, omega, q);
  orthonormalize(q, drop_tol);
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    spmm(st, q, z);
    orthonormalize(z, drop_tol);
    spmm(s, z, q);
    orthonormalize(q, drop_tol);
  }

  // G = S^T Q is n x m; its SVD G = V Sigma W^T gives S ~= (Q W) Sigma V^T.
  DenseMatrix g(n, m);
  spmm(st, q, g);
  DenseMatrix w(m, m);
  jacobi_orthogonalize(g, w);

  std::vector<double> sigma_all(m);
  for (std::size_t j = 0; j < m; ++j) sigma_all[j] = column_norm(g, j);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sigma_all[a] > sigma_all[b];
  });

  SingularTriplets out;
  out.d = d;
  out.sigma.assign(d, 0.0);
  out.left = DenseMatrix(n, d);
  out.right = DenseMatrix(n, d);

  const double sigma_floor =
      sigma_all[order[0]] * static_cast<double>(n) * 1e-15;
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t src = order[j];
    const double sigma = sigma_all[src];
    if (sigma <= sigma_floor || sigma == 0.0) continue;  // keep zero columns
    out.sigma[j] = sigma;
    // right vector: normalized column of G
    for (std::size_t i = 0; i < n; ++i) out.right(i, j) = g(i, src) / sigma;
    // left vector: Q * (column src of W)
    for (std::size_t k = 0; k < m; ++k) {
      const double wk = w(k, src);
      if (wk != 0.0) kernels::axpy(wk, q.col(k), out.left.col(j), n);
    }
    // sign convention: largest-magnitude entry of the left vector positive,
    // first such entry on ties
    std::size_t arg = 0;
    double best = std::abs(out.left(0, j));
    for (std::size_t i = 1; i < n; ++i) {
      const double a = std::abs(out.left(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.left(arg, j) < 0.0) {
      kernels::scal(-1.0, out.left.col(j), n);
      kernels::scal(-1.0, out.right.col(j), n);
    }
  }
  return out;
}

EmbeddingMatrix embed(const SparseMatrix& s, std::size_t d, std::uint64_t seed,
                      const SvdOptions& options) {
  SingularTriplets svd = truncated_svd(s, d, seed, options);
  const std::size_t n = s.rows();
  EmbeddingMatrix e;
  e.dimension = d;
  e.seed = seed;
  e.content = DenseMatrix(n, d);
  e.context = DenseMatrix(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    const double scale = std::sqrt(svd.sigma[j]);
    for (std::size_t i = 0; i < n; ++i) {
      e.content(i, j) = svd.left(i, j) * scale;
      e.context(i, j) = svd.right(i, j) * scale;
    }
  }
  return e;
}

void write_embedding(std::ostream& out, const EmbeddingMatrix& e,
                     const Vocabulary& vocab) {
  const std::size_t n = e.content.rows;
  if (vocab.size() != n) throw DataError("embedding/vocabulary size mismatch");
  out << "#honem-embedding " << n << ' ' << e.dimension << ' ' << e.seed << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << vocab.token_of(static_cast<EntityId>(i));
    for (std::size_t j = 0; j < e.dimension; ++j)
      out << ' ' << format_double(e.content(i, j));
    for (std::size_t j = 0; j < e.dimension; ++j)
      out << ' ' << format_double(e.context(i, j));
    out << '\n';
  }
}

LoadedEmbedding read_embedding(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty embedding file");
  auto header = split_ws(line);
  if (header.size() != 4 || header[0] != "#honem-embedding")
    throw DataError("bad embedding header: '" + line + "'");
  const auto n = parse_int<std::size_t>(header[1], "embedding header");
  const auto d = parse_int<std::size_t>(header[2], "embedding header");
  const auto seed = parse_int<std::uint64_t>(header[3], "embedding header");

  LoadedEmbedding loaded;
  loaded.embedding.dimension = d;
  loaded.embedding.seed = seed;
  loaded.embedding.content = DenseMatrix(n, d);
  loaded.embedding.context = DenseMatrix(n, d);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (row >= n) throw DataError("embedding file has more rows than header says");
    if (fields.size() != 1 + 2 * d)
      throw DataError("embedding row '" + std::string(fields[0]) + "': expected " +
                      std::to_string(1 + 2 * d) + " fields, got " +
                      std::to_string(fields.size()));
    if (loaded.vocabulary.contains(fields[0]))
      throw DataError("duplicate embedding token '" + std::string(fields[0]) + "'");
    loaded.vocabulary.intern(fields[0]);
    for (std::size_t j = 0; j < d; ++j)
      loaded.embedding.content(row, j) =
          parse_double(fields[1 + j], "embedding value");
    for (std::size_t j = 0; j < d; ++j)
      loaded.embedding.context(row, j) =
          parse_double(fields[1 + d + j], "embedding value");
    ++row;
  }
  if (in.bad()) throw DataError("I/O failure while reading embedding");
  if (row != n)
    throw DataError("embedding header announces " + std::to_string(n) +
                    " rows, file holds " + std::to_string(row));
  return loaded;
}

LoadedEmbedding read_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file '" + path + "'");
  return read_embedding(in);
}

}  // namespace honem
