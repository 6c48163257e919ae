#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "honem/neighborhood.hpp"
#include "honem/rng.hpp"
#include "honem/spectral.hpp"
#include "oracles/dense_svd_oracle.hpp"

using honem::DataError;
using honem::DenseMatrix;
using honem::EmbeddingMatrix;
using honem::SingularTriplets;
using honem::SparseMatrix;
using honem::Triplet;

namespace {

SparseMatrix diag(std::vector<double> values) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < values.size(); ++i)
    t.push_back({static_cast<honem::EntityId>(i),
                 static_cast<honem::EntityId>(i), values[i]});
  return SparseMatrix::from_triplets(values.size(), values.size(),
                                     std::move(t));
}

// Random hollow sparse matrix with geometrically decaying column scales,
// which gives a well-separated leading spectrum most of the time.
SparseMatrix random_sparse(std::size_t n, std::uint64_t seed,
                           double density = 0.25, double decay = 0.8) {
  std::mt19937_64 g(seed);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (honem::rng::uniform01(g) >= density) continue;
      const double v = (0.2 + 0.8 * honem::rng::uniform01(g)) *
                       std::pow(decay, static_cast<double>(j));
      t.push_back({static_cast<honem::EntityId>(i),
                   static_cast<honem::EntityId>(j), v});
    }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix walk_matrix() {
  std::istringstream in("A C D E A C D B C E\n");
  auto corpus = honem::parse_corpus(in);
  honem::ExtractOptions opts;
  opts.threshold_scale = 0.4;
  auto rules = honem::extract_rules(corpus, opts);
  return honem::combine(honem::order_matrices(rules, corpus.n_entities()))
      .matrix;
}

double dense_residual(const SparseMatrix& s, const SingularTriplets& f) {
  const std::size_t n = s.rows();
  oracle::Dense a = oracle::dense_columns(s);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double rec = 0.0;
      for (std::size_t k = 0; k < f.d; ++k)
        rec += f.sigma[k] * f.left(i, k) * f.right(j, k);
      const double diff = a[j][i] - rec;
      acc += diff * diff;
    }
  return std::sqrt(acc);
}

void check_orthonormal(const DenseMatrix& m, std::size_t upto, double tol) {
  for (std::size_t a = 0; a < upto; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m.rows; ++i) dot += m(i, a) * m(i, b);
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= tol);
    }
}

}  // namespace

TEST_CASE("gaussian fill is seed-deterministic with sane moments") {
  DenseMatrix a(200, 200), b(200, 200);
  honem::fill_gaussian(a, 42);
  honem::fill_gaussian(b, 42);
  CHECK(a.data == b.data);

  honem::fill_gaussian(b, 43);
  CHECK(a.data != b.data);

  double mean = 0.0;
  for (double x : a.data) mean += x;
  mean /= static_cast<double>(a.data.size());
  double var = 0.0;
  for (double x : a.data) var += (x - mean) * (x - mean);
  var /= static_cast<double>(a.data.size());
  CHECK(std::abs(mean) < 0.025);
  CHECK(var > 0.95);
  CHECK(var < 1.05);
}

TEST_CASE("rank-1 factor of a diagonal matrix") {
  SingularTriplets f = honem::truncated_svd(diag({3.0, 2.0}), 1, 7);
  REQUIRE(f.sigma.size() == 1);
  CHECK(f.sigma[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.left(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(f.left(1, 0)) < 1e-10);
  CHECK(f.right(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(f.right(1, 0)) < 1e-10);
}

TEST_CASE("zero matrix factors to zero") {
  SingularTriplets f = honem::truncated_svd(SparseMatrix(2, 2), 1, 7);
  CHECK(f.sigma[0] == 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(f.left(i, 0) == 0.0);
    CHECK(f.right(i, 0) == 0.0);
  }
  EmbeddingMatrix e = honem::embed(SparseMatrix(2, 2), 1, 7);
  CHECK(e.content(0, 0) == 0.0);
  CHECK(e.context(1, 0) == 0.0);
}

TEST_CASE("full factor of a diagonal matrix and its embedding") {
  SingularTriplets f = honem::truncated_svd(diag({3.0, 2.0}), 2, 11);
  CHECK(f.sigma[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.sigma[1] == doctest::Approx(2.0).epsilon(1e-10));

  EmbeddingMatrix e = honem::embed(diag({3.0, 2.0}), 2, 11);
  CHECK(e.content(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(std::abs(e.content(0, 1)) < 1e-10);
  CHECK(std::abs(e.content(1, 0)) < 1e-10);
  CHECK(e.content(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(e.context(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));

  EmbeddingMatrix single = honem::embed(diag({4.0}), 1, 3);
  CHECK(single.content(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(single.context(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("leading spectrum matches a dense reference on random matrices") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    SparseMatrix s = random_sparse(50, seed);
    oracle::OracleSvd ref = oracle::oracle_svd(s);
    if (ref.sigma[4] < 1.1 * ref.sigma[5]) continue;  // needs a gap at d=5
    ++checked;

    SingularTriplets f = honem::truncated_svd(s, 5, seed * 977 + 1);
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(f.sigma[j] - ref.sigma[j]) <= 1e-8);

    const double opt =
        std::sqrt(oracle::optimal_residual_sq(ref.sigma, 5));
    CHECK(dense_residual(s, f) <= opt * (1.0 + 1e-6) + 1e-12);

    check_orthonormal(f.left, 5, 1e-8);
    check_orthonormal(f.right, 5, 1e-8);
  }
  CHECK(checked >= 6);
}

TEST_CASE("full-rank factorization reproduces the worked example") {
  SparseMatrix s = walk_matrix();
  oracle::OracleSvd ref = oracle::oracle_svd(s);
  REQUIRE(ref.sigma[4] > 1e-8);  // nonsingular, so d = 5 is exact

  SingularTriplets f = honem::truncated_svd(s, 5, 19);
  CHECK(dense_residual(s, f) <= 1e-8);

  EmbeddingMatrix e = honem::embed(s, 5, 19);
  double frob = 0.0;
  oracle::Dense a = oracle::dense_columns(s);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < 5; ++i) {
      double score = 0.0;
      for (std::size_t k = 0; k < 5; ++k)
        score += e.content(i, k) * e.context(j, k);
      frob += (score - a[j][i]) * (score - a[j][i]);
    }
  CHECK(std::sqrt(frob) <= 1e-8);
}

TEST_CASE("matrix scaling multiplies embeddings by the root of the scale") {
  SparseMatrix s = walk_matrix();
  EmbeddingMatrix base = honem::embed(s, 5, 23);
  for (double c : {10.0, 0.1}) {
    EmbeddingMatrix scaled = honem::embed(s.scaled(c), 5, 23);
    const double root = std::sqrt(c);
    for (std::size_t i = 0; i < base.content.data.size(); ++i) {
      CHECK(std::abs(scaled.content.data[i] - root * base.content.data[i]) <=
            1e-10);
      CHECK(std::abs(scaled.context.data[i] - root * base.context.data[i]) <=
            1e-10);
    }
  }
}

TEST_CASE("factorization is bitwise deterministic per seed") {
  SparseMatrix s = random_sparse(30, 5);
  SingularTriplets a = honem::truncated_svd(s, 4, 99);
  SingularTriplets b = honem::truncated_svd(s, 4, 99);
  CHECK(a.sigma == b.sigma);
  CHECK(a.left.data == b.left.data);
  CHECK(a.right.data == b.right.data);

  // Different probes converge to the same subspace, not the same bits.
  SingularTriplets other = honem::truncated_svd(s, 4, 100);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(other.sigma[j] - a.sigma[j]) <= 1e-8);
}

TEST_CASE("residual decreases as dimensions are added") {
  SparseMatrix s = walk_matrix();
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t d = 1; d <= 5; ++d) {
    const double r = dense_residual(s, honem::truncated_svd(s, d, 31));
    CHECK(r <= prev + 1e-12);
    prev = r;
  }
  CHECK(prev <= 1e-8);  // full rank reached
}

TEST_CASE("dimension and input validation") {
  SparseMatrix s = diag({1.0, 2.0});
  CHECK_THROWS_AS(honem::truncated_svd(s, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(honem::truncated_svd(s, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(honem::truncated_svd(SparseMatrix(2, 3), 1, 1),
                  std::invalid_argument);

  SparseMatrix bad = SparseMatrix::from_triplets(
      2, 2, {{0, 1, std::numeric_limits<double>::infinity()}});
  CHECK_THROWS_AS(honem::truncated_svd(bad, 1, 1), DataError);
}

TEST_CASE("embedding file round-trip is bit exact") {
  SparseMatrix s = walk_matrix();
  EmbeddingMatrix e = honem::embed(s, 3, 77);
  honem::Vocabulary vocab;
  for (const char* t : {"A", "C", "D", "E", "B"}) vocab.intern(t);

  std::ostringstream out;
  honem::write_embedding(out, e, vocab);
  CHECK(out.str().rfind("#honem-embedding 5 3 77\n", 0) == 0);

  std::istringstream in(out.str());
  honem::LoadedEmbedding back = honem::read_embedding(in);
  CHECK(back.embedding.dimension == 3);
  CHECK(back.embedding.seed == 77);
  CHECK(back.embedding.content.data == e.content.data);
  CHECK(back.embedding.context.data == e.context.data);
  CHECK(back.vocabulary.tokens() == vocab.tokens());
}

TEST_CASE("malformed embedding files are rejected") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return honem::read_embedding(in);
  };
  CHECK_THROWS_AS(read(""), DataError);
  CHECK_THROWS_AS(read("#wrong 1 1 0\nA 1 1\n"), DataError);
  CHECK_THROWS_AS(read("#honem-embedding 1 1 0\nA 1\n"), DataError);
  CHECK_THROWS_AS(read("#honem-embedding 2 1 0\nA 1 1\n"), DataError);
  CHECK_THROWS_AS(read("#honem-embedding 1 1 0\nA 1 1\nB 1 1\n"), DataError);
  CHECK_THROWS_AS(read("#honem-embedding 2 1 0\nA 1 1\nA 1 1\n"), DataError);
  CHECK_THROWS_AS(read("#honem-embedding 1 1 0\nA x 1\n"), DataError);
}
