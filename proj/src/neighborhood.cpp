#include "honem/neighborhood.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace honem {

std::vector<OrderDistanceMatrix> order_matrices(const RuleSet& rules,
                                                std::size_t n_nodes,
                                                bool drop_self_pairs) {
  // (order, source, target) -> (probability sum, path count)
  std::map<std::size_t, std::map<std::pair<EntityId, EntityId>,
                                 std::pair<double, std::size_t>>>
      grouped;
  for (const Rule& r : rules.rules) {
    if (r.context.empty()) continue;
    const EntityId source = r.context.front();
    if (source >= n_nodes || r.target >= n_nodes)
      throw DataError("rule references entity beyond node count");
    if (drop_self_pairs && source == r.target) continue;
    auto& acc = grouped[r.order()][{source, r.target}];
    acc.first += r.probability;
    acc.second += 1;
  }

  std::vector<OrderDistanceMatrix> out;
  out.reserve(grouped.size());
  for (const auto& [order, cells] : grouped) {
    std::vector<Triplet> entries;
    entries.reserve(cells.size());
    for (const auto& [pair, acc] : cells)
      entries.push_back(
          {pair.first, pair.second, acc.first / static_cast<double>(acc.second)});
    out.push_back(
        {order, SparseMatrix::from_triplets(n_nodes, n_nodes, std::move(entries))});
  }
  return out;
}

NeighborhoodMatrix combine(const std::vector<OrderDistanceMatrix>& matrices,
                           double normalization) {
  if (!(normalization > 0.0))
    throw std::invalid_argument("combine: normalization must be positive");
  NeighborhoodMatrix out;
  out.normalization = normalization;
  if (matrices.empty()) return out;

  const std::size_t n = matrices.front().distances.rows();
  std::vector<Triplet> entries;
  std::vector<bool> seen;
  for (const auto& m : matrices) {
    if (m.distances.rows() != n || m.distances.cols() != n)
      throw DataError("combine: order matrices disagree on dimension");
    if (m.order < 1 || (m.order < seen.size() && seen[m.order]))
      throw DataError("combine: duplicate or invalid order " +
                      std::to_string(m.order));
    if (seen.size() <= m.order) seen.resize(m.order + 1, false);
    seen[m.order] = true;
    out.max_order_used = std::max(out.max_order_used, m.order);

    const double weight = std::exp(-static_cast<double>(m.order - 1));
    for (Triplet t : m.distances.triplets()) {
      t.value *= weight;
      entries.push_back(t);
    }
  }
  // Normalization is applied after the per-entry sum, so combine(m, c) is
  // exactly c * combine(m, 1) entrywise.
  out.matrix =
      SparseMatrix::from_triplets(n, n, std::move(entries)).scaled(normalization);
  return out;
}

void write_matrix(std::ostream& out, const NeighborhoodMatrix& m,
                  const Vocabulary& vocab) {
  if (vocab.size() != m.matrix.rows())
    throw DataError("matrix/vocabulary size mismatch");
  out << "%honem-matrix " << m.matrix.rows() << ' ' << m.matrix.nnz() << ' '
      << m.max_order_used << ' ' << format_double(m.normalization) << '\n';
  const auto& tokens = vocab.tokens();
  for (std::size_t i = 0; i < tokens.size(); i += 256) {
    out << "%vocab";
    for (std::size_t j = i; j < std::min(tokens.size(), i + 256); ++j)
      out << ' ' << tokens[j];
    out << '\n';
  }
  for (const Triplet& t : m.matrix.triplets())
    out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
}

LoadedMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty matrix file");
  auto header = split_ws(line);
  if (header.size() != 5 || header[0] != "%honem-matrix")
    throw DataError("bad matrix header: '" + line + "'");
  LoadedMatrix loaded;
  const auto n = parse_int<std::size_t>(header[1], "matrix header");
  const auto nnz = parse_int<std::size_t>(header[2], "matrix header");
  loaded.neighborhood.max_order_used =
      parse_int<std::size_t>(header[3], "matrix header");
  loaded.neighborhood.normalization = parse_double(header[4], "matrix header");

  std::vector<Triplet> entries;
  entries.reserve(nnz);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields[0] == "%vocab") {
      for (std::size_t i = 1; i < fields.size(); ++i)
        loaded.vocabulary.intern(fields[i]);
      continue;
    }
    if (fields[0].front() == '%') continue;
    if (fields.size() != 3)
      throw DataError("matrix line " + std::to_string(line_no) +
                      ": expected 'i j value'");
    Triplet t;
    t.row = parse_int<EntityId>(fields[0], "matrix row");
    t.col = parse_int<EntityId>(fields[1], "matrix col");
    t.value = parse_double(fields[2], "matrix value");
    entries.push_back(t);
  }
  if (in.bad()) throw DataError("I/O failure while reading matrix");
  if (entries.size() != nnz)
    throw DataError("matrix header announces " + std::to_string(nnz) +
                    " entries, file holds " + std::to_string(entries.size()));
  if (loaded.vocabulary.size() != 0 && loaded.vocabulary.size() != n)
    throw DataError("matrix vocab lines disagree with node count");
  if (loaded.vocabulary.size() == 0)
    for (std::size_t i = 0; i < n; ++i)
      loaded.vocabulary.intern("n" + std::to_string(i));
  loaded.neighborhood.matrix = SparseMatrix::from_triplets(n, n, std::move(entries));
  return loaded;
}

LoadedMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file '" + path + "'");
  return read_matrix(in);
}

}  // namespace honem
