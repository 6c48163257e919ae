#pragma once

#include <iosfwd>
#include <vector>

#include "honem/ruleminer.hpp"
#include "honem/sparse.hpp"

namespace honem {

// Per-order distance matrix: entry (i, j) is the mean probability over the
// order-v rules whose path starts at i (oldest context entity) and ends at
// target j.
struct OrderDistanceMatrix {
  std::size_t order = 0;
  SparseMatrix distances;
};

// One matrix per order present in the rule set, ascending order; orders with
// no rules are absent. With drop_self_pairs, rules mapping a node onto
// itself are skipped.
std::vector<OrderDistanceMatrix> order_matrices(const RuleSet& rules,
                                                std::size_t n_nodes,
                                                bool drop_self_pairs = false);

// The combined neighborhood: normalization * sum_v e^{-(v-1)} D^v.
struct NeighborhoodMatrix {
  SparseMatrix matrix;
  std::size_t max_order_used = 0;
  double normalization = 1.0;
};

NeighborhoodMatrix combine(const std::vector<OrderDistanceMatrix>& matrices,
                           double normalization = 1.0);

// Coordinate text: "%honem-matrix N_F nnz max_order normalization" header,
// '%vocab' comment lines, then "i j value" entries sorted by (i, j).
void write_matrix(std::ostream& out, const NeighborhoodMatrix& m,
                  const Vocabulary& vocab);

struct LoadedMatrix {
  NeighborhoodMatrix neighborhood;
  Vocabulary vocabulary;
};

LoadedMatrix read_matrix(std::istream& in);
LoadedMatrix read_matrix_file(const std::string& path);

}  // namespace honem
