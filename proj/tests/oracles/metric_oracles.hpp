#pragma once

// Brute-force evaluation metrics used to cross-check the library. Each one
// recomputes its answer from first principles (rescans, pair counting, grid
// search) instead of reusing the library's incremental formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct RankedPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double score = 0.0;
};

// Total order used by the ranking contract: score descending, then (i, j).
inline std::vector<RankedPair> rank_pairs(std::vector<RankedPair> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const RankedPair& a, const RankedPair& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.i != b.i) return a.i < b.i;
              return a.j < b.j;
            });
  return pairs;
}

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

inline bool is_hit(const RankedPair& p, const EdgeSet& truth) {
  return truth.count({p.i, p.j}) > 0;
}

// Precision of the top-k prefix, recounted from scratch.
inline double precision_at_k(const std::vector<RankedPair>& ranked,
                             const EdgeSet& truth, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r)
    if (is_hit(ranked[r], truth)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

// Average precision: mean of precision-at-rank over hit ranks, recounting the
// prefix for every hit. Sums in ascending rank order; zero when nothing hits.
inline double average_precision(const std::vector<RankedPair>& ranked,
                                const EdgeSet& truth) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (!is_hit(ranked[r], truth)) continue;
    ++hits;
    std::size_t prefix_hits = 0;
    for (std::size_t s = 0; s <= r; ++s)
      if (is_hit(ranked[s], truth)) ++prefix_hits;
    sum += static_cast<double>(prefix_hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) return 0.0;
  return sum / static_cast<double>(hits);
}

struct MapOracle {
  double map_defined = 0.0;  // averaged over nodes that own truth edges
  double map_all = 0.0;      // averaged over every node id in [0, n)
  std::map<std::uint32_t, double> per_node;
  std::size_t defined_nodes = 0;
};

inline MapOracle map_score(const std::vector<RankedPair>& ranked,
                           const EdgeSet& truth, std::uint32_t n_nodes) {
  MapOracle out;
  double sum = 0.0;
  for (std::uint32_t src = 0; src < n_nodes; ++src) {
    bool owns_truth = false;
    for (const auto& e : truth)
      if (e.first == src) owns_truth = true;
    if (!owns_truth) continue;
    std::vector<RankedPair> rows;
    for (const RankedPair& p : ranked)
      if (p.i == src) rows.push_back(p);
    EdgeSet row_truth;
    for (const auto& e : truth)
      if (e.first == src) row_truth.insert(e);
    const double ap = average_precision(rows, row_truth);
    out.per_node[src] = ap;
    sum += ap;
    ++out.defined_nodes;
  }
  if (out.defined_nodes > 0)
    out.map_defined = sum / static_cast<double>(out.defined_nodes);
  out.map_all = n_nodes > 0 ? sum / static_cast<double>(n_nodes) : 0.0;
  return out;
}

// AUROC by exhaustive positive/negative pair counting, ties worth one half.
inline double auroc(const std::vector<double>& pos,
                    const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q)
        wins += 1.0;
      else if (p == q)
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Best AUROC any linear scorer can reach on 2-d points, by scanning signed
// projection directions over a fine angle grid.
inline double best_linear_auroc(const std::vector<std::array<double, 2>>& x,
                                const std::vector<int>& labels,
                                std::size_t grid = 8192) {
  constexpr double kPi = 3.14159265358979323846;
  double best = 0.0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double theta =
        kPi * static_cast<double>(g) / static_cast<double>(grid);
    const double cx = std::cos(theta);
    const double cy = std::sin(theta);
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = cx * x[i][0] + cy * x[i][1];
      (labels[i] == 1 ? pos : neg).push_back(s);
    }
    const double a = auroc(pos, neg);
    best = std::max(best, std::max(a, 1.0 - a));
  }
  return best;
}

}  // namespace oracle
