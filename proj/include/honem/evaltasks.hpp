#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "honem/corpus.hpp"
#include "honem/neighborhood.hpp"
#include "honem/spectral.hpp"

namespace honem {

using Edge = std::pair<EntityId, EntityId>;
using EdgeSet = std::set<Edge>;

struct ScoredPair {
  EntityId i = 0;
  EntityId j = 0;
  double score = 0.0;
};

// Sorted by score descending, ties by (i, j) ascending: a total order, so
// rankings are deterministic.
using PairScoreList = std::vector<ScoredPair>;

// score(i, j) = content_i . context_j, the model's reconstruction of S(i, j).
// The two-argument form enumerates all ordered pairs i != j and refuses
// vocabularies above 10^4 nodes (quadratic blowup guard).
PairScoreList score_pairs(const EmbeddingMatrix& emb);
PairScoreList score_pairs(const EmbeddingMatrix& emb,
                          const std::vector<Edge>& candidates);

// Fraction of the top-k scored pairs present in truth. Requires 1 <= k <= size.
double precision_at_k(const PairScoreList& scores, const EdgeSet& truth,
                      std::size_t k);

// Mean of the running precision at the ranks where a truth edge appears.
// An empty intersection yields 0.
double average_precision(const PairScoreList& scores_of_node,
                         const EdgeSet& truth_of_node);

enum class MapDenominator {
  kDefined,  // average over nodes with at least one truth edge
  kAll,      // divide the same sum by n_nodes
};

struct MapResult {
  double map = 0.0;
  // AP per source node that has at least one truth edge.
  std::map<EntityId, double> per_node;
};

// Groups `scores` by source node and averages per-node AP. Throws DataError
// when no node has a truth edge.
MapResult map_score(const PairScoreList& scores, const EdgeSet& truth,
                    std::size_t n_nodes,
                    MapDenominator mode = MapDenominator::kDefined);

struct LinkpredSplit {
  std::vector<Edge> kept;
  std::vector<Edge> heldout;  // floor(fraction * E) edges
};

// Seeded uniform holdout over the network's edges. Throws DataError when the
// holdout or the kept side would be empty.
LinkpredSplit linkpred_split(const FirstOrderNetwork& fon, double fraction,
                             std::uint64_t seed);

// Zeroes S at the held-out positions, leaving everything else untouched.
NeighborhoodMatrix mask_neighborhood(const NeighborhoodMatrix& s,
                                     const std::vector<Edge>& heldout);

struct LabelSet {
  std::map<EntityId, int> labels;  // binary {0, 1}
};

// CSV rows "token,label". Tokens must exist in `vocab`; labels must be 0/1.
// A leading "token,label" header line is tolerated.
LabelSet read_labels(std::istream& in, const Vocabulary& vocab);
LabelSet read_labels_file(const std::string& path, const Vocabulary& vocab);

struct LabelSplit {
  std::vector<EntityId> train;
  std::vector<EntityId> test;
};

// round(train_fraction * n) nodes go to train, the rest to test, both sorted.
LabelSplit split_labels(const LabelSet& labels, double train_fraction,
                        std::uint64_t seed);

struct FitOptions {
  double learning_rate = 0.1;
  std::size_t iterations = 2000;
  double l2 = 1e-4;  // applied to weights, not the bias
};

// Logistic model over per-dimension standardized content embeddings.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> mean;   // train-set feature means
  std::vector<double> scale;  // 1/sd per feature, 0 for constant features
};

// Full-batch gradient descent from zero weights; deterministic. Throws
// DataError when the training set is empty or single-class.
LinearModel classify_fit(const EmbeddingMatrix& emb,
                         const std::map<EntityId, int>& labels,
                         const std::vector<EntityId>& train,
                         const FitOptions& options = {});

// P(label = 1) for one node's content embedding.
double predict(const LinearModel& model, const EmbeddingMatrix& emb,
               EntityId node);

// Probability a random positive outscores a random negative, ties at 1/2
// (rank-sum form). Throws DataError when either class is absent.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

struct EvalReport {
  std::string task;
  std::vector<std::pair<std::size_t, double>> precision_at;  // (k, value)
  std::optional<double> map;
  std::map<EntityId, double> per_node_ap;
  std::optional<double> auroc;
  std::vector<std::pair<std::string, std::string>> parameters;
};

// "metric<TAB>value" lines followed by one JSON object line. Per-node APs are
// keyed by token when a vocabulary is supplied, by id otherwise.
void write_report(std::ostream& out, const EvalReport& report,
                  const Vocabulary* vocab = nullptr);

}  // namespace honem
