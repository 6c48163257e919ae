#include "honem/evaltasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "honem/kernels.hpp"
#include "honem/parallel.hpp"
#include "honem/rng.hpp"

namespace honem {

namespace {

constexpr std::size_t kFullEnumerationLimit = 10000;

// Rows of a column-major matrix, copied contiguous so the kernel dot applies.
std::vector<double> row_major(const DenseMatrix& m) {
  std::vector<double> out(m.rows * m.cols);
  for (std::size_t j = 0; j < m.cols; ++j)
    for (std::size_t i = 0; i < m.rows; ++i) {
      const double v = m(i, j);
      if (!std::isfinite(v)) throw DataError("non-finite embedding entry");
      out[i * m.cols + j] = v;
    }
  return out;
}

PairScoreList score_candidates(const EmbeddingMatrix& emb,
                               std::vector<Edge> pairs) {
  const std::size_t d = emb.dimension;
  const std::vector<double> content = row_major(emb.content);
  const std::vector<double> context = row_major(emb.context);

  PairScoreList out(pairs.size());
  parallel::parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto [i, j] = pairs[idx];
      out[idx] = {i, j,
                  kernels::dot(&content[i * d], &context[j * d], d)};
    }
  });
  std::sort(out.begin(), out.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

PairScoreList score_pairs(const EmbeddingMatrix& emb) {
  const std::size_t n = emb.content.rows;
  if (n > kFullEnumerationLimit)
    throw DataError("full pair enumeration is limited to " +
                    std::to_string(kFullEnumerationLimit) +
                    " nodes; pass explicit candidate pairs");
  std::vector<Edge> pairs;
  pairs.reserve(n * (n - 1));
  for (EntityId i = 0; i < n; ++i)
    for (EntityId j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);
  return score_candidates(emb, std::move(pairs));
}

PairScoreList score_pairs(const EmbeddingMatrix& emb,
                          const std::vector<Edge>& candidates) {
  const std::size_t n = emb.content.rows;
  for (const auto& [i, j] : candidates)
    if (i >= n || j >= n)
      throw DataError("candidate pair (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") references an unknown node");
  return score_candidates(emb, candidates);
}

double precision_at_k(const PairScoreList& scores, const EdgeSet& truth,
                      std::size_t k) {
  if (k < 1 || k > scores.size())
    throw UsageError("precision@k needs 1 <= k <= " +
                     std::to_string(scores.size()) + ", got " +
                     std::to_string(k));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r)
    if (truth.count({scores[r].i, scores[r].j})) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(const PairScoreList& scores_of_node,
                         const EdgeSet& truth_of_node) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < scores_of_node.size(); ++r)
    if (truth_of_node.count({scores_of_node[r].i, scores_of_node[r].j})) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

MapResult map_score(const PairScoreList& scores, const EdgeSet& truth,
                    std::size_t n_nodes, MapDenominator mode) {
  std::vector<std::size_t> truth_edges(n_nodes, 0);
  for (const auto& [i, j] : truth) {
    if (i >= n_nodes || j >= n_nodes)
      throw DataError("truth edge references node beyond range");
    ++truth_edges[i];
  }

  // One pass over the global ranking; the restriction to one source node is
  // its ranked list.
  std::vector<std::size_t> rank(n_nodes, 0), hits(n_nodes, 0);
  std::vector<double> ap_sum(n_nodes, 0.0);
  for (const ScoredPair& p : scores) {
    if (p.i >= n_nodes) throw DataError("scored pair references node beyond range");
    ++rank[p.i];
    if (truth.count({p.i, p.j})) {
      ++hits[p.i];
      ap_sum[p.i] +=
          static_cast<double>(hits[p.i]) / static_cast<double>(rank[p.i]);
    }
  }

  MapResult result;
  double total = 0.0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (truth_edges[i] == 0) continue;
    const double ap =
        hits[i] == 0 ? 0.0 : ap_sum[i] / static_cast<double>(hits[i]);
    result.per_node[static_cast<EntityId>(i)] = ap;
    total += ap;
  }
  if (result.per_node.empty())
    throw DataError("mean average precision undefined: no node has truth edges");
  const double denom = mode == MapDenominator::kDefined
                           ? static_cast<double>(result.per_node.size())
                           : static_cast<double>(n_nodes);
  result.map = total / denom;
  return result;
}

LinkpredSplit linkpred_split(const FirstOrderNetwork& fon, double fraction,
                             std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw std::invalid_argument("holdout fraction must be in (0, 1)");
  std::vector<Edge> edges;
  edges.reserve(fon.edge_count());
  for (const Triplet& t : fon.adjacency.triplets()) edges.emplace_back(t.row, t.col);

  const std::size_t heldout_count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(edges.size()) + 1e-9));
  if (heldout_count == 0)
    throw DataError("holdout fraction " + format_double(fraction) + " of " +
                    std::to_string(edges.size()) + " edges is empty");
  if (heldout_count >= edges.size())
    throw DataError("holdout would remove every edge");

  std::mt19937_64 gen(seed);
  rng::shuffle(edges, gen);
  LinkpredSplit split;
  split.heldout.assign(edges.begin(), edges.begin() + heldout_count);
  split.kept.assign(edges.begin() + heldout_count, edges.end());
  std::sort(split.heldout.begin(), split.heldout.end());
  std::sort(split.kept.begin(), split.kept.end());
  return split;
}

NeighborhoodMatrix mask_neighborhood(const NeighborhoodMatrix& s,
                                     const std::vector<Edge>& heldout) {
  const EdgeSet drop(heldout.begin(), heldout.end());
  std::vector<Triplet> kept;
  for (const Triplet& t : s.matrix.triplets())
    if (!drop.count({t.row, t.col})) kept.push_back(t);
  NeighborhoodMatrix out;
  out.matrix = SparseMatrix::from_triplets(s.matrix.rows(), s.matrix.cols(),
                                           std::move(kept));
  out.max_order_used = s.max_order_used;
  out.normalization = s.normalization;
  return out;
}

LabelSet read_labels(std::istream& in, const Vocabulary& vocab) {
  LabelSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (line_no == 1 && trimmed == "token,label") continue;
    const std::size_t comma = trimmed.find(',');
    if (comma == std::string_view::npos)
      throw DataError("labels line " + std::to_string(line_no) +
                      ": expected 'token,label'");
    const std::string_view token = trim(trimmed.substr(0, comma));
    const std::string_view value = trim(trimmed.substr(comma + 1));
    const int label = parse_int<int>(value, "label");
    if (label != 0 && label != 1)
      throw DataError("labels line " + std::to_string(line_no) +
                      ": label must be 0 or 1");
    const EntityId id = vocab.id_of(token);
    if (!set.labels.emplace(id, label).second)
      throw DataError("duplicate label for token '" + std::string(token) + "'");
  }
  if (in.bad()) throw DataError("I/O failure while reading labels");
  if (set.labels.empty()) throw DataError("labels file holds no labels");
  return set;
}

LabelSet read_labels_file(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file '" + path + "'");
  return read_labels(in, vocab);
}

LabelSplit split_labels(const LabelSet& labels, double train_fraction,
                        std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw std::invalid_argument("train fraction must be in (0, 1)");
  std::vector<EntityId> nodes;
  nodes.reserve(labels.labels.size());
  for (const auto& [id, label] : labels.labels) nodes.push_back(id);

  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(nodes.size())));
  if (n_train == 0 || n_train >= nodes.size())
    throw DataError("label split leaves an empty train or test side");

  std::mt19937_64 gen(seed);
  rng::shuffle(nodes, gen);
  LabelSplit split;
  split.train.assign(nodes.begin(), nodes.begin() + n_train);
  split.test.assign(nodes.begin() + n_train, nodes.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

LinearModel classify_fit(const EmbeddingMatrix& emb,
                         const std::map<EntityId, int>& labels,
                         const std::vector<EntityId>& train,
                         const FitOptions& options) {
  const std::size_t d = emb.dimension;
  const std::size_t n = train.size();
  if (n == 0) throw DataError("empty training set");

  std::vector<double> y(n);
  std::vector<double> x(n * d);  // row-major standardized features
  for (std::size_t r = 0; r < n; ++r) {
    const EntityId node = train[r];
    if (node >= emb.content.rows)
      throw DataError("train node beyond embedding range");
    const auto it = labels.find(node);
    if (it == labels.end())
      throw DataError("train node " + std::to_string(node) + " has no label");
    y[r] = it->second;
    for (std::size_t k = 0; k < d; ++k) x[r * d + k] = emb.content(node, k);
  }
  const double positives = std::accumulate(y.begin(), y.end(), 0.0);
  if (positives == 0.0 || positives == static_cast<double>(n))
    throw DataError("training set is single-class");

  LinearModel model;
  model.weights.assign(d, 0.0);
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x[r * d + k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double c = x[r * d + k] - mean;
      var += c * c;
    }
    var /= static_cast<double>(n);
    model.mean[k] = mean;
    model.scale[k] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
    for (std::size_t r = 0; r < n; ++r)
      x[r * d + k] = (x[r * d + k] - mean) * model.scale[k];
  }

  std::vector<double> grad(d);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double p =
          sigmoid(kernels::dot(model.weights.data(), &x[r * d], d) + model.bias);
      const double err = p - y[r];
      kernels::axpy(err, &x[r * d], grad.data(), d);
      grad_bias += err;
    }
    kernels::scal(1.0 / static_cast<double>(n), grad.data(), d);
    kernels::axpy(options.l2, model.weights.data(), grad.data(), d);
    kernels::axpy(-options.learning_rate, grad.data(), model.weights.data(), d);
    model.bias -= options.learning_rate * grad_bias / static_cast<double>(n);
  }
  return model;
}

double predict(const LinearModel& model, const EmbeddingMatrix& emb,
               EntityId node) {
  if (node >= emb.content.rows)
    throw DataError("predict: node beyond embedding range");
  const std::size_t d = emb.dimension;
  std::vector<double> z(d);
  for (std::size_t k = 0; k < d; ++k)
    z[k] = (emb.content(node, k) - model.mean[k]) * model.scale[k];
  return sigmoid(kernels::dot(model.weights.data(), z.data(), d) + model.bias);
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auroc: scores/labels size mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int label : labels) {
    if (label == 1)
      ++n_pos;
    else if (label == 0)
      ++n_neg;
    else
      throw DataError("auroc: labels must be 0 or 1");
  }
  if (n_pos == 0 || n_neg == 0)
    throw DataError("auroc undefined: test set is single-class");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  // Rank sum with average ranks over tie groups.
  double rank_sum_pos = 0.0;
  std::size_t g0 = 0;
  while (g0 < idx.size()) {
    std::size_t g1 = g0 + 1;
    while (g1 < idx.size() && scores[idx[g1]] == scores[idx[g0]]) ++g1;
    const double avg_rank = (static_cast<double>(g0 + 1) + static_cast<double>(g1)) / 2.0;
    for (std::size_t r = g0; r < g1; ++r)
      if (labels[idx[r]] == 1) rank_sum_pos += avg_rank;
    g0 = g1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

void write_report(std::ostream& out, const EvalReport& report,
                  const Vocabulary* vocab) {
  out << "task\t" << report.task << '\n';
  for (const auto& [k, v] : report.precision_at)
    out << "precision@" << k << '\t' << format_double(v) << '\n';
  if (report.map) out << "map\t" << format_double(*report.map) << '\n';
  if (report.auroc) out << "auroc\t" << format_double(*report.auroc) << '\n';

  nlohmann::json j;
  j["task"] = report.task;
  if (!report.parameters.empty()) {
    nlohmann::json params;
    for (const auto& [key, value] : report.parameters) params[key] = value;
    j["parameters"] = params;
  }
  if (!report.precision_at.empty()) {
    nlohmann::json prec = nlohmann::json::array();
    for (const auto& [k, v] : report.precision_at)
      prec.push_back({{"k", k}, {"value", v}});
    j["precision_at"] = prec;
  }
  if (report.map) j["map"] = *report.map;
  if (report.auroc) j["auroc"] = *report.auroc;
  if (!report.per_node_ap.empty()) {
    nlohmann::json ap;
    for (const auto& [node, value] : report.per_node_ap)
      ap[vocab ? vocab->token_of(node) : std::to_string(node)] = value;
    j["per_node_ap"] = ap;
  }
  out << j.dump() << '\n';
}

}  // namespace honem
