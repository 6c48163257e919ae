#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "honem/corpus.hpp"

namespace honem {

// Ordered history window, oldest entity first, current node last.
// A first-order context holds just the current node.
using Context = std::vector<EntityId>;

struct NextStepDistribution {
  std::uint64_t support = 0;                 // total path occurrences
  std::map<EntityId, std::uint64_t> counts;  // raw next-step counts

  double probability(EntityId target) const;
  std::map<EntityId, double> probs() const;
};

using PathCounts = std::map<Context, NextStepDistribution>;

// Count every length-`order` window that is followed by a next element;
// the window keys the map, the next element increments its distribution.
PathCounts count_paths(const SequenceCorpus& corpus, std::size_t order);

// KL(extended || base) in bits. The extended support set must be contained
// in the base support set; a missing target signals a counting bug upstream
// and throws DataError.
double kl_divergence(const NextStepDistribution& extended,
                     const NextStepDistribution& base);

// k_new / log2(1 + support_new), the divergence bar an order extension must
// clear. Requires k_new >= 2, support_new >= 1.
double dynamic_threshold(std::size_t k_new, std::uint64_t support_new);

struct Rule {
  Context context;
  EntityId target = 0;
  double probability = 0.0;

  std::size_t order() const { return context.size(); }
};

struct RuleSet {
  std::vector<Rule> rules;  // sorted by (order, context, target)
  std::size_t max_order = 0;
  std::vector<std::size_t> rules_per_order;  // [k-1] holds R_k

  std::size_t order_count(std::size_t order) const {
    return order >= 1 && order <= rules_per_order.size()
               ? rules_per_order[order - 1]
               : 0;
  }
};

struct ExtractOptions {
  std::uint64_t min_support = 1;
  // Multiplies the divergence threshold; 1 applies the formula as stated.
  double threshold_scale = 1.0;
  // Optional safety cap on context growth; 0 = unlimited.
  std::size_t max_order = 0;
};

// Variable-order dependency mining with lower-order retention: first-order
// rules are always emitted; a context of order k+1 is accepted when its
// next-step distribution diverges from its order-k parent by more than the
// dynamic threshold, and only accepted contexts are grown further.
RuleSet extract_rules(const SequenceCorpus& corpus,
                      const ExtractOptions& opts = {});

// TSV: order, context (tokens joined by '|', oldest first), target token,
// probability. '#' lines are comments; they carry the vocabulary so that
// downstream stages keep the same dense ids.
void write_rules(std::ostream& out, const RuleSet& rules,
                 const Vocabulary& vocab, const ExtractOptions& opts = {});

struct LoadedRules {
  RuleSet rules;
  Vocabulary vocabulary;
};

LoadedRules read_rules(std::istream& in);
LoadedRules read_rules_file(const std::string& path);

}  // namespace honem
