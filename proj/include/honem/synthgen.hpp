#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "honem/corpus.hpp"
#include "honem/ruleminer.hpp"
#include "honem/sparse.hpp"

namespace honem {

// Ground-truth generator description: a row-stochastic base chain plus
// planted higher-order overrides that kick in when their context matches.
struct PlantedRuleSpec {
  Vocabulary vocabulary;
  SparseMatrix base;  // first-order transition probabilities
  // Context (oldest first, length >= 2) -> next-step distribution override.
  std::map<Context, std::map<EntityId, double>> rules;
  // Start distribution over entities; empty means uniform.
  std::vector<double> start;
  std::size_t n_sequences = 0;
  std::size_t length = 0;
  std::uint64_t seed = 0;
};

// Throws DataError when rows/overrides/start do not sum to 1 (+-1e-12),
// contexts are shorter than 2, or counts are zero. All-zero base rows pass
// here; they only fail if sampling actually reaches them.
void validate(const PlantedRuleSpec& spec);

// Sectioned text: "[entities]" token list, "[base]" lines "from to prob",
// "[rule]" lines "ctx1|ctx2 target prob", optional "[start]" lines
// "token prob", "[params]" with n_sequences= length= seed=. '#' comments.
PlantedRuleSpec read_spec(std::istream& in);
PlantedRuleSpec read_spec_file(const std::string& path);
void write_spec(std::ostream& out, const PlantedRuleSpec& spec);

// Stepwise sampling, one derived seed per sequence (seed + index). At each
// step the longest planted context matching the history tail governs,
// otherwise the base row of the current entity. A reachable all-zero base
// row aborts with the entity, sequence, and position named.
SequenceCorpus generate(const PlantedRuleSpec& spec);

struct RecoveryItem {
  Context context;  // ids in the spec's vocabulary
  EntityId target = 0;
  double planted_probability = 0.0;
  bool found = false;      // extraction emitted this (context, target)
  bool recovered = false;  // found and |error| <= tolerance
  double probability_error = 0.0;  // +inf when absent
};

struct RecoveryReport {
  std::vector<RecoveryItem> items;
  std::size_t recovered = 0;
  std::size_t planted = 0;
};

// Matches planted rules against an extracted set token-by-token, so the two
// sides may use different dense id assignments.
RecoveryReport recovery_check(const RuleSet& extracted,
                              const Vocabulary& extracted_vocab,
                              const PlantedRuleSpec& spec, double tolerance);

}  // namespace honem
