#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "honem/common.hpp"
#include "honem/sparse.hpp"

namespace honem {

// Bijective token <-> dense id map, ids assigned in first-appearance order.
class Vocabulary {
 public:
  EntityId intern(std::string_view token);

  // Throws DataError for unknown tokens.
  EntityId id_of(std::string_view token) const;
  bool contains(std::string_view token) const;

  const std::string& token_of(EntityId id) const { return id_to_token_[id]; }
  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  std::unordered_map<std::string, EntityId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Tokenized trajectories over a dense entity vocabulary.
struct SequenceCorpus {
  std::vector<std::vector<EntityId>> sequences;
  Vocabulary vocabulary;

  std::size_t n_entities() const { return vocabulary.size(); }
  // Sequences shorter than 2 contribute no transitions.
  bool transition_free(std::size_t seq) const {
    return sequences[seq].size() < 2;
  }
  std::size_t total_transitions() const;
};

struct ParseOptions {
  // Reject lines longer than this many bytes (guards runaway input).
  std::size_t max_line_bytes = 16u << 20;
  // Drop trajectories shorter than this many tokens; 0 keeps everything.
  std::size_t min_sequence_length = 0;
};

// One trajectory per non-empty line, whitespace-separated tokens.
SequenceCorpus parse_corpus(std::istream& in, const ParseOptions& opts = {});
SequenceCorpus parse_corpus_file(const std::string& path,
                                 const ParseOptions& opts = {});
void write_corpus(std::ostream& out, const SequenceCorpus& corpus);

// First-order network: raw consecutive-pair transition counts.
struct FirstOrderNetwork {
  SparseMatrix adjacency;  // counts, N_F x N_F
  std::size_t edge_count() const { return adjacency.nnz(); }
};

FirstOrderNetwork build_fon(const SequenceCorpus& corpus);

// Coordinate text: "%fon N_F E_F" header then "i j count" per edge.
void write_fon(std::ostream& out, const FirstOrderNetwork& fon);
FirstOrderNetwork read_fon(std::istream& in);
FirstOrderNetwork read_fon_file(const std::string& path);

}  // namespace honem
