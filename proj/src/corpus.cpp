#include "honem/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace honem {

EntityId Vocabulary::intern(std::string_view token) {
  auto it = token_to_id_.find(std::string(token));
  if (it != token_to_id_.end()) return it->second;
  const EntityId id = static_cast<EntityId>(id_to_token_.size());
  id_to_token_.emplace_back(token);
  token_to_id_.emplace(id_to_token_.back(), id);
  return id;
}

EntityId Vocabulary::id_of(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end())
    throw DataError("unknown token '" + std::string(token) + "'");
  return it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) != 0;
}

std::size_t SequenceCorpus::total_transitions() const {
  std::size_t n = 0;
  for (const auto& seq : sequences)
    if (seq.size() >= 2) n += seq.size() - 1;
  return n;
}

SequenceCorpus parse_corpus(std::istream& in, const ParseOptions& opts) {
  SequenceCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.size() > opts.max_line_bytes)
      throw DataError("line " + std::to_string(line_no) + " exceeds " +
                      std::to_string(opts.max_line_bytes) + " bytes");
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (opts.min_sequence_length > 0 && tokens.size() < opts.min_sequence_length)
      continue;
    std::vector<EntityId> seq;
    seq.reserve(tokens.size());
    for (auto tok : tokens) seq.push_back(corpus.vocabulary.intern(tok));
    corpus.sequences.push_back(std::move(seq));
  }
  if (in.bad()) throw DataError("I/O failure while reading corpus");
  return corpus;
}

SequenceCorpus parse_corpus_file(const std::string& path,
                                 const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, opts);
}

void write_corpus(std::ostream& out, const SequenceCorpus& corpus) {
  for (const auto& seq : corpus.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out << ' ';
      out << corpus.vocabulary.token_of(seq[i]);
    }
    out << '\n';
  }
}

FirstOrderNetwork build_fon(const SequenceCorpus& corpus) {
  std::vector<Triplet> counts;
  for (const auto& seq : corpus.sequences)
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      counts.push_back({seq[i], seq[i + 1], 1.0});
  const std::size_t n = corpus.n_entities();
  return {SparseMatrix::from_triplets(n, n, std::move(counts))};
}

void write_fon(std::ostream& out, const FirstOrderNetwork& fon) {
  out << "%fon " << fon.adjacency.rows() << ' ' << fon.edge_count() << '\n';
  for (const Triplet& t : fon.adjacency.triplets())
    out << t.row << ' ' << t.col << ' '
        << static_cast<std::uint64_t>(t.value) << '\n';
}

FirstOrderNetwork read_fon(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty first-order network file");
  auto header = split_ws(line);
  if (header.size() != 3 || header[0] != "%fon")
    throw DataError("bad first-order network header: '" + line + "'");
  const auto n = parse_int<std::size_t>(header[1], "fon header");
  const auto e = parse_int<std::size_t>(header[2], "fon header");
  std::vector<Triplet> entries;
  entries.reserve(e);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 3)
      throw DataError("fon line " + std::to_string(line_no) +
                      ": expected 'i j count'");
    Triplet t;
    t.row = parse_int<EntityId>(fields[0], "fon row");
    t.col = parse_int<EntityId>(fields[1], "fon col");
    t.value = static_cast<double>(
        parse_int<std::uint64_t>(fields[2], "fon count"));
    entries.push_back(t);
  }
  if (in.bad()) throw DataError("I/O failure while reading fon file");
  if (entries.size() != e)
    throw DataError("fon header announces " + std::to_string(e) +
                    " edges, file holds " + std::to_string(entries.size()));
  return {SparseMatrix::from_triplets(n, n, std::move(entries))};
}

FirstOrderNetwork read_fon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fon file '" + path + "'");
  return read_fon(in);
}

}  // namespace honem
