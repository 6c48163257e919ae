#include "honem/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include "honem/parallel.hpp"
#include "honem/rng.hpp"

namespace honem {

namespace {

constexpr double kSumTolerance = 1e-12;

// Inverse-CDF draw over (id, probability) pairs in ascending id order.
// u in [0,1); rounding slack in the final cumulative sum falls to the
// last entry.
template <typename Pairs>
EntityId sample_from(const Pairs& pairs, double u) {
  double cum = 0.0;
  EntityId last = 0;
  for (const auto& [id, p] : pairs) {
    cum += p;
    last = id;
    if (u < cum) return id;
  }
  return last;
}

}  // namespace

void validate(const PlantedRuleSpec& spec) {
  const std::size_t n = spec.vocabulary.size();
  if (n == 0) throw DataError("spec declares no entities");
  if (spec.n_sequences == 0) throw DataError("spec: n_sequences must be >= 1");
  if (spec.length == 0) throw DataError("spec: length must be >= 1");
  if (spec.base.rows() != n || spec.base.cols() != n)
    throw DataError("spec: base matrix dimension does not match entity count");

  for (std::size_t i = 0; i < n; ++i) {
    const auto values = spec.base.row_values(i);
    double sum = 0.0;
    for (double v : values) {
      if (v < 0.0) throw DataError("spec: negative base probability");
      sum += v;
    }
    if (!values.empty() && std::abs(sum - 1.0) > kSumTolerance)
      throw DataError("spec: base row for '" +
                      spec.vocabulary.token_of(static_cast<EntityId>(i)) +
                      "' sums to " + format_double(sum));
  }

  for (const auto& [context, dist] : spec.rules) {
    if (context.size() < 2)
      throw DataError("spec: planted contexts must have order >= 2");
    for (EntityId id : context)
      if (id >= n) throw DataError("spec: planted context references unknown entity");
    double sum = 0.0;
    for (const auto& [target, p] : dist) {
      if (target >= n) throw DataError("spec: planted target unknown");
      if (p <= 0.0) throw DataError("spec: planted probabilities must be positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw DataError("spec: planted distribution sums to " + format_double(sum));
  }

  if (!spec.start.empty()) {
    if (spec.start.size() != n)
      throw DataError("spec: start distribution length mismatch");
    double sum = 0.0;
    for (double p : spec.start) {
      if (p < 0.0) throw DataError("spec: negative start probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw DataError("spec: start distribution sums to " + format_double(sum));
  }
}

PlantedRuleSpec read_spec(std::istream& in) {
  PlantedRuleSpec spec;
  std::vector<Triplet> base_entries;
  std::set<std::pair<EntityId, EntityId>> base_seen;
  std::map<EntityId, double> start_entries;
  std::string section;
  std::string line;
  std::size_t line_no = 0;

  const auto handle = [&](std::string_view content) {
    auto fields = split_ws(content);
    if (fields.empty()) return;
    const std::string where = "spec line " + std::to_string(line_no);
    if (section != "entities" && section != "params" && spec.vocabulary.size() == 0)
      throw DataError(where + ": declare [entities] before [" + section + "]");

    if (section == "entities") {
      for (auto token : fields) {
        if (spec.vocabulary.contains(token))
          throw DataError(where + ": duplicate entity '" + std::string(token) + "'");
        spec.vocabulary.intern(token);
      }
    } else if (section == "base") {
      if (fields.size() != 3) throw DataError(where + ": expected 'from to prob'");
      Triplet t;
      t.row = spec.vocabulary.id_of(fields[0]);
      t.col = spec.vocabulary.id_of(fields[1]);
      t.value = parse_double(fields[2], where);
      if (t.value < 0.0) throw DataError(where + ": negative probability");
      if (!base_seen.insert({t.row, t.col}).second)
        throw DataError(where + ": duplicate base transition");
      base_entries.push_back(t);
    } else if (section == "rule") {
      if (fields.size() != 3)
        throw DataError(where + ": expected 'ctx1|ctx2 target prob'");
      Context context;
      std::string_view rest = fields[0];
      while (!rest.empty()) {
        const std::size_t bar = rest.find('|');
        const std::string_view token = rest.substr(0, bar);
        if (token.empty()) throw DataError(where + ": empty context token");
        context.push_back(spec.vocabulary.id_of(token));
        rest = bar == std::string_view::npos ? std::string_view{}
                                             : rest.substr(bar + 1);
      }
      const EntityId target = spec.vocabulary.id_of(fields[1]);
      const double p = parse_double(fields[2], where);
      if (!spec.rules[context].emplace(target, p).second)
        throw DataError(where + ": duplicate planted rule");
    } else if (section == "start") {
      if (fields.size() != 2) throw DataError(where + ": expected 'token prob'");
      const EntityId id = spec.vocabulary.id_of(fields[0]);
      const double p = parse_double(fields[1], where);
      if (!start_entries.emplace(id, p).second)
        throw DataError(where + ": duplicate start entry");
    } else if (section == "params") {
      for (auto field : fields) {
        const std::size_t eq = field.find('=');
        if (eq == std::string_view::npos)
          throw DataError(where + ": expected key=value");
        const std::string_view key = field.substr(0, eq);
        const std::string_view value = field.substr(eq + 1);
        if (key == "n_sequences")
          spec.n_sequences = parse_int<std::size_t>(value, where);
        else if (key == "length")
          spec.length = parse_int<std::size_t>(value, where);
        else if (key == "seed")
          spec.seed = parse_int<std::uint64_t>(value, where);
        else
          throw DataError(where + ": unknown parameter '" + std::string(key) + "'");
      }
    } else {
      throw DataError(where + ": content before any section");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    const std::size_t hash = view.find('#');
    if (hash != std::string_view::npos) view = view.substr(0, hash);
    auto fields = split_ws(view);
    if (fields.empty()) continue;
    if (fields[0].front() == '[') {
      const std::size_t close = fields[0].find(']');
      if (close == std::string_view::npos)
        throw DataError("spec line " + std::to_string(line_no) +
                        ": unterminated section header");
      section = std::string(fields[0].substr(1, close - 1));
      if (section != "entities" && section != "base" && section != "rule" &&
          section != "start" && section != "params")
        throw DataError("spec line " + std::to_string(line_no) +
                        ": unknown section [" + section + "]");
      // header line may carry content after the bracket
      const std::size_t offset = view.find(']') + 1;
      handle(view.substr(offset));
    } else {
      handle(view);
    }
  }
  if (in.bad()) throw DataError("I/O failure while reading spec");

  const std::size_t n = spec.vocabulary.size();
  spec.base = SparseMatrix::from_triplets(n, n, std::move(base_entries));
  if (!start_entries.empty()) {
    spec.start.assign(n, 0.0);
    for (const auto& [id, p] : start_entries) spec.start[id] = p;
  }
  validate(spec);
  return spec;
}

PlantedRuleSpec read_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spec file '" + path + "'");
  return read_spec(in);
}

void write_spec(std::ostream& out, const PlantedRuleSpec& spec) {
  out << "[entities]";
  for (const auto& token : spec.vocabulary.tokens()) out << ' ' << token;
  out << '\n';
  out << "[base]\n";
  for (const Triplet& t : spec.base.triplets())
    out << spec.vocabulary.token_of(t.row) << ' ' << spec.vocabulary.token_of(t.col)
        << ' ' << format_double(t.value) << '\n';
  if (!spec.rules.empty()) {
    out << "[rule]\n";
    for (const auto& [context, dist] : spec.rules)
      for (const auto& [target, p] : dist) {
        for (std::size_t i = 0; i < context.size(); ++i)
          out << (i ? "|" : "") << spec.vocabulary.token_of(context[i]);
        out << ' ' << spec.vocabulary.token_of(target) << ' ' << format_double(p)
            << '\n';
      }
  }
  if (!spec.start.empty()) {
    out << "[start]\n";
    for (std::size_t i = 0; i < spec.start.size(); ++i)
      if (spec.start[i] != 0.0)
        out << spec.vocabulary.token_of(static_cast<EntityId>(i)) << ' '
            << format_double(spec.start[i]) << '\n';
  }
  out << "[params] n_sequences=" << spec.n_sequences << " length=" << spec.length
      << " seed=" << spec.seed << '\n';
}

SequenceCorpus generate(const PlantedRuleSpec& spec) {
  validate(spec);
  const std::size_t n = spec.vocabulary.size();

  // Planted context lengths, longest first; the per-step matcher tries each.
  std::vector<std::size_t> lengths;
  for (const auto& [context, dist] : spec.rules) lengths.push_back(context.size());
  std::sort(lengths.rbegin(), lengths.rend());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  std::vector<std::pair<EntityId, double>> start;
  if (spec.start.empty()) {
    const double uniform = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      start.emplace_back(static_cast<EntityId>(i), uniform);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (spec.start[i] > 0.0)
        start.emplace_back(static_cast<EntityId>(i), spec.start[i]);
  }

  SequenceCorpus corpus;
  corpus.vocabulary = spec.vocabulary;
  corpus.sequences.assign(spec.n_sequences, {});
  std::vector<std::string> failures(spec.n_sequences);

  parallel::parallel_for(spec.n_sequences, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      std::mt19937_64 gen(spec.seed + s);
      auto& seq = corpus.sequences[s];
      seq.reserve(spec.length);
      seq.push_back(sample_from(start, rng::uniform01(gen)));
      Context suffix;
      for (std::size_t pos = 1; pos < spec.length; ++pos) {
        const std::map<EntityId, double>* planted = nullptr;
        for (std::size_t len : lengths) {
          if (len > seq.size()) continue;
          suffix.assign(seq.end() - static_cast<std::ptrdiff_t>(len), seq.end());
          const auto it = spec.rules.find(suffix);
          if (it != spec.rules.end()) {
            planted = &it->second;
            break;
          }
        }
        const double u = rng::uniform01(gen);
        if (planted) {
          seq.push_back(sample_from(*planted, u));
          continue;
        }
        const EntityId current = seq.back();
        const auto ids = spec.base.row_indices(current);
        const auto probs = spec.base.row_values(current);
        if (ids.empty()) {
          failures[s] = "dead end at entity '" +
                        spec.vocabulary.token_of(current) + "' (sequence " +
                        std::to_string(s) + ", position " + std::to_string(pos) +
                        ")";
          seq.clear();
          break;
        }
        double cum = 0.0;
        EntityId chosen = ids.back();
        for (std::size_t k = 0; k < ids.size(); ++k) {
          cum += probs[k];
          if (u < cum) {
            chosen = ids[k];
            break;
          }
        }
        seq.push_back(chosen);
      }
    }
  });

  for (const auto& failure : failures)
    if (!failure.empty()) throw DataError(failure);
  return corpus;
}

RecoveryReport recovery_check(const RuleSet& extracted,
                              const Vocabulary& extracted_vocab,
                              const PlantedRuleSpec& spec, double tolerance) {
  if (tolerance < 0.0)
    throw std::invalid_argument("recovery tolerance must be >= 0");
  RecoveryReport report;
  for (const auto& [context, dist] : spec.rules) {
    for (const auto& [target, planted_p] : dist) {
      RecoveryItem item;
      item.context = context;
      item.target = target;
      item.planted_probability = planted_p;
      item.probability_error = std::numeric_limits<double>::infinity();

      // Rebase ids through tokens; extraction may have interned in another
      // order or never seen an entity at all.
      bool mappable = true;
      Context lookup;
      lookup.reserve(context.size());
      for (EntityId id : context) {
        const std::string& token = spec.vocabulary.token_of(id);
        if (!extracted_vocab.contains(token)) {
          mappable = false;
          break;
        }
        lookup.push_back(extracted_vocab.id_of(token));
      }
      const std::string& target_token = spec.vocabulary.token_of(target);
      if (mappable && extracted_vocab.contains(target_token)) {
        const EntityId lookup_target = extracted_vocab.id_of(target_token);
        for (const Rule& rule : extracted.rules) {
          if (rule.context == lookup && rule.target == lookup_target) {
            item.found = true;
            item.probability_error = std::abs(rule.probability - planted_p);
            break;
          }
        }
      }
      item.recovered = item.found && item.probability_error <= tolerance;
      report.recovered += item.recovered ? 1 : 0;
      report.items.push_back(std::move(item));
    }
  }
  report.planted = report.items.size();
  return report;
}

}  // namespace honem
