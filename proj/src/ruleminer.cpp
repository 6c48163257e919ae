#include "honem/ruleminer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "honem/parallel.hpp"

namespace honem {

double NextStepDistribution::probability(EntityId target) const {
  auto it = counts.find(target);
  if (it == counts.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(support);
}

std::map<EntityId, double> NextStepDistribution::probs() const {
  std::map<EntityId, double> out;
  for (const auto& [target, count] : counts)
    out[target] =
        static_cast<double>(count) / static_cast<double>(support);
  return out;
}

namespace {

void merge_counts(PathCounts& into, PathCounts&& from) {
  for (auto& [ctx, dist] : from) {
    NextStepDistribution& dst = into[ctx];
    dst.support += dist.support;
    for (const auto& [target, count] : dist.counts)
      dst.counts[target] += count;
  }
}

// Count order-k windows, optionally restricted to windows whose order-(k-1)
// suffix is in `parents` (the lazy-growth pass; null counts everything).
PathCounts count_windows(const SequenceCorpus& corpus, std::size_t order,
                         const PathCounts* parents) {
  const auto& sequences = corpus.sequences;
  const unsigned shards = parallel::effective_threads(sequences.size());
  std::vector<PathCounts> partial(shards);

  parallel::parallel_for(shards, [&](std::size_t s_begin, std::size_t s_end) {
    for (std::size_t shard = s_begin; shard < s_end; ++shard) {
      PathCounts& local = partial[shard];
      for (std::size_t s = shard; s < sequences.size(); s += shards) {
        const auto& seq = sequences[s];
        if (seq.size() < order + 1) continue;
        Context window(order);
        for (std::size_t i = 0; i + order < seq.size(); ++i) {
          window.assign(seq.begin() + i, seq.begin() + i + order);
          if (parents) {
            const Context parent(window.begin() + 1, window.end());
            if (!parents->count(parent)) continue;
          }
          NextStepDistribution& dist = local[window];
          ++dist.support;
          ++dist.counts[seq[i + order]];
        }
      }
    }
  });

  PathCounts merged = std::move(partial[0]);
  for (unsigned s = 1; s < shards; ++s)
    merge_counts(merged, std::move(partial[s]));
  return merged;
}

}  // namespace

PathCounts count_paths(const SequenceCorpus& corpus, std::size_t order) {
  if (order < 1) throw std::invalid_argument("count_paths: order must be >= 1");
  return count_windows(corpus, order, nullptr);
}

double kl_divergence(const NextStepDistribution& extended,
                     const NextStepDistribution& base) {
  double sum = 0.0;
  for (const auto& [target, count] : extended.counts) {
    const double p_ext =
        static_cast<double>(count) / static_cast<double>(extended.support);
    const double p_base = base.probability(target);
    if (p_base <= 0.0)
      throw DataError(
          "kl_divergence: extended target " + std::to_string(target) +
          " absent from base distribution (counting bug)");
    sum += p_ext * std::log2(p_ext / p_base);
  }
  return std::max(sum, 0.0);
}

double dynamic_threshold(std::size_t k_new, std::uint64_t support_new) {
  if (k_new < 2)
    throw std::invalid_argument("dynamic_threshold: k_new must be >= 2");
  if (support_new < 1)
    throw std::invalid_argument("dynamic_threshold: support must be >= 1");
  return static_cast<double>(k_new) /
         std::log2(1.0 + static_cast<double>(support_new));
}

RuleSet extract_rules(const SequenceCorpus& corpus,
                      const ExtractOptions& opts) {
  if (opts.min_support < 1)
    throw std::invalid_argument("extract_rules: min_support must be >= 1");

  RuleSet out;
  PathCounts frontier = count_windows(corpus, 1, nullptr);

  // First-order rules are emitted unconditionally.
  for (const auto& [ctx, dist] : frontier)
    for (const auto& [target, count] : dist.counts)
      out.rules.push_back(
          {ctx, target,
           static_cast<double>(count) / static_cast<double>(dist.support)});

  std::size_t order = 1;
  while (!frontier.empty() &&
         (opts.max_order == 0 || order < opts.max_order)) {
    PathCounts candidates = count_windows(corpus, order + 1, &frontier);
    PathCounts accepted;
    for (auto& [ctx, dist] : candidates) {
      if (dist.support < opts.min_support) continue;
      const Context parent(ctx.begin() + 1, ctx.end());
      const double divergence = kl_divergence(dist, frontier.at(parent));
      const double bar =
          opts.threshold_scale * dynamic_threshold(order + 1, dist.support);
      if (divergence > bar) {
        for (const auto& [target, count] : dist.counts)
          out.rules.push_back({ctx, target,
                               static_cast<double>(count) /
                                   static_cast<double>(dist.support)});
        accepted.emplace(ctx, std::move(dist));
      }
    }
    frontier = std::move(accepted);
    ++order;
  }

  std::sort(out.rules.begin(), out.rules.end(),
            [](const Rule& a, const Rule& b) {
              if (a.order() != b.order()) return a.order() < b.order();
              if (a.context != b.context) return a.context < b.context;
              return a.target < b.target;
            });
  for (const Rule& r : out.rules) {
    out.max_order = std::max(out.max_order, r.order());
    if (out.rules_per_order.size() < r.order())
      out.rules_per_order.resize(r.order(), 0);
    ++out.rules_per_order[r.order() - 1];
  }
  return out;
}

void write_rules(std::ostream& out, const RuleSet& rules,
                 const Vocabulary& vocab, const ExtractOptions& opts) {
  out << "# honem-rules 1\n";
  out << "# nodes " << vocab.size() << '\n';
  const auto& tokens = vocab.tokens();
  for (std::size_t i = 0; i < tokens.size(); i += 256) {
    out << "# vocab";
    for (std::size_t j = i; j < std::min(tokens.size(), i + 256); ++j)
      out << ' ' << tokens[j];
    out << '\n';
  }
  out << "# params min-support=" << opts.min_support
      << " threshold-scale=" << format_double(opts.threshold_scale)
      << " max-order=" << opts.max_order << '\n';
  out << "# columns order context target probability\n";
  for (const Rule& r : rules.rules) {
    out << r.order() << '\t';
    for (std::size_t i = 0; i < r.context.size(); ++i) {
      if (i) out << '|';
      out << vocab.token_of(r.context[i]);
    }
    out << '\t' << vocab.token_of(r.target) << '\t'
        << format_double(r.probability) << '\n';
  }
}

namespace {

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

LoadedRules read_rules(std::istream& in) {
  LoadedRules loaded;
  std::string line;
  std::size_t line_no = 0;
  std::size_t declared_nodes = 0;
  bool have_vocab_lines = false;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (!saw_magic) {
      if (fields.size() < 3 || fields[0] != "#" || fields[1] != "honem-rules")
        throw DataError("not a rules file: first line must be '# honem-rules 1'");
      if (fields[2] != "1")
        throw DataError("unsupported rules format version '" +
                        std::string(fields[2]) + "'");
      saw_magic = true;
      continue;
    }
    if (fields[0].front() == '#') {
      if (fields.size() >= 3 && fields[1] == "nodes")
        declared_nodes = parse_int<std::size_t>(fields[2], "rules header");
      if (fields.size() >= 2 && fields[1] == "vocab") {
        have_vocab_lines = true;
        for (std::size_t i = 2; i < fields.size(); ++i)
          loaded.vocabulary.intern(fields[i]);
      }
      continue;
    }
    if (fields.size() != 4)
      throw DataError("rules line " + std::to_string(line_no) +
                      ": expected 'order context target probability'");
    const auto order = parse_int<std::size_t>(fields[0], "rule order");
    Rule rule;
    for (auto tok : split_on(fields[1], '|')) {
      if (tok.empty())
        throw DataError("rules line " + std::to_string(line_no) +
                        ": empty context token");
      rule.context.push_back(loaded.vocabulary.intern(tok));
    }
    if (order != rule.context.size() || order < 1)
      throw DataError("rules line " + std::to_string(line_no) +
                      ": order column disagrees with context length");
    rule.target = loaded.vocabulary.intern(fields[2]);
    rule.probability = parse_double(fields[3], "rule probability");
    if (!(rule.probability > 0.0) || rule.probability > 1.0 + 1e-12)
      throw DataError("rules line " + std::to_string(line_no) +
                      ": probability outside (0,1]");
    loaded.rules.rules.push_back(std::move(rule));
  }
  if (in.bad()) throw DataError("I/O failure while reading rules");
  if (!saw_magic) throw DataError("empty rules file");
  if (have_vocab_lines && declared_nodes &&
      declared_nodes != loaded.vocabulary.size())
    throw DataError("rules header announces " +
                    std::to_string(declared_nodes) + " nodes, vocab lines hold " +
                    std::to_string(loaded.vocabulary.size()));

  auto& rules = loaded.rules;
  std::sort(rules.rules.begin(), rules.rules.end(),
            [](const Rule& a, const Rule& b) {
              if (a.order() != b.order()) return a.order() < b.order();
              if (a.context != b.context) return a.context < b.context;
              return a.target < b.target;
            });
  for (const Rule& r : rules.rules) {
    rules.max_order = std::max(rules.max_order, r.order());
    if (rules.rules_per_order.size() < r.order())
      rules.rules_per_order.resize(r.order(), 0);
    ++rules.rules_per_order[r.order() - 1];
  }
  return loaded;
}

LoadedRules read_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rules file '" + path + "'");
  return read_rules(in);
}

}  // namespace honem
