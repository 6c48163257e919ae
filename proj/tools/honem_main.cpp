#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "honem/common.hpp"
#include "honem/corpus.hpp"
#include "honem/evaltasks.hpp"
#include "honem/neighborhood.hpp"
#include "honem/parallel.hpp"
#include "honem/ruleminer.hpp"
#include "honem/spectral.hpp"
#include "honem/synthgen.hpp"

namespace {

using namespace honem;

constexpr const char kVersion[] = "1.0.0";

void banner(const std::string& text) {
  std::cerr << "honem " << kVersion << " | " << text << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file '" + path + "'");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError("failed while writing '" + path + "'");
}

MapDenominator parse_map_mode(const std::string& mode) {
  return mode == "all" ? MapDenominator::kAll : MapDenominator::kDefined;
}

// Report goes to standard output; --out mirrors the same bytes to a file.
void emit_report(const EvalReport& report, const Vocabulary* vocab,
                 const std::string& out_path) {
  std::ostringstream buf;
  write_report(buf, report, vocab);
  const std::string text = buf.str();
  std::cout << text << std::flush;
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    out << text;
    finish_out(out, out_path);
  }
}

struct ExtractConfig {
  std::string corpus;
  std::string out;
  std::string fon_out;
  std::uint64_t min_support = 1;
  double threshold_scale = 1.0;
  std::size_t max_order = 0;
  std::size_t min_seq_length = 0;
};

void run_extract(const ExtractConfig& cfg) {
  ParseOptions popts;
  popts.min_sequence_length = cfg.min_seq_length;
  const SequenceCorpus corpus = parse_corpus_file(cfg.corpus, popts);
  const ExtractOptions opts{cfg.min_support, cfg.threshold_scale, cfg.max_order};
  const RuleSet rules = extract_rules(corpus, opts);
  auto out = open_out(cfg.out);
  write_rules(out, rules, corpus.vocabulary, opts);
  finish_out(out, cfg.out);
  if (!cfg.fon_out.empty()) {
    auto fon_out = open_out(cfg.fon_out);
    write_fon(fon_out, build_fon(corpus));
    finish_out(fon_out, cfg.fon_out);
  }
}

struct MatrixConfig {
  std::string rules;
  std::string out;
  double normalization = 1.0;
  bool drop_self_pairs = false;
};

void run_matrix(const MatrixConfig& cfg) {
  const LoadedRules loaded = read_rules_file(cfg.rules);
  const std::size_t n = loaded.vocabulary.size();
  const auto mats = order_matrices(loaded.rules, n, cfg.drop_self_pairs);
  NeighborhoodMatrix m;
  if (mats.empty()) {
    m.matrix = SparseMatrix(n, n);
    m.normalization = cfg.normalization;
  } else {
    m = combine(mats, cfg.normalization);
  }
  auto out = open_out(cfg.out);
  write_matrix(out, m, loaded.vocabulary);
  finish_out(out, cfg.out);
}

struct EmbedConfig {
  std::string matrix;
  std::string out;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  SvdOptions svd;
};

void run_embed(const EmbedConfig& cfg) {
  const LoadedMatrix loaded = read_matrix_file(cfg.matrix);
  const EmbeddingMatrix emb =
      embed(loaded.neighborhood.matrix, cfg.dim, cfg.seed, cfg.svd);
  auto out = open_out(cfg.out);
  write_embedding(out, emb, loaded.vocabulary);
  finish_out(out, cfg.out);
}

struct ReconstructConfig {
  std::string emb;
  std::string fon;
  std::string out;
  std::vector<std::size_t> ks;
  MapDenominator mode = MapDenominator::kDefined;
};

void run_eval_reconstruct(const ReconstructConfig& cfg) {
  const LoadedEmbedding loaded = read_embedding_file(cfg.emb);
  const FirstOrderNetwork fon = read_fon_file(cfg.fon);
  const std::size_t n = loaded.embedding.content.rows;
  if (fon.adjacency.rows() != n)
    throw DataError("embedding and network disagree on node count");

  EdgeSet truth;
  for (const Triplet& t : fon.adjacency.triplets()) truth.insert({t.row, t.col});
  const PairScoreList scores = score_pairs(loaded.embedding);

  EvalReport report;
  report.task = "reconstruct";
  for (std::size_t k : cfg.ks)
    report.precision_at.emplace_back(k, precision_at_k(scores, truth, k));
  if (!truth.empty()) {
    const MapResult mr = map_score(scores, truth, n, cfg.mode);
    report.map = mr.map;
    report.per_node_ap = mr.per_node;
  }
  report.parameters = {
      {"embedding", cfg.emb},
      {"network", cfg.fon},
      {"dim", std::to_string(loaded.embedding.dimension)},
      {"seed", std::to_string(loaded.embedding.seed)},
      {"map-denominator",
       cfg.mode == MapDenominator::kAll ? "all" : "defined"},
  };
  emit_report(report, &loaded.vocabulary, cfg.out);
}

struct LinkpredConfig {
  std::string matrix;
  std::string out;
  double fraction = 0.2;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ks;
  MapDenominator mode = MapDenominator::kDefined;
  SvdOptions svd;
};

void run_eval_linkpred(const LinkpredConfig& cfg) {
  const LoadedMatrix loaded = read_matrix_file(cfg.matrix);
  const std::size_t n = loaded.neighborhood.matrix.rows();

  // Holdout universe: the matrix's off-diagonal stored entries.
  std::vector<Triplet> offdiag;
  for (const Triplet& t : loaded.neighborhood.matrix.triplets())
    if (t.row != t.col) offdiag.push_back(t);
  const FirstOrderNetwork universe{
      SparseMatrix::from_triplets(n, n, std::move(offdiag))};

  const LinkpredSplit split = linkpred_split(universe, cfg.fraction, cfg.seed);
  const NeighborhoodMatrix masked =
      mask_neighborhood(loaded.neighborhood, split.heldout);
  const EmbeddingMatrix emb = embed(masked.matrix, cfg.dim, cfg.seed, cfg.svd);

  // Rank every non-observed pair; held-out edges are the truth.
  if (n > 10000)
    throw DataError("link-prediction enumeration is limited to 10000 nodes");
  const EdgeSet kept(split.kept.begin(), split.kept.end());
  std::vector<Edge> candidates;
  for (EntityId i = 0; i < n; ++i)
    for (EntityId j = 0; j < n; ++j)
      if (i != j && !kept.count({i, j})) candidates.emplace_back(i, j);
  const PairScoreList scores = score_pairs(emb, candidates);
  const EdgeSet truth(split.heldout.begin(), split.heldout.end());

  EvalReport report;
  report.task = "linkpred";
  for (std::size_t k : cfg.ks)
    report.precision_at.emplace_back(k, precision_at_k(scores, truth, k));
  const MapResult mr = map_score(scores, truth, n, cfg.mode);
  report.map = mr.map;
  report.per_node_ap = mr.per_node;
  report.parameters = {
      {"matrix", cfg.matrix},
      {"dim", std::to_string(cfg.dim)},
      {"seed", std::to_string(cfg.seed)},
      {"fraction", format_double(cfg.fraction)},
      {"edges", std::to_string(split.kept.size() + split.heldout.size())},
      {"heldout", std::to_string(split.heldout.size())},
      {"map-denominator",
       cfg.mode == MapDenominator::kAll ? "all" : "defined"},
  };
  emit_report(report, &loaded.vocabulary, cfg.out);
}

struct ClassifyConfig {
  std::string emb;
  std::string labels;
  std::string out;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
};

void run_eval_classify(const ClassifyConfig& cfg) {
  const LoadedEmbedding loaded = read_embedding_file(cfg.emb);
  const LabelSet labels = read_labels_file(cfg.labels, loaded.vocabulary);
  const LabelSplit split = split_labels(labels, cfg.train_fraction, cfg.seed);
  const LinearModel model =
      classify_fit(loaded.embedding, labels.labels, split.train);

  std::vector<double> scores;
  std::vector<int> y;
  scores.reserve(split.test.size());
  for (EntityId node : split.test) {
    scores.push_back(predict(model, loaded.embedding, node));
    y.push_back(labels.labels.at(node));
  }

  EvalReport report;
  report.task = "classify";
  report.auroc = auroc(scores, y);
  report.parameters = {
      {"embedding", cfg.emb},
      {"labels", cfg.labels},
      {"dim", std::to_string(loaded.embedding.dimension)},
      {"seed", std::to_string(cfg.seed)},
      {"train-fraction", format_double(cfg.train_fraction)},
      {"train", std::to_string(split.train.size())},
      {"test", std::to_string(split.test.size())},
  };
  emit_report(report, &loaded.vocabulary, cfg.out);
}

struct SynthConfig {
  std::string spec;
  std::string out;
};

void run_synth(const SynthConfig& cfg) {
  const PlantedRuleSpec spec = read_spec_file(cfg.spec);
  const SequenceCorpus corpus = generate(spec);
  auto out = open_out(cfg.out);
  write_corpus(out, corpus);
  finish_out(out, cfg.out);
}

struct PipelineConfig {
  std::string corpus;
  std::string workdir = ".";
  std::string task = "reconstruct";
  std::string labels;
  std::uint64_t min_support = 1;
  double threshold_scale = 1.0;
  std::size_t max_order = 0;
  std::size_t min_seq_length = 0;
  double normalization = 1.0;
  bool drop_self_pairs = false;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  SvdOptions svd;
  std::vector<std::size_t> ks;
  double fraction = 0.2;
  double train_fraction = 0.7;
  MapDenominator mode = MapDenominator::kDefined;
};

void run_pipeline(const PipelineConfig& cfg) {
  if (cfg.task == "classify" && cfg.labels.empty())
    throw UsageError("--task classify requires --labels");
  std::filesystem::create_directories(cfg.workdir);
  const std::string rules = cfg.workdir + "/rules.tsv";
  const std::string fon = cfg.workdir + "/fon.txt";
  const std::string matrix = cfg.workdir + "/S.mtx";
  const std::string emb = cfg.workdir + "/emb.tsv";
  const std::string report = cfg.workdir + "/report.txt";

  run_extract({cfg.corpus, rules, fon, cfg.min_support, cfg.threshold_scale,
               cfg.max_order, cfg.min_seq_length});
  run_matrix({rules, matrix, cfg.normalization, cfg.drop_self_pairs});
  run_embed({matrix, emb, cfg.dim, cfg.seed, cfg.svd});
  if (cfg.task == "reconstruct") {
    run_eval_reconstruct({emb, fon, report, cfg.ks, cfg.mode});
  } else if (cfg.task == "linkpred") {
    run_eval_linkpred({matrix, report, cfg.fraction, cfg.dim, cfg.seed, cfg.ks,
                       cfg.mode, cfg.svd});
  } else {
    if (cfg.labels.empty())
      throw UsageError("--task classify requires --labels");
    run_eval_classify({emb, cfg.labels, report, cfg.seed, cfg.train_fraction});
  }
}

std::uint64_t env_seed_or(std::uint64_t fallback) {
  const char* env = std::getenv("HONEM_SEED");
  if (env == nullptr) return fallback;
  try {
    return parse_int<std::uint64_t>(env, "HONEM_SEED");
  } catch (const DataError&) {
    throw UsageError("HONEM_SEED must be an unsigned integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-order sequence mining, neighborhood embedding, and "
               "evaluation pipeline"};
  app.set_version_flag("--version", std::string("honem ") + kVersion);
  app.require_subcommand(1);

  unsigned threads = 0;
  const auto add_threads = [&threads](CLI::App* sub) {
    sub->add_option("--threads", threads, "worker thread cap (0 = all cores)");
  };

  // extract
  ExtractConfig ex;
  auto* extract = app.add_subcommand(
      "extract", "Mine variable-order dependency rules from a corpus");
  extract->add_option("--corpus", ex.corpus, "trajectory corpus file")->required();
  extract->add_option("--out", ex.out, "rules TSV output")->required();
  extract->add_option("--fon-out", ex.fon_out,
                      "also write the first-order network here");
  extract->add_option("--min-support", ex.min_support,
                      "minimum path occurrences")
      ->check(CLI::PositiveNumber);
  extract->add_option("--threshold-scale", ex.threshold_scale,
                      "multiplier on the divergence threshold")
      ->check(CLI::PositiveNumber);
  extract->add_option("--max-order", ex.max_order,
                      "order growth cap (0 = unlimited)");
  extract->add_option("--min-seq-length", ex.min_seq_length,
                      "drop shorter trajectories (0 = keep all)");
  add_threads(extract);

  // matrix
  MatrixConfig mx;
  auto* matrix = app.add_subcommand(
      "matrix", "Assemble the higher-order neighborhood matrix from rules");
  matrix->add_option("--rules", mx.rules, "rules TSV input")->required();
  matrix->add_option("--out", mx.out, "matrix output")->required();
  matrix->add_option("--normalization", mx.normalization,
                     "scale on the combined matrix")
      ->check(CLI::PositiveNumber);
  matrix->add_flag("--drop-self-pairs", mx.drop_self_pairs,
                   "ignore rules whose source equals their target");
  add_threads(matrix);

  // embed
  EmbedConfig em;
  auto* embed_cmd = app.add_subcommand(
      "embed", "Factorize a neighborhood matrix into node embeddings");
  embed_cmd->add_option("--matrix", em.matrix, "matrix input")->required();
  embed_cmd->add_option("--out", em.out, "embedding TSV output")->required();
  embed_cmd->add_option("--dim", em.dim, "embedding dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  embed_cmd->add_option("--seed", em.seed, "random seed");
  embed_cmd->add_option("--oversampling", em.svd.oversampling,
                        "extra subspace columns");
  embed_cmd->add_option("--power-iterations", em.svd.power_iterations,
                        "subspace iteration count");
  add_threads(embed_cmd);

  // eval-reconstruct
  ReconstructConfig rc;
  std::string rc_mode = "defined";
  auto* reconstruct = app.add_subcommand(
      "eval-reconstruct", "Score network reconstruction against a first-order "
                          "network");
  reconstruct->add_option("--emb", rc.emb, "embedding TSV input")->required();
  reconstruct->add_option("--fon", rc.fon, "first-order network input")
      ->required();
  reconstruct->add_option("--out", rc.out, "also write the report here");
  reconstruct->add_option("--k", rc.ks, "precision cutoffs")->delimiter(',');
  reconstruct
      ->add_option("--map-denominator", rc_mode,
                   "average AP over 'defined' or 'all' nodes")
      ->check(CLI::IsMember({"defined", "all"}));
  add_threads(reconstruct);

  // eval-linkpred
  LinkpredConfig lp;
  std::string lp_mode = "defined";
  auto* linkpred = app.add_subcommand(
      "eval-linkpred", "Hold out edges, re-embed, and rank them");
  linkpred->add_option("--matrix", lp.matrix, "matrix input")->required();
  linkpred->add_option("--out", lp.out, "also write the report here");
  linkpred->add_option("--fraction", lp.fraction, "held-out edge fraction");
  linkpred->add_option("--dim", lp.dim, "embedding dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  linkpred->add_option("--seed", lp.seed, "random seed");
  linkpred->add_option("--k", lp.ks, "precision cutoffs")->delimiter(',');
  linkpred
      ->add_option("--map-denominator", lp_mode,
                   "average AP over 'defined' or 'all' nodes")
      ->check(CLI::IsMember({"defined", "all"}));
  linkpred->add_option("--oversampling", lp.svd.oversampling,
                       "extra subspace columns");
  linkpred->add_option("--power-iterations", lp.svd.power_iterations,
                       "subspace iteration count");
  add_threads(linkpred);

  // eval-classify
  ClassifyConfig cl;
  auto* classify = app.add_subcommand(
      "eval-classify", "Fit a logistic model on labeled nodes and report AUROC");
  classify->add_option("--emb", cl.emb, "embedding TSV input")->required();
  classify->add_option("--labels", cl.labels, "CSV token,label input")
      ->required();
  classify->add_option("--out", cl.out, "also write the report here");
  classify->add_option("--seed", cl.seed, "random seed");
  classify->add_option("--train-fraction", cl.train_fraction,
                       "train split share");
  add_threads(classify);

  // synth
  SynthConfig sy;
  auto* synth = app.add_subcommand(
      "synth", "Sample a corpus from a planted-rule generator description");
  synth->add_option("--spec", sy.spec, "generator description file")->required();
  synth->add_option("--out", sy.out, "corpus output")->required();
  add_threads(synth);

  // pipeline
  PipelineConfig pl;
  std::string pl_mode = "defined";
  auto* pipeline = app.add_subcommand(
      "pipeline", "extract -> matrix -> embed -> one evaluation, materializing "
                  "every intermediate artifact");
  pipeline->add_option("--corpus", pl.corpus, "trajectory corpus file")
      ->required();
  pipeline->add_option("--workdir", pl.workdir, "artifact directory");
  pipeline
      ->add_option("--task", pl.task, "evaluation to run")
      ->check(CLI::IsMember({"reconstruct", "linkpred", "classify"}));
  pipeline->add_option("--labels", pl.labels, "CSV token,label (classify task)");
  pipeline->add_option("--min-support", pl.min_support, "minimum path occurrences")
      ->check(CLI::PositiveNumber);
  pipeline
      ->add_option("--threshold-scale", pl.threshold_scale,
                   "multiplier on the divergence threshold")
      ->check(CLI::PositiveNumber);
  pipeline->add_option("--max-order", pl.max_order, "order growth cap");
  pipeline->add_option("--min-seq-length", pl.min_seq_length,
                       "drop shorter trajectories");
  pipeline
      ->add_option("--normalization", pl.normalization,
                   "scale on the combined matrix")
      ->check(CLI::PositiveNumber);
  pipeline->add_flag("--drop-self-pairs", pl.drop_self_pairs,
                     "ignore rules whose source equals their target");
  pipeline->add_option("--dim", pl.dim, "embedding dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  pipeline->add_option("--seed", pl.seed, "random seed");
  pipeline->add_option("--oversampling", pl.svd.oversampling,
                       "extra subspace columns");
  pipeline->add_option("--power-iterations", pl.svd.power_iterations,
                       "subspace iteration count");
  pipeline->add_option("--k", pl.ks, "precision cutoffs")->delimiter(',');
  pipeline->add_option("--fraction", pl.fraction,
                       "held-out edge fraction (linkpred task)");
  pipeline->add_option("--train-fraction", pl.train_fraction,
                       "train split share (classify task)");
  pipeline
      ->add_option("--map-denominator", pl_mode,
                   "average AP over 'defined' or 'all' nodes")
      ->check(CLI::IsMember({"defined", "all"}));
  add_threads(pipeline);

  extract->callback([&] {
    parallel::max_threads().store(threads);
    banner("extract corpus=" + ex.corpus + " out=" + ex.out +
           " min-support=" + std::to_string(ex.min_support) +
           " threshold-scale=" + format_double(ex.threshold_scale) +
           " max-order=" + std::to_string(ex.max_order) +
           " min-seq-length=" + std::to_string(ex.min_seq_length) +
           " threads=" + std::to_string(threads));
    run_extract(ex);
  });
  matrix->callback([&] {
    parallel::max_threads().store(threads);
    banner("matrix rules=" + mx.rules + " out=" + mx.out +
           " normalization=" + format_double(mx.normalization) +
           " drop-self-pairs=" + std::to_string(mx.drop_self_pairs) +
           " threads=" + std::to_string(threads));
    run_matrix(mx);
  });
  embed_cmd->callback([&] {
    parallel::max_threads().store(threads);
    if (embed_cmd->count("--seed") == 0) em.seed = env_seed_or(em.seed);
    banner("embed matrix=" + em.matrix + " out=" + em.out +
           " dim=" + std::to_string(em.dim) + " seed=" + std::to_string(em.seed) +
           " oversampling=" + std::to_string(em.svd.oversampling) +
           " power-iterations=" + std::to_string(em.svd.power_iterations) +
           " threads=" + std::to_string(threads));
    run_embed(em);
  });
  reconstruct->callback([&] {
    parallel::max_threads().store(threads);
    rc.mode = parse_map_mode(rc_mode);
    banner("eval-reconstruct emb=" + rc.emb + " fon=" + rc.fon +
           " map-denominator=" + rc_mode + " threads=" + std::to_string(threads));
    run_eval_reconstruct(rc);
  });
  linkpred->callback([&] {
    parallel::max_threads().store(threads);
    if (linkpred->count("--seed") == 0) lp.seed = env_seed_or(lp.seed);
    lp.mode = parse_map_mode(lp_mode);
    banner("eval-linkpred matrix=" + lp.matrix +
           " fraction=" + format_double(lp.fraction) +
           " dim=" + std::to_string(lp.dim) + " seed=" + std::to_string(lp.seed) +
           " map-denominator=" + lp_mode + " threads=" + std::to_string(threads));
    run_eval_linkpred(lp);
  });
  classify->callback([&] {
    parallel::max_threads().store(threads);
    if (classify->count("--seed") == 0) cl.seed = env_seed_or(cl.seed);
    banner("eval-classify emb=" + cl.emb + " labels=" + cl.labels +
           " seed=" + std::to_string(cl.seed) +
           " train-fraction=" + format_double(cl.train_fraction) +
           " threads=" + std::to_string(threads));
    run_eval_classify(cl);
  });
  synth->callback([&] {
    parallel::max_threads().store(threads);
    banner("synth spec=" + sy.spec + " out=" + sy.out +
           " threads=" + std::to_string(threads));
    run_synth(sy);
  });
  pipeline->callback([&] {
    parallel::max_threads().store(threads);
    if (pipeline->count("--seed") == 0) pl.seed = env_seed_or(pl.seed);
    pl.mode = parse_map_mode(pl_mode);
    banner("pipeline corpus=" + pl.corpus + " workdir=" + pl.workdir +
           " task=" + pl.task + " min-support=" + std::to_string(pl.min_support) +
           " threshold-scale=" + format_double(pl.threshold_scale) +
           " max-order=" + std::to_string(pl.max_order) +
           " min-seq-length=" + std::to_string(pl.min_seq_length) +
           " normalization=" + format_double(pl.normalization) +
           " drop-self-pairs=" + std::to_string(pl.drop_self_pairs) +
           " dim=" + std::to_string(pl.dim) + " seed=" + std::to_string(pl.seed) +
           " fraction=" + format_double(pl.fraction) +
           " train-fraction=" + format_double(pl.train_fraction) +
           " map-denominator=" + pl_mode + " threads=" + std::to_string(threads));
    run_pipeline(pl);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
