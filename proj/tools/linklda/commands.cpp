#include "commands.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linklda/corpus.hpp"
#include "linklda/error.hpp"
#include "linklda/estimate.hpp"
#include "linklda/model.hpp"
#include "linklda/sampler.hpp"
#include "linklda/stacking.hpp"
#include "linklda/synthetic.hpp"
#include "manifest.hpp"

namespace linklda::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- helpers

struct CorpusDir {
  CorpusPaths paths;
  std::vector<RoleFile> files;
};

CorpusDir locate_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("corpus directory not found: " + dir.string());
  CorpusDir out;
  out.paths.docs = dir / "docs.txt";
  out.paths.vocab = dir / "vocab.txt";
  if (!fs::exists(out.paths.docs) || !fs::exists(out.paths.vocab)) {
    throw UsageError(dir.string() + " must contain docs.txt and vocab.txt");
  }
  out.files = {{"docs", out.paths.docs}, {"vocab", out.paths.vocab}};
  if (fs::exists(dir / "links.txt")) {
    out.paths.links = dir / "links.txt";
    out.files.push_back({"links", *out.paths.links});
  }
  if (fs::exists(dir / "labels.txt")) {
    out.paths.labels = dir / "labels.txt";
    out.files.push_back({"labels", *out.paths.labels});
  }
  return out;
}

void record_inputs(Manifest& manifest, const CorpusDir& dir, const std::string& prefix = "") {
  for (const auto& f : dir.files) manifest.add_input(prefix + f.role, f.path);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

Checkpoint load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path.string());
  std::ifstream in(path);
  return read_checkpoint(in, path.string());
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  auto out = open_out(path);
  write_checkpoint(out, ckpt);
  if (!out) throw ValidationError("failed writing " + path.string());
}

json timing_summary(const IterationLog& log) {
  const std::size_t n = log.records.size();
  double total = 0.0;
  for (const auto& r : log.records) total += r.wall_ms;
  const double mean = n == 0 ? 0.0 : total / static_cast<double>(n);
  double var = 0.0;
  for (const auto& r : log.records) var += (r.wall_ms - mean) * (r.wall_ms - mean);
  return {{"iterations", n},
          {"total_ms", total},
          {"mean_ms", mean},
          {"stddev_ms", n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0}};
}

// A trained checkpoint together with the corpus it was trained on.
struct LoadedModel {
  Corpus corpus;
  Checkpoint ckpt;
  std::unique_ptr<ModelContext> ctx;
  ChainState state;
  json manifest;
};

LoadedModel load_trained(const fs::path& corpus_dir, const fs::path& ckpt_path) {
  auto dir = locate_corpus(corpus_dir);
  LoadedModel m;
  m.ckpt = load_checkpoint(ckpt_path);
  m.manifest = verify_artifact(ckpt_path, dir.files);
  m.corpus = load_corpus(dir.paths);
  m.ctx = std::make_unique<ModelContext>(m.corpus, m.ckpt.hyper, m.ckpt.kind);
  m.state = resume_chain(*m.ctx, m.ckpt);
  return m;
}

std::vector<std::string> argv_vector(int argc, char** argv) { return {argv, argv + argc}; }

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind = "lda";
  fs::path out;
  std::uint64_t seed = 1;
  std::optional<std::size_t> docs, vocab, topics;
};

void cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
  Manifest manifest("synth", argv);
  Corpus corpus;
  if (a.kind == "lda") {
    GeneratorOptions o;
    o.seed = a.seed;
    if (a.docs) o.docs = *a.docs;
    if (a.vocab) o.vocab = *a.vocab;
    if (a.topics) o.topics = *a.topics;
    corpus = generate_lda_corpus(o).corpus;
  } else if (a.kind == "influence") {
    InfluenceOptions o;
    o.base.seed = a.seed;
    if (a.docs) o.base.docs = *a.docs;
    if (a.vocab) o.base.vocab = *a.vocab;
    if (a.topics) o.base.topics = *a.topics;
    corpus = generate_influence_corpus(o).generated.corpus;
  } else {
    TwoBlockOptions o;
    o.seed = a.seed;
    if (a.docs) o.docs = *a.docs;
    if (a.vocab) o.vocab = *a.vocab;
    if (a.topics) o.topics = *a.topics;
    corpus = generate_two_block_corpus(o).corpus;
  }
  fs::create_directories(a.out);
  const CorpusPaths paths{a.out / "docs.txt", a.out / "vocab.txt", a.out / "links.txt", a.out / "labels.txt"};
  write_corpus(corpus, paths);
  manifest.config() = {{"kind", a.kind}, {"docs", corpus.doc_count()}, {"vocab", corpus.vocab_size()}};
  manifest.set("seeds", {a.seed});
  for (const auto& p : {paths.docs, paths.vocab, *paths.links, *paths.labels}) manifest.add_output(p);
  manifest.write(manifest_path_for(a.out));
  std::cout << "wrote " << corpus.doc_count() << " documents, " << corpus.token_count() << " tokens to "
            << a.out.string() << '\n';
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  fs::path corpus;
  std::string model = "lda";
  std::string strategy = "plain";
  std::optional<double> ell;
  std::size_t topics = 30;
  std::size_t iters = 50;
  std::uint64_t seed = 1;
  std::size_t eval_every = 0;
  std::optional<double> alpha, beta;
  double p = 10.0;
  std::size_t recount_every = 25;
  fs::path checkpoint;
  std::optional<fs::path> log;
  std::size_t chains = 1;
  bool resume = false;
};

void cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  const Strategy strategy = parse_strategy(a.strategy);
  const ModelKind kind = parse_model_kind(a.model);
  if (a.ell && !is_sparse(strategy)) throw UsageError("--ell requires --strategy sparse or agg-sparse");
  if (a.topics == 0) throw UsageError("--topics must be at least 1");
  if (a.chains == 0) throw UsageError("--chains must be at least 1");
  if (a.resume && a.chains > 1) throw UsageError("--resume continues a single chain; drop --chains");
  if (a.log && a.chains > 1) throw UsageError("--log names a single file; with --chains each chain logs beside its checkpoint");

  const auto dir = locate_corpus(a.corpus);
  Manifest manifest("train", argv);

  std::optional<Checkpoint> previous;
  if (a.resume) {
    previous = load_checkpoint(a.checkpoint);
    verify_artifact(a.checkpoint, dir.files);
    manifest.add_input("checkpoint", a.checkpoint);
  }
  const Corpus corpus = load_corpus(dir.paths);
  record_inputs(manifest, dir);

  const double k = static_cast<double>(a.topics);
  const double v = static_cast<double>(corpus.vocab_size());
  const Hyperparams hyper =
      previous ? previous->hyper
               : Hyperparams::symmetric(a.topics, corpus.vocab_size(), a.alpha.value_or(50.0 / k),
                                        a.beta.value_or(200.0 / v), a.p);
  const ModelContext ctx(corpus, hyper, previous ? previous->kind : kind);

  SamplerConfig base;
  if (previous) {
    base = config_from_checkpoint(*previous, a.iters);
  } else {
    base.model = kind;
    base.strategy = strategy;
    base.sparsity_ell = a.ell.value_or(1.0);
    base.iterations = a.iters;
    base.seed = a.seed;
    base.recount_every = a.recount_every;
  }
  base.validate();

  ProgressSink sink;
  sink.eval_every = a.eval_every;
  sink.evaluate = [&](const ChainState& s) { return heldout_likelihood(estimate_model(ctx, s.counts), corpus).score; };

  const std::size_t chains = a.chains;
  std::vector<fs::path> ckpt_paths(chains), log_paths(chains);
  for (std::size_t c = 0; c < chains; ++c) {
    ckpt_paths[c] = chains == 1 ? a.checkpoint : fs::path(a.checkpoint.string() + ".chain" + std::to_string(c));
    log_paths[c] = (chains == 1 && a.log) ? *a.log : fs::path(ckpt_paths[c].string() + ".log.csv");
  }
  std::vector<IterationLog> logs(chains);
  std::vector<std::size_t> final_iteration(chains, 0);
  std::vector<std::exception_ptr> errors(chains);

#pragma omp parallel for schedule(dynamic, 1) if (chains > 1)
  for (std::size_t c = 0; c < chains; ++c) {
    try {
      SamplerConfig config = base;
      config.seed = base.seed + c;
      ChainState state;
      if (previous) {
        state = resume_chain(ctx, *previous);
        const std::size_t remaining = a.iters > state.iteration ? a.iters - state.iteration : 0;
        advance_chain(ctx, config, state, remaining, all_documents(corpus), logs[c], sink);
      } else {
        auto result = run_chain(ctx, config, sink);
        state = std::move(result.state);
        logs[c] = std::move(result.log);
      }
      final_iteration[c] = state.iteration;
      save_checkpoint(ckpt_paths[c], make_checkpoint(ctx, config, state));
      auto log_out = open_out(log_paths[c]);
      logs[c].write_csv(log_out);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  manifest.config() = {{"model", std::string(to_string(ctx.kind()))},
                       {"strategy", std::string(to_string(base.strategy))},
                       {"ell", base.sparsity_ell},
                       {"topics", hyper.topics()},
                       {"alpha", hyper.alpha(0)},
                       {"beta", hyper.beta(0)},
                       {"p", hyper.gamma_scale_p()},
                       {"iterations", a.iters},
                       {"recount_every", base.recount_every},
                       {"eval_every", a.eval_every},
                       {"chains", chains},
                       {"resume", a.resume}};
  json seeds = json::array(), timing = json::array();
  for (std::size_t c = 0; c < chains; ++c) {
    seeds.push_back(base.seed + c);
    json t = timing_summary(logs[c]);
    t["chain"] = c;
    t["final_iteration"] = final_iteration[c];
    timing.push_back(t);
    manifest.add_output(ckpt_paths[c]);
    manifest.add_output(log_paths[c]);
    std::cout << "chain " << c << ": iteration " << final_iteration[c] << ", mean "
              << t["mean_ms"].get<double>() << " ms/iteration";
    if (!logs[c].records.empty() && logs[c].records.back().likelihood) {
      std::cout << ", in-sample score " << *logs[c].records.back().likelihood;
    }
    std::cout << " -> " << ckpt_paths[c].string() << '\n';
  }
  manifest.set("seeds", seeds);
  manifest.set("timing", timing);
  manifest.write(manifest_path_for(a.checkpoint));
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  fs::path corpus;
  fs::path checkpoint;
  std::optional<fs::path> test;
  std::size_t unseen_iters = 20;
  std::uint64_t seed = 1;
  fs::path out;
};

Corpus append_corpus(const Corpus& train, const Corpus& test) {
  if (!(train.vocabulary() == test.vocabulary())) {
    throw ValidationError("test corpus vocabulary differs from the training vocabulary");
  }
  const std::size_t m = train.doc_count();
  const std::size_t total = m + test.doc_count();
  std::vector<Document> docs = train.documents();
  docs.insert(docs.end(), test.documents().begin(), test.documents().end());
  LinkGraph links(total);
  for (DocId d = 0; d < m; ++d) {
    for (const auto& l : train.links().outlinks(d)) links.add(d, l.target, l.weight);
  }
  for (DocId d = 0; d < test.doc_count(); ++d) {
    for (const auto& l : test.links().outlinks(d)) {
      links.add(static_cast<DocId>(m + d), static_cast<DocId>(m + l.target), l.weight);
    }
  }
  std::vector<std::optional<std::string>> labels(total);
  for (DocId d = 0; d < m; ++d) labels[d] = train.label(d);
  for (DocId d = 0; d < test.doc_count(); ++d) labels[m + d] = test.label(d);
  return Corpus(train.vocabulary(), std::move(docs), std::move(links), std::move(labels));
}

void cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
  Manifest manifest("evaluate", argv);
  auto m = load_trained(a.corpus, a.checkpoint);
  record_inputs(manifest, locate_corpus(a.corpus));
  manifest.add_input("checkpoint", a.checkpoint);

  HeldoutScore score;
  std::string scope = "training";
  if (a.test) {
    const auto test_dir = locate_corpus(*a.test);
    record_inputs(manifest, test_dir, "test_");
    const Corpus test = load_corpus(test_dir.paths);
    const Corpus combined = append_corpus(m.corpus, test);
    const ModelContext ctx(combined, m.ckpt.hyper, m.ckpt.kind);
    SamplerConfig config = config_from_checkpoint(m.ckpt, a.unseen_iters);
    config.seed = a.seed;
    const auto unseen = unseen_inference(ctx, m.corpus.doc_count(), m.state, config, a.unseen_iters);
    std::vector<DocId> test_docs(test.doc_count());
    std::iota(test_docs.begin(), test_docs.end(), static_cast<DocId>(m.corpus.doc_count()));
    score = heldout_likelihood(unseen.model, combined, test_docs);
    scope = "test";
  } else {
    score = heldout_likelihood(estimate_model(*m.ctx, m.state.counts), m.corpus);
  }

  auto out = open_out(a.out);
  out << "scope,docs,positions,total_loglik,score\n"
      << scope << ',' << score.docs.size() << ',' << score.positions << ',' << std::setprecision(17)
      << score.total_loglik << ',' << score.score << '\n';
  out.close();
  manifest.config() = {{"unseen_iterations", a.unseen_iters}, {"scope", scope}};
  manifest.set("seeds", {a.seed});
  manifest.add_output(a.out);
  manifest.write(manifest_path_for(a.out));
  std::cout << scope << " score " << score.score << " over " << score.positions << " positions\n";
}

// ---------------------------------------------------------------- export

struct ExportArgs {
  fs::path corpus;
  fs::path checkpoint;
  fs::path theta;
  std::optional<fs::path> chi;
};

void cmd_export(const ExportArgs& a, const std::vector<std::string>& argv) {
  Manifest manifest("export", argv);
  auto m = load_trained(a.corpus, a.checkpoint);
  if (a.chi && m.ckpt.kind != ModelKind::linked) throw UsageError("--chi needs a linked-model checkpoint");
  record_inputs(manifest, locate_corpus(a.corpus));
  manifest.add_input("checkpoint", a.checkpoint);

  const TopicModel model = estimate_model(*m.ctx, m.state.counts);
  {
    auto out = open_out(a.theta);
    write_theta_csv(out, model, m.corpus);
  }
  manifest.add_output(a.theta);
  if (a.chi) {
    auto out = open_out(*a.chi);
    write_chi_csv(out, model);
    out.close();
    manifest.add_output(*a.chi);
  }
  manifest.config() = {{"chi", a.chi.has_value()}};
  manifest.set("seeds", json::array());
  manifest.write(manifest_path_for(a.theta));
}

// ---------------------------------------------------------------- stack

struct StackArgs {
  fs::path corpus;
  fs::path checkpoint;
  std::string weights = "cocit";
  bool reversed = false;
  std::size_t layers = 1;
  std::size_t folds = 10;
  std::vector<std::uint64_t> seeds{1};
  fs::path out;
};

void cmd_stack(const StackArgs& a, const std::vector<std::string>& argv) {
  if (a.layers > 2) throw UsageError("--layers must be 0, 1 or 2");
  if (a.folds < 2) throw UsageError("--folds must be at least 2");
  Manifest manifest("stack", argv);
  auto m = load_trained(a.corpus, a.checkpoint);
  if (a.weights == "chi" && m.ckpt.kind != ModelKind::linked) {
    throw UsageError("--weights chi needs a linked-model checkpoint");
  }
  record_inputs(manifest, locate_corpus(a.corpus));
  manifest.add_input("checkpoint", a.checkpoint);

  const TopicModel model = estimate_model(*m.ctx, m.state.counts);
  StackingDataset data;
  data.dims = model.topics;
  data.features = model.theta;
  data.labels = m.corpus.labels();
  if (a.weights == "cocit") {
    if (a.reversed) {
      // Cocitation on the reversed graph counts shared references: bibliographic coupling.
      data.weights = cocitation_weights(reverse_graph(m.corpus.links()));
      data.weights.provenance = EdgeProvenance::reversed_cocitation;
    } else {
      data.weights = cocitation_weights(m.corpus.links());
    }
  } else {
    data.weights = chi_edge_weights(model, m.corpus.links());
    if (a.reversed) data.weights = reverse_edges(data.weights);
  }

  StackingOptions options;
  options.fold_count = a.folds;
  options.layers = a.layers;
  options.seeds = a.seeds;
  options.weighting = std::string(to_string(data.weights.provenance));
  const auto report = train_and_evaluate(data, options);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  {
    auto out = open_out(a.out);
    report.write_csv(out, a.layers, options.weighting);
  }
  manifest.config() = {{"weights", a.weights},     {"reversed", a.reversed}, {"weighting", options.weighting},
                       {"layers", a.layers},       {"folds", a.folds},       {"macro_auc", report.macro_auc},
                       {"macro_stddev", report.macro_stddev}};
  manifest.set("seeds", a.seeds);
  manifest.add_output(a.out);
  manifest.write(manifest_path_for(a.out));
  std::cout << options.weighting << " layers=" << a.layers << " macro AUC " << report.macro_auc << " (sd "
            << report.macro_stddev << ")\n";
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  fs::path corpus;
  std::string model = "lda";
  std::size_t topics = 30;
  std::uint64_t seed = 1;
  std::vector<std::string> strategies{"plain", "aggregated", "limit", "sparse"};
  std::vector<double> ells{2, 5, 10, 20, 50};
  std::size_t warmup = 2;
  std::size_t measure = 10;
  fs::path out;
};

void cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv) {
  if (a.topics == 0) throw UsageError("--topics must be at least 1");
  std::vector<Strategy> strategies;
  for (const auto& s : a.strategies) strategies.push_back(parse_strategy(s));
  for (double ell : a.ells) {
    if (!(ell >= 1.0)) throw UsageError("--ells entries must be at least 1");
  }
  const auto dir = locate_corpus(a.corpus);
  Manifest manifest("bench", argv);
  const Corpus corpus = load_corpus(dir.paths);
  record_inputs(manifest, dir);
  const ModelContext ctx(corpus, Hyperparams::defaults(a.topics, corpus.vocab_size()), parse_model_kind(a.model));

  auto out = open_out(a.out);
  out << "strategy,ell,iterations,mean_ms,stddev_ms\n";
  json timing = json::array();
  for (const Strategy strategy : strategies) {
    const std::vector<std::optional<double>> ells =
        is_sparse(strategy) ? std::vector<std::optional<double>>(a.ells.begin(), a.ells.end())
                            : std::vector<std::optional<double>>{std::nullopt};
    for (const auto& ell : ells) {
      SamplerConfig config;
      config.model = ctx.kind();
      config.strategy = strategy;
      config.sparsity_ell = ell.value_or(1.0);
      config.seed = a.seed;
      ChainState state = init_assignments(ctx, strategy, a.seed);
      for (std::size_t i = 0; i < a.warmup; ++i) step(ctx, config, state, all_documents(corpus));
      std::vector<double> ms;
      for (std::size_t i = 0; i < a.measure; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        step(ctx, config, state, all_documents(corpus));
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      }
      if (ms.empty()) continue;
      const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
      double var = 0.0;
      for (double x : ms) var += (x - mean) * (x - mean);
      const double sd = ms.size() > 1 ? std::sqrt(var / static_cast<double>(ms.size() - 1)) : 0.0;
      out << to_string(strategy) << ',' << (ell ? (std::ostringstream() << *ell).str() : std::string()) << ',' << ms.size() << ','
          << mean << ',' << sd << '\n';
      timing.push_back({{"strategy", std::string(to_string(strategy))},
                        {"ell", ell ? json(*ell) : json()},
                        {"mean_ms", mean},
                        {"stddev_ms", sd}});
    }
  }
  out.close();
  manifest.config() = {{"model", a.model},       {"topics", a.topics},   {"strategies", a.strategies},
                       {"ells", a.ells},         {"warmup", a.warmup},   {"measure", a.measure}};
  manifest.set("seeds", {a.seed});
  manifest.set("timing", timing);
  manifest.add_output(a.out);
  manifest.write(manifest_path_for(a.out));
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Topic models with link influence: training, evaluation, export, stacking and benchmarks"};
  app.require_subcommand(1);
  const auto args = argv_vector(argc, argv);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus directory");
  s->add_option("--kind", synth.kind, "lda | influence | two-block")
      ->check(CLI::IsMember({"lda", "influence", "two-block"}));
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--seed", synth.seed);
  s->add_option("--docs", synth.docs);
  s->add_option("--vocab", synth.vocab);
  s->add_option("--topics", synth.topics);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Run collapsed Gibbs chains and write checkpoints");
  t->add_option("--corpus", train.corpus, "Corpus directory (docs.txt, vocab.txt, optional links.txt, labels.txt)")
      ->required();
  t->add_option("--model", train.model, "lda | linked");
  t->add_option("--strategy", train.strategy, "plain | aggregated | limit | sparse | agg-sparse");
  t->add_option("--ell", train.ell, "Sparsity: one group update per ell tokens");
  t->add_option("--topics", train.topics);
  t->add_option("--iters", train.iters, "Total iterations (a resumed chain continues up to this count)");
  t->add_option("--seed", train.seed, "Seed of the first chain; chain c uses seed + c");
  t->add_option("--eval-every", train.eval_every, "In-sample likelihood every E iterations (0 = never)");
  t->add_option("--alpha", train.alpha, "Symmetric alpha (default 50/k)");
  t->add_option("--beta", train.beta, "Symmetric beta (default 200/|V|)");
  t->add_option("--p", train.p, "Influence smoothing scale");
  t->add_option("--recount-every", train.recount_every, "Recount interval for fractional strategies");
  t->add_option("--checkpoint", train.checkpoint)->required();
  t->add_option("--log", train.log, "Iteration log CSV (default <checkpoint>.log.csv)");
  t->add_option("--chains", train.chains, "Independent chains run concurrently");
  t->add_flag("--resume", train.resume, "Continue the chain stored at --checkpoint");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "Held-out likelihood of a trained checkpoint");
  e->add_option("--corpus", eval.corpus, "Training corpus directory")->required();
  e->add_option("--checkpoint", eval.checkpoint)->required();
  e->add_option("--test", eval.test, "Unseen corpus directory scored after inference");
  e->add_option("--unseen-iters", eval.unseen_iters);
  e->add_option("--seed", eval.seed, "Seed for unseen inference");
  e->add_option("--out", eval.out, "Score CSV")->required();

  ExportArgs exp;
  auto* x = app.add_subcommand("export", "Write theta and chi tables");
  x->add_option("--corpus", exp.corpus)->required();
  x->add_option("--checkpoint", exp.checkpoint)->required();
  x->add_option("--theta", exp.theta)->required();
  x->add_option("--chi", exp.chi, "Linked models only");

  StackArgs stack;
  auto* k = app.add_subcommand("stack", "Cross-validated stacked classification AUC");
  k->add_option("--corpus", stack.corpus)->required();
  k->add_option("--checkpoint", stack.checkpoint)->required();
  k->add_option("--weights", stack.weights, "cocit | chi")->check(CLI::IsMember({"cocit", "chi"}));
  k->add_flag("--reversed", stack.reversed, "Reverse edge direction (cocit: bibliographic coupling)");
  k->add_option("--layers", stack.layers);
  k->add_option("--folds", stack.folds);
  k->add_option("--seeds", stack.seeds)->delimiter(',');
  k->add_option("--out", stack.out)->required();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time sampler sweeps per strategy");
  b->add_option("--corpus", bench.corpus)->required();
  b->add_option("--model", bench.model);
  b->add_option("--topics", bench.topics);
  b->add_option("--seed", bench.seed);
  b->add_option("--strategies", bench.strategies)->delimiter(',');
  b->add_option("--ells", bench.ells)->delimiter(',');
  b->add_option("--warmup", bench.warmup);
  b->add_option("--measure", bench.measure);
  b->add_option("--out", bench.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (s->parsed()) cmd_synth(synth, args);
    if (t->parsed()) cmd_train(train, args);
    if (e->parsed()) cmd_evaluate(eval, args);
    if (x->parsed()) cmd_export(exp, args);
    if (k->parsed()) cmd_stack(stack, args);
    if (b->parsed()) cmd_bench(bench, args);
    return 0;
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return 2;
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << '\n';
    return 3;
  } catch (const ValidationError& err) {
    std::cerr << "validation error: " << err.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "file error: " << err.what() << '\n';
    return 3;
  } catch (const ConsistencyError& err) {
    std::cerr << "internal consistency error: " << err.what() << '\n';
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return 4;
  }
}

}  // namespace linklda::cli
