#include "linklda/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "linklda/error.hpp"
#include "text_io.hpp"

namespace linklda {

void SamplerConfig::validate() const {
  if (is_sparse(strategy) && !(sparsity_ell >= 1.0)) throw UsageError("sparsity ell must be at least 1");
  if (recount_every == 0) throw UsageError("recount interval must be positive");
}

namespace {

[[noreturn]] void negative_count(const char* what, double value) {
  throw ConsistencyError(std::string("negative ") + what + " count " + std::to_string(value));
}

inline double nonnegative(double value, const char* what) {
  if (value < 0.0) {
    if (value < -kNegativeCountTolerance) negative_count(what, value);
    return 0.0;
  }
  return value;
}

// Unnormalized plain-LDA weights; returns their sum.
double lda_weights(const CountState& c, const Hyperparams& hyper, DocId d, TermId w, const double* excluded,
                   double* out) {
  const std::size_t k = c.topics;
  const double* word = c.word_topic.data() + std::size_t{w} * k;
  const double* doc = c.doc_topic.data() + std::size_t{d} * k;
  const double* topic = c.topic_total.data();
  const double beta_w = hyper.beta(w);
  const double beta_sum = hyper.beta_sum();
  double excluded_total = 0.0;
  if (excluded) {
    for (std::size_t z = 0; z < k; ++z) excluded_total += excluded[z];
  }
  const double doc_denom = nonnegative(c.doc_total[d] - excluded_total, "document") + hyper.alpha_sum();
  double total = 0.0;
  for (std::size_t z = 0; z < k; ++z) {
    const double e = excluded ? excluded[z] : 0.0;
    const double nw = nonnegative(word[z] - e, "topic-word");
    const double nz = nonnegative(topic[z] - e, "topic");
    const double nd = nonnegative(doc[z] - e, "document-topic");
    const double v = (nw + beta_w) / (nz + beta_sum) * ((nd + hyper.alpha(z)) / doc_denom);
    out[z] = v;
    total += v;
  }
  return total;
}

// Unnormalized linked-LDA weights over S_d x topics; `term_factor` is k scratch entries.
double linked_weights(const CountState& c, const Hyperparams& hyper, const InfluenceSet& infl, DocId d, TermId w,
                      const double* excluded, double* term_factor, double* out) {
  const std::size_t k = c.topics;
  const auto members = infl.members(d);
  const auto gamma = infl.gamma(d);
  const double* influence = c.influence.data() + infl.offset(d);
  const std::size_t s = members.size();
  const double* word = c.word_topic.data() + std::size_t{w} * k;
  const double beta_w = hyper.beta(w);
  const double beta_sum = hyper.beta_sum();

  for (std::size_t z = 0; z < k; ++z) {
    double e = 0.0;
    if (excluded) {
      for (std::size_t r = 0; r < s; ++r) e += excluded[r * k + z];
    }
    const double nw = nonnegative(word[z] - e, "topic-word");
    const double nz = nonnegative(c.topic_total[z] - e, "topic");
    term_factor[z] = (nw + beta_w) / (nz + beta_sum);
  }

  double influence_denom = 0.0;
  for (std::size_t r = 0; r < s; ++r) {
    double e = 0.0;
    if (excluded) {
      for (std::size_t z = 0; z < k; ++z) e += excluded[r * k + z];
    }
    influence_denom += nonnegative(influence[r] - e, "influence") + gamma[r];
  }

  double total = 0.0;
  for (std::size_t r = 0; r < s; ++r) {
    const DocId doc_r = members[r];
    const double* ex = excluded ? excluded + r * k : nullptr;
    double e = 0.0;
    if (ex) {
      for (std::size_t z = 0; z < k; ++z) e += ex[z];
    }
    const double influence_factor = (nonnegative(influence[r] - e, "influence") + gamma[r]) / influence_denom;
    const double doc_denom = nonnegative(c.doc_total[doc_r] - e, "document") + hyper.alpha_sum();
    const double* doc = c.doc_topic.data() + std::size_t{doc_r} * k;
    for (std::size_t z = 0; z < k; ++z) {
      const double nd = nonnegative(doc[z] - (ex ? ex[z] : 0.0), "document-topic");
      const double v = (nd + hyper.alpha(z)) / doc_denom * influence_factor * term_factor[z];
      out[r * k + z] = v;
      total += v;
    }
  }
  return total;
}

void normalize(std::span<double> v, double total) {
  for (auto& x : v) x /= total;
}

void to_cumulative(std::span<double> v) {
  double run = 0.0;
  for (auto& x : v) {
    run += x;
    x = run;
  }
}

// Scratch buffers and the group-level updates shared by every strategy.
class Sweeper {
 public:
  Sweeper(const ModelContext& ctx, ChainState& state) : ctx_(ctx), state_(state) {
    std::size_t widest = ctx.topics();
    if (ctx.kind() == ModelKind::linked) {
      for (DocId d = 0; d < ctx.corpus().doc_count(); ++d) widest = std::max(widest, ctx.outcomes(d));
    }
    weights_.resize(widest);
    scratch_.resize(widest);
    term_factor_.resize(ctx.topics());
  }

  StepStats& stats() { return stats_; }

  // Fills weights_[0, outcomes) with the unnormalized conditional; returns the total.
  double conditional(DocId d, TermId w, std::size_t outcomes, const double* excluded) {
    ++stats_.conditionals;
    if (ctx_.kind() == ModelKind::lda) {
      return lda_weights(state_.counts, ctx_.hyper(), d, w, excluded, weights_.data());
    }
    (void)outcomes;
    return linked_weights(state_.counts, ctx_.hyper(), ctx_.influence(), d, w, excluded, term_factor_.data(),
                          weights_.data());
  }

  std::uint32_t draw(std::span<const double> cumulative) {
    ++stats_.draws;
    return static_cast<std::uint32_t>(pick_cumulative(cumulative, state_.rng.uniform()));
  }

  void move(DocId d, TermId w, std::size_t o, double mass) { add_outcome(ctx_, state_.counts, d, w, o, mass); }

  void plain_group(DocId d, std::size_t g, const TermGroup& group) {
    const std::size_t outcomes = ctx_.outcomes(d);
    std::span<double> cumulative(weights_.data(), outcomes);
    for (auto& o : state_.assignments.positions_of(g, group.count)) {
      move(d, group.term, o, -1.0);
      conditional(d, group.term, outcomes, nullptr);
      to_cumulative(cumulative);
      o = draw(cumulative);
      move(d, group.term, o, 1.0);
    }
  }

  void aggregated_group(DocId d, std::size_t g, const TermGroup& group) {
    const std::size_t outcomes = ctx_.outcomes(d);
    std::span<double> cumulative(weights_.data(), outcomes);
    auto& a = state_.assignments;
    if (a.slots[g].storage == GroupStorage::positions) {
      auto pos = a.positions_of(g, group.count);
      move(d, group.term, pos[0], -1.0);
      conditional(d, group.term, outcomes, nullptr);
      to_cumulative(cumulative);
      pos[0] = draw(cumulative);
      move(d, group.term, pos[0], 1.0);
      for (std::size_t i = 1; i < pos.size(); ++i) {
        move(d, group.term, pos[i], -1.0);
        pos[i] = draw(cumulative);
        move(d, group.term, pos[i], 1.0);
      }
      return;
    }
    // Count vector: the first occurrence is the lowest outcome with a
    // nonzero count. Redrawing every occurrence from the fixed F and
    // applying the net change leaves the same counts as per-draw updates.
    auto counts = a.mass_of(g, outcomes);
    const std::size_t first = static_cast<std::size_t>(
        std::find_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) - counts.begin());
    move(d, group.term, first, -1.0);
    conditional(d, group.term, outcomes, nullptr);
    move(d, group.term, first, 1.0);
    to_cumulative(cumulative);
    std::span<double> fresh(scratch_.data(), outcomes);
    std::fill(fresh.begin(), fresh.end(), 0.0);
    for (std::uint32_t i = 0; i < group.count; ++i) fresh[draw(cumulative)] += 1.0;
    for (std::size_t o = 0; o < outcomes; ++o) {
      const double delta = fresh[o] - counts[o];
      if (delta != 0.0) {
        move(d, group.term, o, delta);
        counts[o] = fresh[o];
      }
    }
  }

  void limit_group(DocId d, std::size_t g, const TermGroup& group) {
    const std::size_t outcomes = ctx_.outcomes(d);
    auto dist = state_.assignments.mass_of(g, outcomes);
    const double tf = static_cast<double>(group.count);
    std::span<double> excluded(scratch_.data(), outcomes);
    for (std::size_t o = 0; o < outcomes; ++o) excluded[o] = tf * dist[o];
    const double total = conditional(d, group.term, outcomes, excluded.data());
    std::span<double> fresh(weights_.data(), outcomes);
    normalize(fresh, total);
    for (std::size_t o = 0; o < outcomes; ++o) {
      const double delta = tf * fresh[o] - excluded[o];
      if (delta != 0.0) move(d, group.term, o, delta);
      dist[o] = fresh[o];
    }
  }

 private:
  const ModelContext& ctx_;
  ChainState& state_;
  std::vector<double> weights_;
  std::vector<double> scratch_;
  std::vector<double> term_factor_;
  StepStats stats_;
};

template <typename GroupFn>
StepStats sweep_groups(const ModelContext& ctx, ChainState& state, DocRange docs, GroupFn fn) {
  Sweeper sweeper(ctx, state);
  const Corpus& corpus = ctx.corpus();
  for (DocId d = docs.begin; d < docs.end; ++d) {
    std::size_t g = corpus.group_begin(d);
    for (const auto& group : corpus.document(d).groups()) {
      (sweeper.*fn)(d, g++, group);
      ++sweeper.stats().group_updates;
    }
  }
  return sweeper.stats();
}

void check_range(const ModelContext& ctx, DocRange docs) {
  if (docs.begin > docs.end || docs.end > ctx.corpus().doc_count()) throw UsageError("document range out of bounds");
}

void check_storage(const ChainState& state, bool fractional) {
  for (const auto& slot : state.assignments.slots) {
    if ((slot.storage == GroupStorage::distribution) != fractional) {
      throw UsageError(fractional ? "limit sampling needs fractional assignments"
                                  : "this strategy needs per-occurrence or count assignments");
    }
  }
}

}  // namespace

void conditional_lda(const CountState& counts, const Hyperparams& hyper, DocId doc, TermId term,
                     std::span<double> out, std::span<const double> excluded) {
  if (out.size() != counts.topics || (!excluded.empty() && excluded.size() != counts.topics)) {
    throw UsageError("conditional buffer sizes must equal the topic count");
  }
  const double total = lda_weights(counts, hyper, doc, term, excluded.empty() ? nullptr : excluded.data(), out.data());
  normalize(out, total);
}

void conditional_linked(const CountState& counts, const Hyperparams& hyper, const InfluenceSet& influence,
                        DocId doc, TermId term, std::span<double> out, std::span<const double> excluded) {
  const std::size_t outcomes = influence.size(doc) * counts.topics;
  if (out.size() != outcomes || (!excluded.empty() && excluded.size() != outcomes)) {
    throw UsageError("conditional buffer sizes must equal |S_d| * topics");
  }
  std::vector<double> term_factor(counts.topics);
  const double total = linked_weights(counts, hyper, influence, doc, term,
                                      excluded.empty() ? nullptr : excluded.data(), term_factor.data(), out.data());
  normalize(out, total);
}

StepStats step_plain(const ModelContext& ctx, ChainState& state, DocRange docs) {
  check_range(ctx, docs);
  return sweep_groups(ctx, state, docs, &Sweeper::plain_group);
}

StepStats step_aggregated(const ModelContext& ctx, ChainState& state, DocRange docs) {
  check_range(ctx, docs);
  return sweep_groups(ctx, state, docs, &Sweeper::aggregated_group);
}

StepStats step_limit(const ModelContext& ctx, ChainState& state, DocRange docs) {
  check_range(ctx, docs);
  return sweep_groups(ctx, state, docs, &Sweeper::limit_group);
}

std::uint64_t sparse_draw_count(std::uint64_t length, double ell) {
  const double rounded = std::nearbyint(static_cast<double>(length) / ell);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(rounded));
}

StepStats step_sparse(const ModelContext& ctx, ChainState& state, double ell, SparseBase base, DocRange docs,
                      std::vector<std::uint64_t>* group_updates) {
  check_range(ctx, docs);
  if (!(ell >= 1.0)) throw UsageError("sparsity ell must be at least 1");
  const Corpus& corpus = ctx.corpus();
  if (group_updates) group_updates->resize(corpus.group_count(), 0);
  Sweeper sweeper(ctx, state);
  const auto update = base == SparseBase::limit ? &Sweeper::limit_group : &Sweeper::aggregated_group;
  std::vector<std::uint64_t> cumulative;
  for (DocId d = docs.begin; d < docs.end; ++d) {
    const Document& doc = corpus.document(d);
    const auto groups = doc.groups();
    cumulative.resize(groups.size());
    std::uint64_t run = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) cumulative[i] = run += groups[i].count;
    const std::uint64_t draws = sparse_draw_count(doc.length(), ell);
    for (std::uint64_t i = 0; i < draws; ++i) {
      const auto target = static_cast<std::uint64_t>(state.rng.uniform() * static_cast<double>(run));
      const auto local = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
      const std::size_t g = corpus.group_begin(d) + local;
      (sweeper.*update)(d, g, groups[local]);
      ++sweeper.stats().group_updates;
      if (group_updates) ++(*group_updates)[g];
    }
  }
  return sweeper.stats();
}

StepStats step(const ModelContext& ctx, const SamplerConfig& config, ChainState& state, DocRange docs) {
  switch (config.strategy) {
    case Strategy::plain: return step_plain(ctx, state, docs);
    case Strategy::aggregated: return step_aggregated(ctx, state, docs);
    case Strategy::limit: return step_limit(ctx, state, docs);
    case Strategy::sparse: return step_sparse(ctx, state, config.sparsity_ell, SparseBase::limit, docs);
    case Strategy::aggregated_sparse:
      return step_sparse(ctx, state, config.sparsity_ell, SparseBase::aggregated, docs);
  }
  throw UsageError("unknown strategy");
}

void IterationLog::write_csv(std::ostream& out) const {
  out << "iteration,wall_ms,likelihood\n";
  for (const auto& r : records) {
    out << r.iteration << ',' << detail::format_double(r.wall_ms) << ',';
    if (r.likelihood) out << detail::format_double(*r.likelihood);
    out << '\n';
  }
}

void advance_chain(const ModelContext& ctx, const SamplerConfig& config, ChainState& state, std::size_t iterations,
                   DocRange docs, IterationLog& log, const ProgressSink& sink) {
  config.validate();
  if (config.model != ctx.kind()) throw UsageError("sampler configuration and model kind disagree");
  check_range(ctx, docs);
  check_storage(state, is_fractional(config.strategy));
  for (std::size_t i = 0; i < iterations; ++i) {
    const std::size_t iteration = state.iteration + 1;
    IterationRecord record;
    record.iteration = iteration;
    try {
      const auto start = std::chrono::steady_clock::now();
      step(ctx, config, state, docs);
      const auto stop = std::chrono::steady_clock::now();
      record.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      state.iteration = iteration;
      if (is_fractional(config.strategy) && iteration % config.recount_every == 0) {
        state.counts = counts_from_assignments(ctx, state.assignments);
      }
    } catch (const ConsistencyError& e) {
      throw ConsistencyError("iteration " + std::to_string(iteration) + ": " + e.what());
    }
    if (sink.eval_every > 0 && sink.evaluate && iteration % sink.eval_every == 0) {
      record.likelihood = sink.evaluate(state);
    }
    if (sink.on_iteration) sink.on_iteration(record);
    log.records.push_back(record);
  }
}

ChainResult run_chain(const ModelContext& ctx, const SamplerConfig& config, const ProgressSink& sink) {
  config.validate();
  ChainResult result{init_assignments(ctx, config.strategy, config.seed), {}};
  advance_chain(ctx, config, result.state, config.iterations, all_documents(ctx.corpus()), result.log, sink);
  return result;
}

Checkpoint make_checkpoint(const ModelContext& ctx, const SamplerConfig& config, const ChainState& state) {
  Checkpoint ckpt;
  ckpt.kind = ctx.kind();
  ckpt.strategy = config.strategy;
  ckpt.sparsity_ell = config.sparsity_ell;
  ckpt.recount_every = config.recount_every;
  ckpt.seed = config.seed;
  ckpt.doc_count = ctx.corpus().doc_count();
  ckpt.hyper = ctx.hyper();
  ckpt.iteration = state.iteration;
  ckpt.assignments = state.assignments;
  ckpt.rng_state = state.rng.serialize();
  return ckpt;
}

SamplerConfig config_from_checkpoint(const Checkpoint& ckpt, std::size_t iterations) {
  SamplerConfig config;
  config.model = ckpt.kind;
  config.strategy = ckpt.strategy;
  config.sparsity_ell = ckpt.sparsity_ell;
  config.recount_every = ckpt.recount_every;
  config.seed = ckpt.seed;
  config.iterations = iterations;
  return config;
}

ChainState resume_chain(const ModelContext& ctx, const Checkpoint& ckpt) {
  if (ckpt.kind != ctx.kind() || ckpt.doc_count != ctx.corpus().doc_count() || !(ckpt.hyper == ctx.hyper())) {
    throw ValidationError("checkpoint does not match the corpus and model");
  }
  ChainState state;
  state.assignments = ckpt.assignments;
  const auto expected = make_layout(ctx, ckpt.strategy);
  if (expected.slots.size() != state.assignments.slots.size()) {
    throw ValidationError("checkpoint group count does not match the corpus");
  }
  for (std::size_t g = 0; g < expected.slots.size(); ++g) {
    if (expected.slots[g].storage != state.assignments.slots[g].storage ||
        expected.slots[g].offset != state.assignments.slots[g].offset) {
      throw ValidationError("checkpoint layout does not match the corpus at group " + std::to_string(g));
    }
  }
  try {
    state.counts = counts_from_assignments(ctx, state.assignments);
  } catch (const ConsistencyError& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
  state.rng.restore(ckpt.rng_state);
  state.iteration = ckpt.iteration;
  return state;
}

}  // namespace linklda
