#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "linklda/model.hpp"

namespace linklda {

struct SamplerConfig {
  ModelKind model = ModelKind::lda;
  Strategy strategy = Strategy::plain;
  double sparsity_ell = 1.0;  // sparse strategies only
  std::size_t iterations = 50;
  std::uint64_t seed = 1;
  std::size_t recount_every = 25;  // fractional strategies only

  /// Throws UsageError on ell < 1 or a zero recount interval.
  void validate() const;
};

/// Work done by one sweep.
struct StepStats {
  std::uint64_t conditionals = 0;
  std::uint64_t draws = 0;
  std::uint64_t group_updates = 0;

  StepStats& operator+=(const StepStats& o) {
    conditionals += o.conditionals;
    draws += o.draws;
    group_updates += o.group_updates;
    return *this;
  }
};

/// Half-open range of documents a sweep visits.
struct DocRange {
  DocId begin = 0;
  DocId end = 0;
};

inline DocRange all_documents(const Corpus& corpus) { return {0, static_cast<DocId>(corpus.doc_count())}; }

/// Counts more negative than this are treated as corruption.
inline constexpr double kNegativeCountTolerance = 1e-9;

/// Collapsed Gibbs conditional over topics for one occurrence of `term` in
/// `doc`. `excluded` (empty, or one entry per topic) is mass still present in
/// `counts` that must be treated as removed. Writes a normalized vector.
void conditional_lda(const CountState& counts, const Hyperparams& hyper, DocId doc, TermId term,
                     std::span<double> out, std::span<const double> excluded = {});

/// Joint conditional over (influencer, topic) for linked LDA, laid out as
/// r_index * topics + z over S_d. `excluded` has the same layout.
void conditional_linked(const CountState& counts, const Hyperparams& hyper, const InfluenceSet& influence,
                        DocId doc, TermId term, std::span<double> out, std::span<const double> excluded = {});

/// Resamples every occurrence once, in document, group, occurrence order.
StepStats step_plain(const ModelContext& ctx, ChainState& state, DocRange docs);

/// One conditional per group (first occurrence excluded), then every
/// occurrence of the group is redrawn from that fixed distribution.
StepStats step_aggregated(const ModelContext& ctx, ChainState& state, DocRange docs);

/// Deterministic: each group's distribution F is replaced by the conditional
/// evaluated with the group's own mass tf * F removed.
StepStats step_limit(const ModelContext& ctx, ChainState& state, DocRange docs);

enum class SparseBase { limit, aggregated };

/// Per document, max(1, round(N_d / ell)) groups drawn with replacement in
/// proportion to their frequency receive the base update, in draw order.
/// When `group_updates` is given it is indexed by global group and
/// incremented for every update.
StepStats step_sparse(const ModelContext& ctx, ChainState& state, double ell, SparseBase base, DocRange docs,
                      std::vector<std::uint64_t>* group_updates = nullptr);

/// Number of group draws for a document of `length` tokens (round half to even, at least 1).
std::uint64_t sparse_draw_count(std::uint64_t length, double ell);

/// Dispatches one sweep according to the configured strategy.
StepStats step(const ModelContext& ctx, const SamplerConfig& config, ChainState& state, DocRange docs);

struct IterationRecord {
  std::size_t iteration = 0;
  double wall_ms = 0.0;
  std::optional<double> likelihood;
};

struct IterationLog {
  std::vector<IterationRecord> records;

  /// `iteration,wall_ms,likelihood` with the likelihood left blank when not evaluated.
  void write_csv(std::ostream& out) const;
};

struct ProgressSink {
  std::size_t eval_every = 0;  // 0 disables evaluation
  std::function<double(const ChainState&)> evaluate;
  std::function<void(const IterationRecord&)> on_iteration;
};

struct ChainResult {
  ChainState state;
  IterationLog log;
};

/// Initializes from config.seed and runs config.iterations sweeps over the
/// whole corpus.
ChainResult run_chain(const ModelContext& ctx, const SamplerConfig& config, const ProgressSink& sink = {});

/// Runs `iterations` further sweeps over `docs`, recounting fractional state
/// every config.recount_every iterations. Consistency errors are rethrown
/// with the iteration number.
void advance_chain(const ModelContext& ctx, const SamplerConfig& config, ChainState& state, std::size_t iterations,
                   DocRange docs, IterationLog& log, const ProgressSink& sink = {});

/// Snapshot of a running chain under `config`.
Checkpoint make_checkpoint(const ModelContext& ctx, const SamplerConfig& config, const ChainState& state);

/// Sampler settings recorded in a checkpoint.
SamplerConfig config_from_checkpoint(const Checkpoint& ckpt, std::size_t iterations);

/// Rebuilds the chain a checkpoint describes. Counts are recomputed from the
/// assignments; throws ValidationError when the checkpoint does not fit `ctx`.
ChainState resume_chain(const ModelContext& ctx, const Checkpoint& ckpt);

}  // namespace linklda
