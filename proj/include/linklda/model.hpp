#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linklda/corpus.hpp"
#include "linklda/rng.hpp"

namespace linklda {

enum class ModelKind { lda, linked };
enum class Strategy { plain, aggregated, limit, sparse, aggregated_sparse };

std::string_view to_string(ModelKind kind);
std::string_view to_string(Strategy strategy);
ModelKind parse_model_kind(std::string_view text);
/// Accepts "agg-sparse" as an alias of "aggregated_sparse".
Strategy parse_strategy(std::string_view text);

/// Strategies whose state holds fractional per-group distributions.
constexpr bool is_fractional(Strategy s) { return s == Strategy::limit || s == Strategy::sparse; }
constexpr bool is_sparse(Strategy s) { return s == Strategy::sparse || s == Strategy::aggregated_sparse; }

/// Dirichlet smoothing parameters. All entries strictly positive.
class Hyperparams {
 public:
  Hyperparams(std::vector<double> alpha, std::vector<double> beta, double gamma_scale_p = 10.0);

  /// alpha = 50/k, beta = 200/|V|, p = 10.
  static Hyperparams defaults(std::size_t topics, std::size_t vocab_size);
  static Hyperparams symmetric(std::size_t topics, std::size_t vocab_size, double alpha, double beta,
                               double gamma_scale_p = 10.0);

  std::size_t topics() const { return alpha_.size(); }
  std::size_t vocab_size() const { return beta_.size(); }
  std::span<const double> alpha() const { return alpha_; }
  std::span<const double> beta() const { return beta_; }
  double alpha(std::size_t z) const { return alpha_[z]; }
  double beta(std::size_t w) const { return beta_[w]; }
  double alpha_sum() const { return alpha_sum_; }
  double beta_sum() const { return beta_sum_; }
  double gamma_scale_p() const { return gamma_scale_p_; }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;

 private:
  std::vector<double> alpha_;
  std::vector<double> beta_;
  double gamma_scale_p_;
  double alpha_sum_ = 0.0;
  double beta_sum_ = 0.0;
};

/// gamma_d over S_d = [d] ++ outneighbors(d): proportional to the link
/// weight for each neighbor and to 1 + total outlink weight for d itself,
/// scaled to sum to N_d / p.
std::vector<double> compute_gamma(const Corpus& corpus, DocId doc, double p);

/// The influencing-document sets S_d with their smoothing vectors, stored flat.
class InfluenceSet {
 public:
  InfluenceSet() = default;

  /// S_d = {d} for every document (plain LDA).
  static InfluenceSet self_only(const Corpus& corpus);
  /// gamma from compute_gamma with scale p.
  static InfluenceSet from_links(const Corpus& corpus, double p);
  /// Every gamma entry equal to `value`.
  static InfluenceSet constant_gamma(const Corpus& corpus, double value);

  std::size_t doc_count() const { return offset_.empty() ? 0 : offset_.size() - 1; }
  std::size_t offset(DocId d) const { return offset_[d]; }
  std::size_t size(DocId d) const { return offset_[d + 1] - offset_[d]; }
  std::size_t total_size() const { return members_.size(); }
  std::span<const DocId> members(DocId d) const { return {members_.data() + offset_[d], size(d)}; }
  std::span<const double> gamma(DocId d) const { return {gamma_.data() + offset_[d], size(d)}; }
  double gamma_sum(DocId d) const { return gamma_sum_[d]; }

  friend bool operator==(const InfluenceSet&, const InfluenceSet&) = default;

 private:
  template <typename GammaFn>
  static InfluenceSet build(const Corpus& corpus, GammaFn gamma_of);

  std::vector<std::size_t> offset_;
  std::vector<DocId> members_;
  std::vector<double> gamma_;
  std::vector<double> gamma_sum_;
};

/// Sufficient statistics. Real-valued so fractional (limit) assignments fit;
/// integer strategies keep every entry integral.
///
/// In linked mode doc_topic(r, z) counts positions with topic z influenced by
/// r, wherever they occur, and influence holds M_dr flat over the
/// InfluenceSet layout. Plain LDA leaves influence empty.
struct CountState {
  std::size_t topics = 0;
  std::size_t vocab = 0;
  std::vector<double> doc_topic;    // [doc * topics + z]
  std::vector<double> doc_total;    // [doc]
  std::vector<double> word_topic;   // [term * topics + z]
  std::vector<double> topic_total;  // [z]
  std::vector<double> influence;    // [InfluenceSet::offset(d) + r_index]

  static CountState zeros(std::size_t docs, std::size_t topics, std::size_t vocab, std::size_t influence_size);

  std::size_t doc_count() const { return doc_total.size(); }
  double& at_doc(DocId d, std::size_t z) { return doc_topic[d * topics + z]; }
  double at_doc(DocId d, std::size_t z) const { return doc_topic[d * topics + z]; }
  double& at_word(TermId w, std::size_t z) { return word_topic[w * topics + z]; }
  double at_word(TermId w, std::size_t z) const { return word_topic[w * topics + z]; }

  friend bool operator==(const CountState&, const CountState&) = default;
};

/// Largest absolute entry-wise difference; infinity on shape mismatch.
double max_abs_difference(const CountState& a, const CountState& b);

/// How one (document, term) group stores its assignments.
enum class GroupStorage : std::uint8_t {
  positions,     // one outcome per occurrence
  counts,        // integer count per outcome (aggregated, high frequency)
  distribution,  // fractional distribution F over outcomes (limit, sparse)
};

/// Topic (and influencer) assignments for every group of a corpus.
///
/// An outcome encodes (r, z) as r_index * topics + z, where r_index is the
/// position of r inside S_d; plain LDA has r_index = 0 throughout.
struct AssignmentState {
  struct Slot {
    GroupStorage storage = GroupStorage::positions;
    std::size_t offset = 0;  // into `positions` or `mass`

    friend bool operator==(const Slot&, const Slot&) = default;
  };

  ModelKind kind = ModelKind::lda;
  std::size_t topics = 0;
  std::vector<Slot> slots;                 // per global group
  std::vector<std::uint32_t> positions;    // outcome per occurrence
  std::vector<double> mass;                // counts or distributions

  std::span<std::uint32_t> positions_of(std::size_t group, std::size_t tf) {
    return {positions.data() + slots[group].offset, tf};
  }
  std::span<const std::uint32_t> positions_of(std::size_t group, std::size_t tf) const {
    return {positions.data() + slots[group].offset, tf};
  }
  std::span<double> mass_of(std::size_t group, std::size_t outcomes) {
    return {mass.data() + slots[group].offset, outcomes};
  }
  std::span<const double> mass_of(std::size_t group, std::size_t outcomes) const {
    return {mass.data() + slots[group].offset, outcomes};
  }

  friend bool operator==(const AssignmentState&, const AssignmentState&) = default;
};

/// Groups at or above this frequency keep a count vector under aggregated sampling.
inline constexpr std::uint32_t kAggregatedCountThreshold = 4;

/// Everything a sampler needs that does not change while a chain runs.
class ModelContext {
 public:
  ModelContext(const Corpus& corpus, Hyperparams hyper, ModelKind kind);
  ModelContext(const Corpus& corpus, Hyperparams hyper, ModelKind kind, InfluenceSet influence);

  const Corpus& corpus() const { return *corpus_; }
  const Hyperparams& hyper() const { return hyper_; }
  const InfluenceSet& influence() const { return influence_; }
  ModelKind kind() const { return kind_; }
  std::size_t topics() const { return hyper_.topics(); }
  /// Number of (r, z) outcomes for positions of document d.
  std::size_t outcomes(DocId d) const {
    return kind_ == ModelKind::lda ? hyper_.topics() : influence_.size(d) * hyper_.topics();
  }

 private:
  const Corpus* corpus_;
  Hyperparams hyper_;
  ModelKind kind_;
  InfluenceSet influence_;
};

/// State of one running chain, exclusively owned by it.
struct ChainState {
  AssignmentState assignments;
  CountState counts;
  Rng rng;
  std::size_t iteration = 0;
};

/// Storage layout for `strategy` with every assignment zeroed.
AssignmentState make_layout(const ModelContext& ctx, Strategy strategy);

/// Draws random assignments for documents [begin, end). Per-occurrence
/// storage draws each outcome uniformly; distributions become a point mass
/// on one uniformly drawn outcome.
void randomize_documents(const ModelContext& ctx, AssignmentState& assignments, Rng& rng, DocId begin, DocId end);

/// Random initial state for the whole corpus with consistent counts.
ChainState init_assignments(const ModelContext& ctx, Strategy strategy, std::uint64_t seed);

/// Rebuilds counts from scratch. Throws ConsistencyError on an outcome
/// outside the document's range.
CountState counts_from_assignments(const ModelContext& ctx, const AssignmentState& assignments);

/// Adds the counts contributed by documents [begin, end).
void accumulate_counts(const ModelContext& ctx, const AssignmentState& assignments, DocId begin, DocId end,
                       CountState& counts);

/// Adds `mass` of outcome `o` at term `w` in document `d`.
inline void add_outcome(const ModelContext& ctx, CountState& counts, DocId d, TermId w, std::size_t o,
                        double mass) {
  const std::size_t k = counts.topics;
  if (ctx.kind() == ModelKind::lda) {
    counts.doc_topic[d * k + o] += mass;
    counts.doc_total[d] += mass;
    counts.word_topic[w * k + o] += mass;
    counts.topic_total[o] += mass;
    return;
  }
  const std::size_t r_index = o / k;
  const std::size_t z = o % k;
  const DocId r = ctx.influence().members(d)[r_index];
  counts.doc_topic[r * k + z] += mass;
  counts.doc_total[r] += mass;
  counts.word_topic[w * k + z] += mass;
  counts.topic_total[z] += mass;
  counts.influence[ctx.influence().offset(d) + r_index] += mass;
}

/// Resumable snapshot of a chain.
struct Checkpoint {
  ModelKind kind = ModelKind::lda;
  Strategy strategy = Strategy::plain;
  double sparsity_ell = 1.0;
  std::size_t recount_every = 25;
  std::uint64_t seed = 0;
  std::size_t doc_count = 0;
  Hyperparams hyper = Hyperparams::symmetric(1, 1, 1.0, 1.0);
  std::size_t iteration = 0;
  AssignmentState assignments;
  std::string rng_state;
};

/// Text format: header `ldackpt 1 <kind> <strategy> <k> <|V|> <m> <iteration> <seed>`,
/// then hyperparameters, sampler settings, generator state and one block
/// per document.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "checkpoint");

}  // namespace linklda
