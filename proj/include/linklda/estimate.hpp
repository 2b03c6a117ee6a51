#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "linklda/model.hpp"
#include "linklda/sampler.hpp"

namespace linklda {

/// Point estimates read off one chain sample.
struct TopicModel {
  ModelKind kind = ModelKind::lda;
  std::size_t topics = 0;
  std::size_t vocab = 0;
  std::vector<double> phi;    // [z * vocab + w]
  std::vector<double> theta;  // [d * topics + z]
  InfluenceSet influence;     // S_d layout for chi
  std::vector<double> chi;    // flat over `influence`; empty for plain LDA

  std::size_t doc_count() const { return topics == 0 ? 0 : theta.size() / topics; }
  std::span<const double> phi_row(std::size_t z) const { return {phi.data() + z * vocab, vocab}; }
  std::span<const double> theta_row(DocId d) const { return {theta.data() + std::size_t{d} * topics, topics}; }
  std::span<const double> chi_of(DocId d) const { return {chi.data() + influence.offset(d), influence.size(d)}; }
};

/// phi_z(w) = (N_zw + beta_w) / (N_z + sum beta), row-major by topic.
std::vector<double> estimate_phi(const CountState& counts, const Hyperparams& hyper);
/// theta_d(z) = (N_dz + alpha_z) / (N_d + sum alpha), using influence-credited counts in linked mode.
std::vector<double> estimate_theta(const CountState& counts, const Hyperparams& hyper);
/// chi_d(r) = (M_dr + gamma_d(r)) / sum over S_d.
std::vector<double> estimate_chi(const CountState& counts, const InfluenceSet& influence);

TopicModel estimate_model(const ModelContext& ctx, const CountState& counts);

/// `doc_id,label,theta_0..theta_{k-1}`; the label is empty for unlabeled documents.
void write_theta_csv(std::ostream& out, const TopicModel& model, const Corpus& corpus);
/// `src,dst,weight` over every S_d, self row first. Linked models only (UsageError otherwise).
void write_chi_csv(std::ostream& out, const TopicModel& model);

struct HeldoutScore {
  double score = 0.0;  // exp(-(1/|P|) * sum log p(w_i))
  std::uint64_t positions = 0;
  double total_loglik = 0.0;
  std::vector<DocId> docs;
  std::vector<double> doc_loglik;  // aligned with `docs`
};

/// Geometric-mean inverse word probability over the positions of `docs`.
/// Linked models mix theta over S_d with chi_d; `corpus` must be the corpus
/// the model's influence sets were built on. Throws ValidationError on a term
/// outside the model's vocabulary.
HeldoutScore heldout_likelihood(const TopicModel& model, const Corpus& corpus, std::span<const DocId> docs);
/// Every document of `corpus`.
HeldoutScore heldout_likelihood(const TopicModel& model, const Corpus& corpus);

struct UnseenResult {
  TopicModel model;  // over the combined corpus
  ChainState state;
};

/// Samples assignments for documents [train_docs, m) of `combined` while the
/// training assignments (the first train_docs documents) stay frozen; their
/// counts take part in every conditional but never change. Uses
/// config.strategy and a generator seeded with config.seed.
UnseenResult unseen_inference(const ModelContext& combined, std::size_t train_docs, const ChainState& train_state,
                              const SamplerConfig& config, std::size_t iterations = 20);

}  // namespace linklda
