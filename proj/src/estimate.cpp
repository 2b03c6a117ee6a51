#include "linklda/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "linklda/error.hpp"
#include "linklda/kernels.hpp"
#include "text_io.hpp"

namespace linklda {

std::vector<double> estimate_phi(const CountState& counts, const Hyperparams& hyper) {
  const std::size_t k = counts.topics;
  const std::size_t v = counts.vocab;
  std::vector<double> phi(k * v);
  for (std::size_t z = 0; z < k; ++z) {
    const double denom = counts.topic_total[z] + hyper.beta_sum();
    for (std::size_t w = 0; w < v; ++w) phi[z * v + w] = (counts.word_topic[w * k + z] + hyper.beta(w)) / denom;
  }
  return phi;
}

std::vector<double> estimate_theta(const CountState& counts, const Hyperparams& hyper) {
  const std::size_t k = counts.topics;
  const std::size_t m = counts.doc_count();
  std::vector<double> theta(m * k);
  for (std::size_t d = 0; d < m; ++d) {
    const double denom = counts.doc_total[d] + hyper.alpha_sum();
    for (std::size_t z = 0; z < k; ++z) theta[d * k + z] = (counts.doc_topic[d * k + z] + hyper.alpha(z)) / denom;
  }
  return theta;
}

std::vector<double> estimate_chi(const CountState& counts, const InfluenceSet& influence) {
  std::vector<double> chi(influence.total_size());
  for (DocId d = 0; d < influence.doc_count(); ++d) {
    const auto gamma = influence.gamma(d);
    const std::size_t base = influence.offset(d);
    double denom = 0.0;
    for (std::size_t r = 0; r < gamma.size(); ++r) denom += counts.influence[base + r] + gamma[r];
    for (std::size_t r = 0; r < gamma.size(); ++r) chi[base + r] = (counts.influence[base + r] + gamma[r]) / denom;
  }
  return chi;
}

TopicModel estimate_model(const ModelContext& ctx, const CountState& counts) {
  TopicModel model;
  model.kind = ctx.kind();
  model.topics = counts.topics;
  model.vocab = counts.vocab;
  model.phi = estimate_phi(counts, ctx.hyper());
  model.theta = estimate_theta(counts, ctx.hyper());
  model.influence = ctx.influence();
  if (ctx.kind() == ModelKind::linked) model.chi = estimate_chi(counts, ctx.influence());
  return model;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

void write_theta_csv(std::ostream& out, const TopicModel& model, const Corpus& corpus) {
  if (model.doc_count() != corpus.doc_count()) throw ValidationError("model and corpus document counts differ");
  out << "doc_id,label";
  for (std::size_t z = 0; z < model.topics; ++z) out << ",theta_" << z;
  out << '\n';
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    out << d << ',' << (corpus.label(d) ? csv_field(*corpus.label(d)) : "");
    for (double v : model.theta_row(d)) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

void write_chi_csv(std::ostream& out, const TopicModel& model) {
  if (model.kind != ModelKind::linked) throw UsageError("chi is only defined for linked models");
  out << "src,dst,weight\n";
  for (DocId d = 0; d < model.influence.doc_count(); ++d) {
    const auto members = model.influence.members(d);
    const auto chi = model.chi_of(d);
    for (std::size_t r = 0; r < members.size(); ++r) out << d << ',' << members[r] << ',' << detail::format_double(chi[r]) << '\n';
  }
}

HeldoutScore heldout_likelihood(const TopicModel& model, const Corpus& corpus, std::span<const DocId> docs) {
  if (model.doc_count() != corpus.doc_count()) {
    throw ValidationError("model covers " + std::to_string(model.doc_count()) + " documents, corpus has " +
                          std::to_string(corpus.doc_count()));
  }
  HeldoutScore score;
  score.docs.assign(docs.begin(), docs.end());
  score.doc_loglik = kernels::heldout_loglik_parallel(model, corpus, docs);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    score.positions += corpus.document(docs[i]).length();
    score.total_loglik += score.doc_loglik[i];
  }
  if (score.positions == 0) throw ValidationError("held-out set has no positions");
  score.score = std::exp(-score.total_loglik / static_cast<double>(score.positions));
  return score;
}

HeldoutScore heldout_likelihood(const TopicModel& model, const Corpus& corpus) {
  std::vector<DocId> docs(corpus.doc_count());
  std::iota(docs.begin(), docs.end(), DocId{0});
  return heldout_likelihood(model, corpus, docs);
}

UnseenResult unseen_inference(const ModelContext& combined, std::size_t train_docs, const ChainState& train_state,
                              const SamplerConfig& config, std::size_t iterations) {
  const Corpus& corpus = combined.corpus();
  if (train_docs > corpus.doc_count()) throw UsageError("more training documents than the combined corpus holds");
  const std::size_t train_groups = corpus.group_begin(static_cast<DocId>(train_docs));
  const auto& frozen = train_state.assignments;
  if (frozen.slots.size() != train_groups || frozen.topics != combined.topics() || frozen.kind != combined.kind()) {
    throw ValidationError("training state does not match the leading documents of the combined corpus");
  }

  UnseenResult result;
  ChainState& state = result.state;
  state.rng = Rng(config.seed);
  state.assignments = make_layout(combined, config.strategy);
  auto& a = state.assignments;
  for (std::size_t g = 0; g < train_groups; ++g) {
    if (a.slots[g].storage != frozen.slots[g].storage || a.slots[g].offset != frozen.slots[g].offset) {
      throw ValidationError("training state was produced by a different strategy");
    }
  }
  if (frozen.positions.size() > a.positions.size() || frozen.mass.size() > a.mass.size()) {
    throw ValidationError("training state is larger than the combined layout");
  }
  std::copy(frozen.positions.begin(), frozen.positions.end(), a.positions.begin());
  std::copy(frozen.mass.begin(), frozen.mass.end(), a.mass.begin());

  const DocRange test{static_cast<DocId>(train_docs), static_cast<DocId>(corpus.doc_count())};
  randomize_documents(combined, a, state.rng, test.begin, test.end);
  state.counts = counts_from_assignments(combined, a);

  if (combined.topics() > 1 && test.begin < test.end) {
    IterationLog log;
    SamplerConfig cfg = config;
    cfg.model = combined.kind();
    advance_chain(combined, cfg, state, iterations, test, log);
  }
  result.model = estimate_model(combined, state.counts);
  return result;
}

}  // namespace linklda
