#include "linklda/synthetic.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "linklda/error.hpp"
#include "linklda/rng.hpp"

namespace linklda {
namespace {

std::vector<double> dirichlet(Rng& rng, std::size_t n, double concentration) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) total += x = gamma(rng.engine()) + 1e-300;
  for (auto& x : v) x /= total;
  return v;
}

std::size_t categorical(Rng& rng, const double* p, std::size_t n) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (u < p[i]) return i;
    u -= p[i];
  }
  return n - 1;
}

std::uint32_t poisson_length(Rng& rng, double mean) {
  std::poisson_distribution<std::uint32_t> length(mean);
  return std::max<std::uint32_t>(1, length(rng.engine()));
}

Vocabulary numbered_vocabulary(std::size_t n) {
  std::vector<std::string> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) terms.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(terms));
}

std::vector<double> topic_matrix(Rng& rng, std::size_t topics, std::size_t vocab, double concentration) {
  std::vector<double> phi;
  phi.reserve(topics * vocab);
  for (std::size_t z = 0; z < topics; ++z) {
    auto row = dirichlet(rng, vocab, concentration);
    phi.insert(phi.end(), row.begin(), row.end());
  }
  return phi;
}

// Draws `length` tokens; each picks its mixture by `pick_mixture`, a topic from that mixture, then a term.
template <typename PickMixture>
Document draw_document(Rng& rng, const std::vector<double>& phi, std::size_t topics, std::size_t vocab,
                       std::uint32_t length, PickMixture pick_mixture) {
  std::vector<TermGroup> tokens;
  tokens.reserve(length);
  for (std::uint32_t i = 0; i < length; ++i) {
    const double* mixture = pick_mixture();
    const std::size_t z = categorical(rng, mixture, topics);
    const auto w = static_cast<TermId>(categorical(rng, phi.data() + z * vocab, vocab));
    tokens.push_back(TermGroup{w, 1});
  }
  return Document(std::move(tokens));
}

void validate(const GeneratorOptions& o) {
  if (o.docs == 0 || o.vocab == 0 || o.topics == 0 || !(o.mean_length > 0.0)) {
    throw UsageError("generator sizes must be positive");
  }
}

}  // namespace

GeneratedCorpus generate_lda_corpus(const GeneratorOptions& options) {
  validate(options);
  Rng rng(options.seed);
  GeneratedCorpus out;
  out.phi = topic_matrix(rng, options.topics, options.vocab, options.topic_concentration);
  std::vector<Document> documents;
  std::vector<std::optional<std::string>> labels;
  for (std::size_t d = 0; d < options.docs; ++d) {
    const auto theta = dirichlet(rng, options.topics, options.doc_concentration);
    out.theta.insert(out.theta.end(), theta.begin(), theta.end());
    const auto length = poisson_length(rng, options.mean_length);
    documents.push_back(draw_document(rng, out.phi, options.topics, options.vocab, length,
                                      [&] { return theta.data(); }));
    const auto dominant = std::max_element(theta.begin(), theta.end()) - theta.begin();
    labels.emplace_back("t" + std::to_string(dominant));
  }
  out.corpus = Corpus(numbered_vocabulary(options.vocab), std::move(documents), LinkGraph(options.docs),
                      std::move(labels));
  return out;
}

InfluenceCorpus generate_influence_corpus(const InfluenceOptions& options) {
  const auto& o = options.base;
  validate(o);
  if (o.docs < 2) throw UsageError("influence corpus needs at least two documents");
  Rng rng(o.seed);
  InfluenceCorpus out;
  auto& gen = out.generated;
  gen.phi = topic_matrix(rng, o.topics, o.vocab, o.topic_concentration);
  for (std::size_t d = 0; d < o.docs; ++d) {
    const auto theta = dirichlet(rng, o.topics, o.doc_concentration);
    gen.theta.insert(gen.theta.end(), theta.begin(), theta.end());
  }
  const std::size_t sources = o.docs / 2;
  LinkGraph links(o.docs);
  std::vector<Document> documents;
  std::vector<std::optional<std::string>> labels;
  for (std::size_t d = 0; d < o.docs; ++d) {
    const double* own = gen.theta.data() + d * o.topics;
    const auto length = poisson_length(rng, o.mean_length);
    if (d < sources) {
      documents.push_back(draw_document(rng, gen.phi, o.topics, o.vocab, length, [&] { return own; }));
    } else {
      const auto target = static_cast<DocId>(rng.below(sources));
      links.add(static_cast<DocId>(d), target, 1.0);
      out.influenced.push_back(static_cast<DocId>(d));
      out.neighbor.push_back(target);
      const double* theirs = gen.theta.data() + std::size_t{target} * o.topics;
      documents.push_back(draw_document(rng, gen.phi, o.topics, o.vocab, length, [&] {
        return rng.uniform() < options.influence_share ? theirs : own;
      }));
    }
    const auto dominant = std::max_element(own, own + o.topics) - own;
    labels.emplace_back("t" + std::to_string(dominant));
  }
  gen.corpus = Corpus(numbered_vocabulary(o.vocab), std::move(documents), std::move(links), std::move(labels));
  return out;
}

GeneratedCorpus generate_two_block_corpus(const TwoBlockOptions& o) {
  if (o.docs < 4 || o.topics < 2 || o.vocab == 0) throw UsageError("two-block corpus is too small");
  Rng rng(o.seed);
  GeneratedCorpus out;
  out.phi = topic_matrix(rng, o.topics, o.vocab, 0.05);
  const std::size_t half = o.topics / 2;
  std::vector<int> cls(o.docs);
  std::vector<Document> documents;
  std::vector<std::optional<std::string>> labels;
  for (std::size_t d = 0; d < o.docs; ++d) {
    cls[d] = static_cast<int>(d % 2);
    const auto noise = dirichlet(rng, o.topics, 0.5);
    const auto focus = dirichlet(rng, cls[d] == 0 ? half : o.topics - half, 0.5);
    std::vector<double> theta(o.topics);
    for (std::size_t z = 0; z < o.topics; ++z) {
      theta[z] = (1.0 - o.class_signal) * noise[z];
      const bool own_block = cls[d] == 0 ? z < half : z >= half;
      if (own_block) theta[z] += o.class_signal * focus[cls[d] == 0 ? z : z - half];
    }
    out.theta.insert(out.theta.end(), theta.begin(), theta.end());
    const auto length = poisson_length(rng, o.mean_length);
    documents.push_back(draw_document(rng, out.phi, o.topics, o.vocab, length, [&] { return theta.data(); }));
    labels.emplace_back(cls[d] == 0 ? "A" : "B");
  }
  LinkGraph links(o.docs);
  for (std::size_t d = 0; d < o.docs; ++d) {
    for (std::size_t e = 0; e < o.outlinks; ++e) {
      const bool same = rng.uniform() < o.homophily;
      DocId target = 0;
      do {
        target = static_cast<DocId>(rng.below(o.docs));
      } while (target == d || (cls[target] == cls[d]) != same);
      links.add(static_cast<DocId>(d), target, 1.0);
    }
  }
  out.corpus = Corpus(numbered_vocabulary(o.vocab), std::move(documents), std::move(links), std::move(labels));
  return out;
}

}  // namespace linklda
