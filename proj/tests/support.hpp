#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "linklda/corpus.hpp"
#include "linklda/kernels.hpp"
#include "linklda/model.hpp"
#include "linklda/sampler.hpp"

namespace linklda::testing {

/// Corpus from whitespace-free token strings: each character is a term
/// ('a' = 0, 'b' = 1, ...). `links` are (src, dst, weight).
inline Corpus tiny_corpus(const std::vector<std::string>& docs, std::size_t vocab,
                          const std::vector<std::tuple<DocId, DocId, double>>& links = {},
                          std::vector<std::optional<std::string>> labels = {}) {
  std::vector<std::string> terms;
  for (std::size_t i = 0; i < vocab; ++i) terms.push_back(std::string(1, static_cast<char>('a' + i)));
  std::vector<Document> documents;
  for (const auto& text : docs) {
    std::vector<TermGroup> tokens;
    for (char c : text) tokens.push_back({static_cast<TermId>(c - 'a'), 1});
    documents.emplace_back(std::move(tokens));
  }
  LinkGraph graph(docs.size());
  for (const auto& [s, t, w] : links) graph.add(s, t, w);
  return Corpus(Vocabulary(std::move(terms)), std::move(documents), std::move(graph), std::move(labels));
}

/// One occurrence of the corpus with its document and term, in sampler order.
struct Position {
  DocId doc;
  TermId term;
};

inline std::vector<Position> positions_of(const Corpus& corpus) {
  std::vector<Position> out;
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    for (const auto& g : corpus.document(d).groups()) {
      for (std::uint32_t i = 0; i < g.count; ++i) out.push_back({d, g.term});
    }
  }
  return out;
}

/// log of the collapsed joint p(w, z) up to a constant, LDA. Computed from
/// the raw assignment vector without any library count code.
inline double lda_log_joint(const Corpus& corpus, const std::vector<Position>& pos, const std::vector<int>& z,
                            std::size_t k, double alpha, double beta) {
  const std::size_t m = corpus.doc_count();
  const std::size_t v = corpus.vocab_size();
  std::vector<double> ndz(m * k, 0.0), nd(m, 0.0), nzw(k * v, 0.0), nz(k, 0.0);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    ndz[pos[i].doc * k + z[i]] += 1;
    nd[pos[i].doc] += 1;
    nzw[z[i] * v + pos[i].term] += 1;
    nz[z[i]] += 1;
  }
  double s = 0.0;
  for (std::size_t d = 0; d < m; ++d) {
    for (std::size_t t = 0; t < k; ++t) s += std::lgamma(ndz[d * k + t] + alpha);
    s -= std::lgamma(nd[d] + k * alpha);
  }
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t w = 0; w < v; ++w) s += std::lgamma(nzw[t * v + w] + beta);
    s -= std::lgamma(nz[t] + v * beta);
  }
  return s;
}

/// Linked-LDA collapsed joint p(w, z, r) up to a constant. `r` holds actual
/// document ids; gamma[d] is indexed like S_d = [d] ++ sorted outneighbors.
inline double linked_log_joint(const Corpus& corpus, const std::vector<Position>& pos, const std::vector<int>& z,
                               const std::vector<DocId>& r, std::size_t k, double alpha, double beta,
                               const std::vector<std::vector<double>>& gamma) {
  const std::size_t m = corpus.doc_count();
  const std::size_t v = corpus.vocab_size();
  std::vector<double> nrz(m * k, 0.0), nr(m, 0.0), nzw(k * v, 0.0), nz(k, 0.0);
  std::vector<std::map<DocId, double>> mdr(m);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    nrz[r[i] * k + z[i]] += 1;
    nr[r[i]] += 1;
    nzw[z[i] * v + pos[i].term] += 1;
    nz[z[i]] += 1;
    mdr[pos[i].doc][r[i]] += 1;
  }
  double s = 0.0;
  for (std::size_t d = 0; d < m; ++d) {
    for (std::size_t t = 0; t < k; ++t) s += std::lgamma(nrz[d * k + t] + alpha);
    s -= std::lgamma(nr[d] + k * alpha);
    std::vector<DocId> members{static_cast<DocId>(d)};
    for (const auto& l : corpus.links().outlinks(static_cast<DocId>(d))) members.push_back(l.target);
    double gsum = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      s += std::lgamma(mdr[d][members[j]] + gamma[d][j]);
      gsum += gamma[d][j];
    }
    s -= std::lgamma(static_cast<double>(corpus.document(static_cast<DocId>(d)).length()) + gsum);
  }
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t w = 0; w < v; ++w) s += std::lgamma(nzw[t * v + w] + beta);
    s -= std::lgamma(nz[t] + v * beta);
  }
  return s;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// Small random corpus for property tests: a few documents, repeated terms
/// (some groups at or above the aggregated count threshold) and random links.
inline Corpus random_corpus(std::mt19937_64& gen, std::size_t max_docs = 7, std::size_t max_vocab = 8) {
  std::uniform_int_distribution<std::size_t> ndocs(2, max_docs), nvocab(2, max_vocab), len(1, 14);
  const std::size_t m = ndocs(gen);
  const std::size_t v = nvocab(gen);
  std::vector<std::string> terms;
  for (std::size_t i = 0; i < v; ++i) terms.push_back("t" + std::to_string(i));
  std::uniform_int_distribution<TermId> term(0, static_cast<TermId>(v - 1));
  std::uniform_int_distribution<std::uint32_t> burst(1, 6);
  std::vector<Document> docs;
  for (std::size_t d = 0; d < m; ++d) {
    std::vector<TermGroup> tokens;
    const std::size_t n = len(gen);
    for (std::size_t i = 0; i < n; ++i) tokens.push_back({term(gen), burst(gen)});
    docs.emplace_back(std::move(tokens));
  }
  LinkGraph links(m);
  std::uniform_int_distribution<DocId> doc(0, static_cast<DocId>(m - 1));
  std::uniform_real_distribution<double> weight(0.5, 3.0);
  std::uniform_int_distribution<int> nlinks(0, 3);
  for (std::size_t d = 0; d < m; ++d) {
    for (int e = nlinks(gen); e > 0; --e) links.add(static_cast<DocId>(d), doc(gen), weight(gen));
  }
  std::vector<std::optional<std::string>> labels(m);
  for (std::size_t d = 0; d < m; ++d) labels[d] = (d % 2 == 0) ? "even" : "odd";
  return Corpus(Vocabulary(std::move(terms)), std::move(docs), std::move(links), std::move(labels));
}

/// Exact posterior over every joint outcome vector of a tiny corpus. Outcome
/// i of a state is digit i in mixed radix over the per-position outcome
/// counts (|S_d| * k, or k for LDA), in sampler position order.
struct StateSpace {
  std::vector<Position> positions;
  std::vector<std::size_t> radix;

  std::size_t size() const {
    std::size_t n = 1;
    for (auto r : radix) n *= r;
    return n;
  }
  std::vector<std::uint32_t> decode(std::size_t s) const {
    std::vector<std::uint32_t> out(radix.size());
    for (std::size_t i = 0; i < radix.size(); ++i) {
      out[i] = static_cast<std::uint32_t>(s % radix[i]);
      s /= radix[i];
    }
    return out;
  }
  std::size_t encode(const std::vector<std::uint32_t>& o) const {
    std::size_t s = 0;
    for (std::size_t i = radix.size(); i-- > 0;) s = s * radix[i] + o[i];
    return s;
  }
};

inline StateSpace state_space(const ModelContext& ctx) {
  StateSpace space;
  space.positions = positions_of(ctx.corpus());
  for (const auto& p : space.positions) space.radix.push_back(ctx.outcomes(p.doc));
  return space;
}

/// Unnormalized log joint of a full outcome vector, computed directly from
/// Dirichlet-multinomial integrals (independent of the library's counts).
inline double log_joint(const ModelContext& ctx, const StateSpace& space, const std::vector<std::uint32_t>& o) {
  const std::size_t k = ctx.topics();
  const double alpha = ctx.hyper().alpha(0);
  const double beta = ctx.hyper().beta(0);
  std::vector<int> z(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) z[i] = static_cast<int>(o[i] % k);
  if (ctx.kind() == ModelKind::lda) return lda_log_joint(ctx.corpus(), space.positions, z, k, alpha, beta);
  std::vector<DocId> r(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) r[i] = ctx.influence().members(space.positions[i].doc)[o[i] / k];
  std::vector<std::vector<double>> gamma;
  for (DocId d = 0; d < ctx.corpus().doc_count(); ++d) {
    const auto g = ctx.influence().gamma(d);
    gamma.emplace_back(g.begin(), g.end());
  }
  return linked_log_joint(ctx.corpus(), space.positions, z, r, k, alpha, beta, gamma);
}

inline std::vector<double> exact_posterior(const ModelContext& ctx, const StateSpace& space) {
  std::vector<double> logp(space.size());
  for (std::size_t s = 0; s < logp.size(); ++s) logp[s] = log_joint(ctx, space, space.decode(s));
  const double top = *std::max_element(logp.begin(), logp.end());
  std::vector<double> p(logp.size());
  double total = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) total += p[s] = std::exp(logp[s] - top);
  for (auto& x : p) x /= total;
  return p;
}

/// Position outcomes of a chain whose groups all use per-occurrence storage.
inline std::vector<std::uint32_t> position_outcomes(const ChainState& state) { return state.assignments.positions; }

/// Empirical distribution of a chain's full outcome vector: `burn_in` sweeps,
/// then `sweeps` more, recording every `thin`-th.
inline std::vector<double> chain_histogram(const ModelContext& ctx, const StateSpace& space, Strategy strategy,
                                           std::uint64_t seed, std::size_t burn_in, std::size_t sweeps,
                                           std::size_t thin) {
  SamplerConfig config;
  config.model = ctx.kind();
  config.strategy = strategy;
  auto state = init_assignments(ctx, strategy, seed);
  const DocRange all = all_documents(ctx.corpus());
  for (std::size_t i = 0; i < burn_in; ++i) step(ctx, config, state, all);
  std::vector<double> hist(space.size(), 0.0);
  std::size_t samples = 0;
  for (std::size_t i = 1; i <= sweeps; ++i) {
    step(ctx, config, state, all);
    if (i % thin == 0) {
      hist[space.encode(position_outcomes(state))] += 1.0;
      ++samples;
    }
  }
  for (auto& h : hist) h /= static_cast<double>(samples);
  return hist;
}

/// Exact one-sweep transition matrix of a group-wise kernel: groups are
/// visited in sampler order, and `update_group` maps the current outcome
/// vector and the group's first position index to the distribution F from
/// which every occurrence of the group is redrawn independently. With one
/// occurrence per group this is the plain Gibbs kernel.
inline std::vector<double> sweep_kernel(
    const StateSpace& space, const std::vector<std::pair<std::size_t, std::size_t>>& groups,
    const std::function<std::vector<double>(const std::vector<std::uint32_t>&, std::size_t)>& update_group) {
  const std::size_t n = space.size();
  std::vector<double> kernel(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) kernel[s * n + s] = 1.0;
  for (const auto& [first, count] : groups) {
    std::vector<double> step(n * n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const auto o = space.decode(s);
      const auto f = update_group(o, first);
      // Every combination of outcomes for the group's occurrences.
      std::vector<std::uint32_t> next = o;
      const std::size_t outcomes = f.size();
      std::size_t combos = 1;
      for (std::size_t i = 0; i < count; ++i) combos *= outcomes;
      for (std::size_t c = 0; c < combos; ++c) {
        std::size_t rest = c;
        double p = 1.0;
        for (std::size_t i = 0; i < count; ++i) {
          next[first + i] = static_cast<std::uint32_t>(rest % outcomes);
          p *= f[rest % outcomes];
          rest /= outcomes;
        }
        step[s * n + space.encode(next)] += p;
      }
    }
    std::vector<double> product(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        const double x = kernel[a * n + b];
        if (x == 0.0) continue;
        for (std::size_t c = 0; c < n; ++c) product[a * n + c] += x * step[b * n + c];
      }
    }
    kernel = std::move(product);
  }
  return kernel;
}

/// Full conditional of one position from ratios of the exact joint.
inline std::vector<double> joint_conditional(const ModelContext& ctx, const StateSpace& space,
                                             std::vector<std::uint32_t> o, std::size_t position) {
  std::vector<double> logp(space.radix[position]);
  for (std::size_t v = 0; v < logp.size(); ++v) {
    o[position] = static_cast<std::uint32_t>(v);
    logp[v] = log_joint(ctx, space, o);
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  std::vector<double> p(logp.size());
  double total = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) total += p[v] = std::exp(logp[v] - top);
  for (auto& x : p) x /= total;
  return p;
}

/// Stationary distribution of a row-stochastic matrix by power iteration.
inline std::vector<double> stationary(const std::vector<double>& kernel, std::size_t n) {
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < 20000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) next[b] += pi[a] * kernel[a * n + b];
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  return pi;
}

/// (first position, occurrence count) of every group, in sampler order.
inline std::vector<std::pair<std::size_t, std::size_t>> group_extents(const Corpus& corpus, bool split_occurrences) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t next = 0;
  for (const auto& doc : corpus.documents()) {
    for (const auto& g : doc.groups()) {
      if (split_occurrences) {
        for (std::uint32_t i = 0; i < g.count; ++i) out.emplace_back(next++, 1);
      } else {
        out.emplace_back(next, g.count);
        next += g.count;
      }
    }
  }
  return out;
}

// Triple loop over (citer, u, v); independent of both library kernels.
inline Adjacency brute_cocitation(const LinkGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (DocId x = 0; x < n; ++x) {
    for (const auto& a : g.outlinks(x)) {
      for (const auto& b : g.outlinks(x)) {
        if (a.target != b.target) m[a.target][b.target] += 1.0;
      }
    }
  }
  Adjacency out(n);
  for (DocId u = 0; u < n; ++u) {
    for (DocId v = 0; v < n; ++v) {
      if (m[u][v] > 0) out[u].push_back({v, m[u][v]});
    }
  }
  return out;
}

/// Directed graph with up to `max_nodes` nodes, density below 0.1 and
/// weights in [0.1, 3).
inline LinkGraph random_graph(std::mt19937_64& gen, std::size_t max_nodes) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(gen);
  const double density = std::uniform_real_distribution<double>(0.0, 0.1)(gen);
  LinkGraph g(n);
  std::bernoulli_distribution edge(density);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (DocId u = 0; u < n; ++u) {
    for (DocId v = 0; v < n; ++v) {
      if (u != v && edge(gen)) g.add(u, v, w(gen));
    }
  }
  return g;
}

inline const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> s{Strategy::plain, Strategy::aggregated, Strategy::limit, Strategy::sparse,
                                       Strategy::aggregated_sparse};
  return s;
}

}  // namespace linklda::testing
