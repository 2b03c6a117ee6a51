#include "linklda/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "linklda/error.hpp"
#include "linklda/estimate.hpp"

namespace linklda::kernels {

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

double document_loglik(const TopicModel& model, const Corpus& corpus, DocId d) {
  const std::size_t k = model.topics;
  const auto theta_d = model.theta_row(d);
  double total = 0.0;
  for (const auto& g : corpus.document(d).groups()) {
    if (g.term >= model.vocab) {
      throw ValidationError("term " + std::to_string(g.term) + " is outside the model vocabulary");
    }
    double p = 0.0;
    if (model.kind == ModelKind::lda) {
      for (std::size_t z = 0; z < k; ++z) p += model.phi[z * model.vocab + g.term] * theta_d[z];
    } else {
      const auto members = model.influence.members(d);
      const auto chi = model.chi_of(d);
      for (std::size_t r = 0; r < members.size(); ++r) {
        const auto theta_r = model.theta_row(members[r]);
        double mix = 0.0;
        for (std::size_t z = 0; z < k; ++z) mix += model.phi[z * model.vocab + g.term] * theta_r[z];
        p += chi[r] * mix;
      }
    }
    total += static_cast<double>(g.count) * std::log(p);
  }
  return total;
}

std::vector<double> heldout_loglik_serial(const TopicModel& model, const Corpus& corpus,
                                          std::span<const DocId> docs) {
  std::vector<double> out(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out[i] = document_loglik(model, corpus, docs[i]);
  return out;
}

std::vector<double> heldout_loglik_parallel(const TopicModel& model, const Corpus& corpus,
                                            std::span<const DocId> docs) {
  std::vector<double> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = document_loglik(model, corpus, docs[i]);
    } catch (const ValidationError& e) {
#pragma omp critical
      {
        failed = true;
        message = e.what();
      }
    }
  }
  if (failed) throw ValidationError(message);
  return out;
}

Adjacency cocitation_serial(const LinkGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::map<DocId, double>> acc(n);
  for (DocId x = 0; x < n; ++x) {
    const auto out = graph.outlinks(x);
    for (const auto& u : out) {
      for (const auto& v : out) {
        if (u.target != v.target) acc[u.target][v.target] += 1.0;
      }
    }
  }
  Adjacency result(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& [v, w] : acc[u]) result[u].push_back(WeightedEdge{v, w});
  }
  return result;
}

Adjacency cocitation_parallel(const LinkGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::vector<DocId>> inlinks(n);
  for (DocId x = 0; x < n; ++x) {
    for (const auto& l : graph.outlinks(x)) inlinks[l.target].push_back(x);
  }
  Adjacency result(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<std::uint32_t> hits(n, 0);
    std::vector<DocId> touched;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t ui = 0; ui < count; ++ui) {
      const auto u = static_cast<DocId>(ui);
      for (DocId x : inlinks[u]) {
        for (const auto& l : graph.outlinks(x)) {
          if (l.target != u && hits[l.target]++ == 0) touched.push_back(l.target);
        }
      }
      std::sort(touched.begin(), touched.end());
      auto& row = result[u];
      row.reserve(touched.size());
      for (DocId v : touched) {
        row.push_back(WeightedEdge{v, static_cast<double>(hits[v])});
        hits[v] = 0;
      }
      touched.clear();
    }
  }
  return result;
}

}  // namespace linklda::kernels
