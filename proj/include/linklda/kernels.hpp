#pragma once

// Data-parallel kernels. Each has a serial reference kept for testing and
// benchmarking; the parallel versions produce bit-identical results.

#include <span>
#include <vector>

#include "linklda/corpus.hpp"

namespace linklda {

struct TopicModel;

struct WeightedEdge {
  DocId target = 0;
  double weight = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

using Adjacency = std::vector<std::vector<WeightedEdge>>;

namespace kernels {

/// Sum over the document's positions of log p(w_i).
double document_loglik(const TopicModel& model, const Corpus& corpus, DocId d);

std::vector<double> heldout_loglik_serial(const TopicModel& model, const Corpus& corpus, std::span<const DocId> docs);
std::vector<double> heldout_loglik_parallel(const TopicModel& model, const Corpus& corpus,
                                            std::span<const DocId> docs);

/// coc(u, v) = number of common inneighbors; rows sorted by target, zeros omitted.
Adjacency cocitation_serial(const LinkGraph& graph);
Adjacency cocitation_parallel(const LinkGraph& graph);

/// Whether the parallel kernels were compiled with OpenMP.
bool openmp_enabled();

}  // namespace kernels
}  // namespace linklda
