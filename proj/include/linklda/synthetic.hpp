#pragma once

// Planted-structure corpora for tests, benchmarks and the `synth` command.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "linklda/corpus.hpp"

namespace linklda {

struct GeneratorOptions {
  std::size_t docs = 500;
  std::size_t vocab = 1000;
  std::size_t topics = 10;
  double mean_length = 200.0;
  double topic_concentration = 0.004;  // symmetric Dirichlet for each topic's term distribution
  double doc_concentration = 0.05;     // symmetric Dirichlet for each document's topic mixture
  std::uint64_t seed = 1;
};

struct GeneratedCorpus {
  Corpus corpus;
  std::vector<double> phi;    // [z * vocab + w]
  std::vector<double> theta;  // [d * topics + z]
};

/// Plain LDA generative process. Every document is labeled "t<z>" by its
/// dominant topic. Lengths are Poisson(mean_length), at least 1.
GeneratedCorpus generate_lda_corpus(const GeneratorOptions& options);

struct InfluenceOptions {
  GeneratorOptions base{100, 400, 8, 150.0, 0.05, 0.1, 1};
  double influence_share = 0.7;  // fraction of an influenced document's tokens drawn from its neighbor
};

struct InfluenceCorpus {
  GeneratedCorpus generated;
  std::vector<DocId> influenced;  // documents with one outlink
  std::vector<DocId> neighbor;    // the document each of them links to
};

/// The first half of the documents are sources without outlinks; every
/// document of the second half links to one random source and draws
/// `influence_share` of its tokens from that source's topic mixture.
InfluenceCorpus generate_influence_corpus(const InfluenceOptions& options);

struct TwoBlockOptions {
  std::size_t docs = 200;
  std::size_t vocab = 300;
  std::size_t topics = 6;  // first half favored by class A, second half by class B
  double mean_length = 30.0;
  double class_signal = 0.35;  // weight of the class-specific mixture in each document
  std::size_t outlinks = 3;
  double homophily = 0.9;  // probability that a link stays inside the class
  std::uint64_t seed = 1;
};

/// Two labeled classes ("A", "B") with homophilous links and noisy,
/// partially class-dependent topic mixtures.
GeneratedCorpus generate_two_block_corpus(const TwoBlockOptions& options);

}  // namespace linklda
