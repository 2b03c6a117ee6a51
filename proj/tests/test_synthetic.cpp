#include <gtest/gtest.h>

#include <numeric>

#include "linklda/synthetic.hpp"

using namespace linklda;

TEST(Synthetic, LdaCorpusShapes) {
  GeneratorOptions o;
  const auto g = generate_lda_corpus(o);
  EXPECT_EQ(g.corpus.doc_count(), o.docs);
  EXPECT_EQ(g.corpus.vocab_size(), o.vocab);
  EXPECT_EQ(g.phi.size(), o.topics * o.vocab);
  EXPECT_EQ(g.theta.size(), o.docs * o.topics);
  for (std::size_t z = 0; z < o.topics; ++z) {
    EXPECT_NEAR(std::accumulate(g.phi.begin() + z * o.vocab, g.phi.begin() + (z + 1) * o.vocab, 0.0), 1.0, 1e-9);
  }
  for (DocId d = 0; d < o.docs; ++d) {
    EXPECT_GE(g.corpus.document(d).length(), 1u);
    ASSERT_TRUE(g.corpus.label(d).has_value());
    EXPECT_EQ(g.corpus.label(d)->front(), 't');
  }
  const double mean = static_cast<double>(g.corpus.token_count()) / static_cast<double>(o.docs);
  EXPECT_NEAR(mean, o.mean_length, 0.05 * o.mean_length);
}

TEST(Synthetic, BenchmarkCorpusHasBurstyTerms) {
  // Sparse topics make repeated terms common: mean term frequency per
  // (document, term) group is at least 5.
  const auto g = generate_lda_corpus(GeneratorOptions{});
  std::size_t groups = 0;
  for (const auto& d : g.corpus.documents()) groups += d.groups().size();
  EXPECT_GE(static_cast<double>(g.corpus.token_count()) / static_cast<double>(groups), 5.0);
}

TEST(Synthetic, Deterministic) {
  GeneratorOptions o;
  o.docs = 30;
  o.seed = 9;
  EXPECT_EQ(generate_lda_corpus(o).corpus, generate_lda_corpus(o).corpus);
  o.seed = 10;
  const auto other = generate_lda_corpus(o).corpus;
  o.seed = 9;
  EXPECT_FALSE(generate_lda_corpus(o).corpus == other);
}

TEST(Synthetic, InfluenceCorpusLinksSecondHalfToSources) {
  const auto c = generate_influence_corpus(InfluenceOptions{});
  const std::size_t n = c.generated.corpus.doc_count();
  ASSERT_EQ(c.influenced.size(), c.neighbor.size());
  EXPECT_EQ(c.influenced.size(), n - n / 2);
  for (std::size_t i = 0; i < c.influenced.size(); ++i) {
    const auto out = c.generated.corpus.links().outlinks(c.influenced[i]);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].target, c.neighbor[i]);
    EXPECT_LT(c.neighbor[i], n / 2);
  }
  for (DocId d = 0; d < n / 2; ++d) EXPECT_TRUE(c.generated.corpus.links().outlinks(d).empty());
}

TEST(Synthetic, TwoBlockLinksAreHomophilous) {
  TwoBlockOptions o;
  const auto g = generate_two_block_corpus(o);
  const auto& c = g.corpus;
  std::size_t inside = 0;
  std::size_t total = 0;
  for (DocId d = 0; d < c.doc_count(); ++d) {
    EXPECT_EQ(*c.label(d), d % 2 == 0 ? "A" : "B");
    for (const auto& l : c.links().outlinks(d)) {
      ++total;
      inside += c.label(d) == c.label(l.target);
    }
  }
  ASSERT_GT(total, 0u);
  EXPECT_NEAR(static_cast<double>(inside) / static_cast<double>(total), o.homophily, 0.05);
}
