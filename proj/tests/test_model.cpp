#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "linklda/error.hpp"
#include "linklda/model.hpp"
#include "linklda/sampler.hpp"
#include "support.hpp"

using namespace linklda;
using linklda::testing::all_strategies;
using linklda::testing::random_corpus;
using linklda::testing::tiny_corpus;

namespace {

// A document of `length` copies of term a, linked as given.
Corpus gamma_corpus(std::uint32_t length, const std::vector<std::tuple<DocId, DocId, double>>& links) {
  std::vector<Document> docs{Document({{0, length}}), Document({{0, 1}}), Document({{0, 1}})};
  LinkGraph g(3);
  for (const auto& [s, t, w] : links) g.add(s, t, w);
  return Corpus(Vocabulary({"a"}), std::move(docs), std::move(g));
}

}  // namespace

TEST(Hyperparams, DefaultsFollowTopicAndVocabularySize) {
  const auto h = Hyperparams::defaults(30, 400);
  EXPECT_DOUBLE_EQ(h.alpha(0), 50.0 / 30.0);
  EXPECT_DOUBLE_EQ(h.beta(7), 0.5);
  EXPECT_DOUBLE_EQ(h.gamma_scale_p(), 10.0);
  EXPECT_NEAR(h.alpha_sum(), 50.0, 1e-12);
  EXPECT_NEAR(h.beta_sum(), 200.0, 1e-9);
}

TEST(Hyperparams, RejectsNonPositiveEntries) {
  EXPECT_THROW(Hyperparams({1.0, 0.0}, {1.0}), ValidationError);
  EXPECT_THROW(Hyperparams({1.0}, {-1.0}), ValidationError);
  EXPECT_THROW(Hyperparams({1.0}, {1.0}, 0.0), ValidationError);
}

TEST(ComputeGamma, TwoWeightedNeighbors) {
  const auto c = gamma_corpus(100, {{0, 1, 3.0}, {0, 2, 1.0}});
  const auto g = compute_gamma(c, 0, 10.0);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0], 5.5556, 1e-4);
  EXPECT_NEAR(g[1], 3.3333, 1e-4);
  EXPECT_NEAR(g[2], 1.1111, 1e-4);
}

TEST(ComputeGamma, NoOutlinks) {
  const auto c = gamma_corpus(50, {});
  const auto g = compute_gamma(c, 0, 10.0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g[0], 5.0);
}

TEST(ComputeGamma, TwoUnitNeighbors) {
  const auto c = gamma_corpus(100, {{0, 1, 1.0}, {0, 2, 1.0}});
  const auto g = compute_gamma(c, 0, 10.0);
  EXPECT_NEAR(g[0], 6.0, 1e-12);
  EXPECT_NEAR(g[1], 2.0, 1e-12);
  EXPECT_NEAR(g[2], 2.0, 1e-12);
}

TEST(ComputeGamma, EmptyDocumentIsAnError) {
  std::vector<Document> docs{Document(), Document({{0, 1}})};
  Corpus c(Vocabulary({"a"}), std::move(docs), LinkGraph(2));
  EXPECT_THROW(compute_gamma(c, 0, 10.0), ValidationError);
}

TEST(ComputeGamma, SumAndProportionalityOnRandomCorpora) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(gen);
    const double p = 1.0 + trial % 13;
    const auto infl = InfluenceSet::from_links(c, p);
    for (DocId d = 0; d < c.doc_count(); ++d) {
      const auto g = infl.gamma(d);
      const auto members = infl.members(d);
      EXPECT_EQ(members[0], d);
      const double sum = std::accumulate(g.begin(), g.end(), 0.0);
      EXPECT_NEAR(sum, static_cast<double>(c.document(d).length()) / p, 1e-9);
      const auto out = c.links().outlinks(d);
      ASSERT_EQ(out.size() + 1, g.size());
      for (std::size_t i = 1; i < out.size(); ++i) {
        EXPECT_NEAR(g[i + 1] / out[i].weight, g[1] / out[0].weight, 1e-9);
      }
    }
  }
}

TEST(InitAssignments, SingleTopicAssignsTopicZero) {
  const auto c = tiny_corpus({"aab", "bbbbb"}, 2);
  for (auto s : all_strategies()) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      ModelContext ctx(c, Hyperparams::symmetric(1, 2, 0.5, 0.5), ModelKind::lda);
      const auto state = init_assignments(ctx, s, seed);
      for (auto o : state.assignments.positions) EXPECT_EQ(o, 0u);
      for (auto m : state.assignments.mass) EXPECT_TRUE(m == 0.0 || m == 1.0 || m == 5.0);
      EXPECT_DOUBLE_EQ(state.counts.topic_total[0], 8.0);
    }
  }
}

TEST(InitAssignments, CountsAreConsistentAndCoverEveryPosition) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(gen);
    const auto kind = trial % 2 ? ModelKind::linked : ModelKind::lda;
    const auto strategy = all_strategies()[trial % 5];
    ModelContext ctx(c, Hyperparams::symmetric(1 + trial % 4, c.vocab_size(), 0.3, 0.2), kind);
    const auto state = init_assignments(ctx, strategy, trial);
    EXPECT_EQ(state.counts, counts_from_assignments(ctx, state.assignments));
    double total = 0.0;
    for (double v : state.counts.topic_total) total += v;
    EXPECT_DOUBLE_EQ(total, static_cast<double>(c.token_count()));
    if (kind == ModelKind::linked) {
      for (DocId d = 0; d < c.doc_count(); ++d) {
        double m = 0.0;
        for (std::size_t r = 0; r < ctx.influence().size(d); ++r) m += state.counts.influence[ctx.influence().offset(d) + r];
        EXPECT_DOUBLE_EQ(m, static_cast<double>(c.document(d).length()));
      }
    }
  }
}

TEST(InitAssignments, LimitStartsFromPointMasses) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(gen);
    const auto kind = trial % 2 ? ModelKind::linked : ModelKind::lda;
    ModelContext ctx(c, Hyperparams::symmetric(2 + trial % 3, c.vocab_size(), 0.3, 0.2), kind);
    const auto state = init_assignments(ctx, Strategy::limit, trial);
    for (DocId d = 0; d < c.doc_count(); ++d) {
      std::size_t g = c.group_begin(d);
      for (std::size_t i = 0; i < c.document(d).group_count(); ++i, ++g) {
        const auto f = state.assignments.mass_of(g, ctx.outcomes(d));
        EXPECT_EQ(std::count(f.begin(), f.end(), 1.0), 1);
        EXPECT_EQ(std::count(f.begin(), f.end(), 0.0), static_cast<long>(f.size()) - 1);
      }
    }
  }
}

TEST(CountsFromAssignments, DirectTally) {
  const auto c = tiny_corpus({"aa"}, 2);
  ModelContext ctx(c, Hyperparams::symmetric(2, 2, 0.5, 0.5), ModelKind::linked);
  auto a = make_layout(ctx, Strategy::plain);
  const auto counts = counts_from_assignments(ctx, a);
  EXPECT_DOUBLE_EQ(counts.at_doc(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(counts.at_word(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(counts.influence[0], 2.0);
  EXPECT_DOUBLE_EQ(counts.doc_total[0], 2.0);
}

TEST(CountsFromAssignments, FractionalMassTimesFrequency) {
  const auto c = tiny_corpus({"aaaa"}, 1);
  ModelContext ctx(c, Hyperparams::symmetric(2, 1, 0.5, 0.5), ModelKind::lda);
  auto a = make_layout(ctx, Strategy::limit);
  a.mass = {0.25, 0.75};
  const auto counts = counts_from_assignments(ctx, a);
  EXPECT_DOUBLE_EQ(counts.at_doc(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(counts.at_doc(0, 1), 3.0);
}

TEST(CountsFromAssignments, EmptyCorpusGivesZeros) {
  Corpus c(Vocabulary({"a", "b"}), {}, LinkGraph(0));
  ModelContext ctx(c, Hyperparams::symmetric(3, 2, 0.5, 0.5), ModelKind::lda);
  const auto counts = counts_from_assignments(ctx, make_layout(ctx, Strategy::plain));
  EXPECT_EQ(counts.doc_count(), 0u);
  for (double v : counts.word_topic) EXPECT_EQ(v, 0.0);
  for (double v : counts.topic_total) EXPECT_EQ(v, 0.0);
}

TEST(CountsFromAssignments, InvalidOutcomeIsConsistencyError) {
  const auto c = tiny_corpus({"ab"}, 2);
  ModelContext ctx(c, Hyperparams::symmetric(2, 2, 0.5, 0.5), ModelKind::lda);
  auto a = make_layout(ctx, Strategy::plain);
  a.positions[1] = 2;
  EXPECT_THROW(counts_from_assignments(ctx, a), ConsistencyError);
}

TEST(Layout, AggregatedKeepsCountVectorsForFrequentTerms) {
  const auto c = tiny_corpus({"aaab", "bbbb"}, 2);
  ModelContext ctx(c, Hyperparams::symmetric(3, 2, 0.5, 0.5), ModelKind::lda);
  const auto a = make_layout(ctx, Strategy::aggregated);
  EXPECT_EQ(a.slots[0].storage, GroupStorage::positions);  // a x3
  EXPECT_EQ(a.slots[1].storage, GroupStorage::positions);  // b x1
  EXPECT_EQ(a.slots[2].storage, GroupStorage::counts);     // b x4
  const auto plain = make_layout(ctx, Strategy::plain);
  for (const auto& s : plain.slots) EXPECT_EQ(s.storage, GroupStorage::positions);
}

TEST(Strategy, NamesRoundTrip) {
  for (auto s : all_strategies()) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_EQ(parse_strategy("agg-sparse"), Strategy::aggregated_sparse);
  EXPECT_THROW(parse_strategy("fast"), UsageError);
  EXPECT_EQ(parse_model_kind("linked"), ModelKind::linked);
  EXPECT_THROW(parse_model_kind("plsa"), UsageError);
}

TEST(Checkpoint, RoundTripsEveryStrategy) {
  std::mt19937_64 gen(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(gen);
    const auto kind = trial % 2 ? ModelKind::linked : ModelKind::lda;
    SamplerConfig config;
    config.model = kind;
    config.strategy = all_strategies()[trial % 5];
    config.sparsity_ell = is_sparse(config.strategy) ? 2.5 : 1.0;
    config.seed = 1000 + trial;
    ModelContext ctx(c, Hyperparams::symmetric(1 + trial % 4, c.vocab_size(), 0.3, 0.2, 7.0), kind);
    config.iterations = 3;
    const auto run = run_chain(ctx, config);
    const auto ckpt = make_checkpoint(ctx, config, run.state);
    std::stringstream text;
    write_checkpoint(text, ckpt);
    const auto back = read_checkpoint(text);
    EXPECT_EQ(back.assignments, ckpt.assignments);
    EXPECT_EQ(back.hyper, ckpt.hyper);
    EXPECT_EQ(back.rng_state, ckpt.rng_state);
    EXPECT_EQ(back.iteration, 3u);
    EXPECT_EQ(back.strategy, config.strategy);
    EXPECT_EQ(back.sparsity_ell, config.sparsity_ell);
    EXPECT_EQ(back.seed, config.seed);
    std::stringstream again;
    write_checkpoint(again, back);
    EXPECT_EQ(again.str(), text.str());
  }
}

TEST(Checkpoint, HeaderLine) {
  const auto c = tiny_corpus({"ab", "b"}, 2);
  ModelContext ctx(c, Hyperparams::symmetric(2, 2, 0.5, 0.5), ModelKind::lda);
  SamplerConfig config;
  config.seed = 42;
  const auto state = init_assignments(ctx, Strategy::plain, 42);
  std::stringstream text;
  write_checkpoint(text, make_checkpoint(ctx, config, state));
  std::string header;
  std::getline(text, header);
  EXPECT_EQ(header, "ldackpt 1 lda plain 2 2 2 0 42");
}

TEST(Checkpoint, MalformedInputReportsLine) {
  std::stringstream text("ldackpt 1 lda plain 2 2 2 0 42\nalpha 0.5 0.5\nbeta 0.5 oops\n");
  try {
    read_checkpoint(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Checkpoint, ResumeIsBitIdenticalForIntegerStrategies) {
  std::mt19937_64 gen(25);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(gen);
    const auto kind = trial % 2 ? ModelKind::linked : ModelKind::lda;
    SamplerConfig config;
    config.model = kind;
    config.strategy = std::array{Strategy::plain, Strategy::aggregated, Strategy::aggregated_sparse}[trial % 3];
    config.sparsity_ell = 2.0;
    config.seed = trial;
    config.iterations = 6;
    ModelContext ctx(c, Hyperparams::symmetric(3, c.vocab_size(), 0.3, 0.2), kind);
    const auto straight = run_chain(ctx, config);

    config.iterations = 3;
    const auto half = run_chain(ctx, config);
    std::stringstream text;
    write_checkpoint(text, make_checkpoint(ctx, config, half.state));
    const auto ckpt = read_checkpoint(text);
    auto resumed = resume_chain(ctx, ckpt);
    IterationLog log;
    advance_chain(ctx, config_from_checkpoint(ckpt, 3), resumed, 3, all_documents(c), log);
    EXPECT_EQ(resumed.assignments, straight.state.assignments);
    EXPECT_EQ(resumed.counts, straight.state.counts);
    EXPECT_EQ(resumed.rng, straight.state.rng);
    EXPECT_EQ(resumed.iteration, 6u);
  }
}

TEST(Checkpoint, ResumeRejectsAForeignCorpus) {
  const auto c = tiny_corpus({"ab", "b"}, 2);
  const auto other = tiny_corpus({"ab", "bb"}, 2);
  ModelContext ctx(c, Hyperparams::symmetric(2, 2, 0.5, 0.5), ModelKind::lda);
  ModelContext other_ctx(other, Hyperparams::symmetric(2, 2, 0.5, 0.5), ModelKind::lda);
  SamplerConfig config;
  const auto ckpt = make_checkpoint(ctx, config, init_assignments(ctx, Strategy::plain, 1));
  EXPECT_THROW(resume_chain(other_ctx, ckpt), ValidationError);
}

TEST(Rng, StreamMatchesStandardMersenneTwister) {
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 0x9e3779b97f4a7c15ull}) {
    Rng rng(seed);
    std::mt19937_64 reference(seed);
    for (int i = 0; i < 2000; ++i) ASSERT_EQ(rng.engine()(), reference()) << "seed " << seed << " draw " << i;
  }
}
