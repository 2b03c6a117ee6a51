#include "linklda/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "linklda/error.hpp"
#include "text_io.hpp"

namespace linklda {

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::restore(const std::string& text) {
  // The engine's reader swallows trailing whitespace and flags EOF as a
  // failure, so the word count is checked here instead.
  std::istringstream words(text);
  std::size_t n = 0;
  for (std::uint64_t w; words >> w;) ++n;
  if (!words.eof() || n != boost::random::mt19937_64::state_size) throw ValidationError("invalid generator state");
  std::istringstream in(text + ' ');
  in >> engine_;
  if (in.bad()) throw ValidationError("invalid generator state");
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::lda ? "lda" : "linked"; }

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::plain: return "plain";
    case Strategy::aggregated: return "aggregated";
    case Strategy::limit: return "limit";
    case Strategy::sparse: return "sparse";
    case Strategy::aggregated_sparse: return "aggregated_sparse";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "lda") return ModelKind::lda;
  if (text == "linked") return ModelKind::linked;
  throw UsageError("unknown model kind '" + std::string(text) + "'");
}

Strategy parse_strategy(std::string_view text) {
  if (text == "plain") return Strategy::plain;
  if (text == "aggregated") return Strategy::aggregated;
  if (text == "limit") return Strategy::limit;
  if (text == "sparse") return Strategy::sparse;
  if (text == "aggregated_sparse" || text == "agg-sparse") return Strategy::aggregated_sparse;
  throw UsageError("unknown strategy '" + std::string(text) + "'");
}

Hyperparams::Hyperparams(std::vector<double> alpha, std::vector<double> beta, double gamma_scale_p)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), gamma_scale_p_(gamma_scale_p) {
  if (alpha_.empty()) throw ValidationError("topic count must be positive");
  if (beta_.empty()) throw ValidationError("vocabulary must not be empty");
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!std::all_of(alpha_.begin(), alpha_.end(), positive)) throw ValidationError("alpha entries must be positive");
  if (!std::all_of(beta_.begin(), beta_.end(), positive)) throw ValidationError("beta entries must be positive");
  if (!positive(gamma_scale_p_)) throw ValidationError("gamma scale p must be positive");
  alpha_sum_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
  beta_sum_ = std::accumulate(beta_.begin(), beta_.end(), 0.0);
}

Hyperparams Hyperparams::defaults(std::size_t topics, std::size_t vocab_size) {
  if (topics == 0 || vocab_size == 0) throw ValidationError("topic count and vocabulary size must be positive");
  return symmetric(topics, vocab_size, 50.0 / static_cast<double>(topics), 200.0 / static_cast<double>(vocab_size));
}

Hyperparams Hyperparams::symmetric(std::size_t topics, std::size_t vocab_size, double alpha, double beta,
                                   double gamma_scale_p) {
  return Hyperparams(std::vector<double>(topics, alpha), std::vector<double>(vocab_size, beta), gamma_scale_p);
}

std::vector<double> compute_gamma(const Corpus& corpus, DocId doc, double p) {
  const auto length = corpus.document(doc).length();
  if (length == 0) throw ValidationError("gamma is undefined for empty document " + std::to_string(doc));
  if (!(p > 0.0)) throw ValidationError("gamma scale p must be positive");
  const auto out = corpus.links().outlinks(doc);
  std::vector<double> gamma;
  gamma.reserve(out.size() + 1);
  double link_total = 0.0;
  for (const auto& l : out) link_total += l.weight;
  gamma.push_back(1.0 + link_total);
  for (const auto& l : out) gamma.push_back(l.weight);
  const double scale = static_cast<double>(length) / p / (1.0 + 2.0 * link_total);
  for (auto& g : gamma) g *= scale;
  return gamma;
}

template <typename GammaFn>
InfluenceSet InfluenceSet::build(const Corpus& corpus, GammaFn gamma_of) {
  InfluenceSet set;
  set.offset_.reserve(corpus.doc_count() + 1);
  set.offset_.push_back(0);
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    std::vector<double> gamma = gamma_of(d);
    set.members_.push_back(d);
    for (const auto& l : corpus.links().outlinks(d)) set.members_.push_back(l.target);
    set.gamma_.insert(set.gamma_.end(), gamma.begin(), gamma.end());
    set.gamma_sum_.push_back(std::accumulate(gamma.begin(), gamma.end(), 0.0));
    set.offset_.push_back(set.members_.size());
  }
  return set;
}

InfluenceSet InfluenceSet::self_only(const Corpus& corpus) {
  InfluenceSet set;
  set.offset_.resize(corpus.doc_count() + 1);
  std::iota(set.offset_.begin(), set.offset_.end(), std::size_t{0});
  set.members_.resize(corpus.doc_count());
  std::iota(set.members_.begin(), set.members_.end(), DocId{0});
  set.gamma_.assign(corpus.doc_count(), 1.0);
  set.gamma_sum_.assign(corpus.doc_count(), 1.0);
  return set;
}

InfluenceSet InfluenceSet::from_links(const Corpus& corpus, double p) {
  return build(corpus, [&](DocId d) { return compute_gamma(corpus, d, p); });
}

InfluenceSet InfluenceSet::constant_gamma(const Corpus& corpus, double value) {
  if (!(value > 0.0)) throw ValidationError("gamma must be positive");
  return build(corpus, [&](DocId d) { return std::vector<double>(corpus.links().outlinks(d).size() + 1, value); });
}

CountState CountState::zeros(std::size_t docs, std::size_t topics, std::size_t vocab, std::size_t influence_size) {
  CountState c;
  c.topics = topics;
  c.vocab = vocab;
  c.doc_topic.assign(docs * topics, 0.0);
  c.doc_total.assign(docs, 0.0);
  c.word_topic.assign(vocab * topics, 0.0);
  c.topic_total.assign(topics, 0.0);
  c.influence.assign(influence_size, 0.0);
  return c;
}

double max_abs_difference(const CountState& a, const CountState& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.topics != b.topics || a.vocab != b.vocab) return kInf;
  double worst = 0.0;
  auto cmp = [&](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
      worst = kInf;
      return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  };
  cmp(a.doc_topic, b.doc_topic);
  cmp(a.doc_total, b.doc_total);
  cmp(a.word_topic, b.word_topic);
  cmp(a.topic_total, b.topic_total);
  cmp(a.influence, b.influence);
  return worst;
}

ModelContext::ModelContext(const Corpus& corpus, Hyperparams hyper, ModelKind kind)
    : ModelContext(corpus, hyper, kind,
                   kind == ModelKind::lda ? InfluenceSet::self_only(corpus)
                                          : InfluenceSet::from_links(corpus, hyper.gamma_scale_p())) {}

ModelContext::ModelContext(const Corpus& corpus, Hyperparams hyper, ModelKind kind, InfluenceSet influence)
    : corpus_(&corpus), hyper_(std::move(hyper)), kind_(kind), influence_(std::move(influence)) {
  if (hyper_.vocab_size() != corpus.vocab_size()) {
    throw ValidationError("beta has " + std::to_string(hyper_.vocab_size()) + " entries for a vocabulary of " +
                          std::to_string(corpus.vocab_size()));
  }
  if (influence_.doc_count() != corpus.doc_count()) {
    throw ValidationError("influence sets do not match the corpus");
  }
}

AssignmentState make_layout(const ModelContext& ctx, Strategy strategy) {
  const Corpus& corpus = ctx.corpus();
  AssignmentState a;
  a.kind = ctx.kind();
  a.topics = ctx.topics();
  a.slots.resize(corpus.group_count());
  std::size_t position_offset = 0;
  std::size_t mass_offset = 0;
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    const std::size_t outcomes = ctx.outcomes(d);
    std::size_t g = corpus.group_begin(d);
    for (const auto& group : corpus.document(d).groups()) {
      auto& slot = a.slots[g++];
      if (is_fractional(strategy)) {
        slot = {GroupStorage::distribution, mass_offset};
        mass_offset += outcomes;
      } else if (strategy != Strategy::plain && group.count >= kAggregatedCountThreshold) {
        slot = {GroupStorage::counts, mass_offset};
        mass_offset += outcomes;
      } else {
        slot = {GroupStorage::positions, position_offset};
        position_offset += group.count;
      }
    }
  }
  a.positions.assign(position_offset, 0);
  a.mass.assign(mass_offset, 0.0);
  return a;
}

void randomize_documents(const ModelContext& ctx, AssignmentState& a, Rng& rng, DocId begin, DocId end) {
  const Corpus& corpus = ctx.corpus();
  for (DocId d = begin; d < end; ++d) {
    const std::size_t outcomes = ctx.outcomes(d);
    std::size_t g = corpus.group_begin(d);
    for (const auto& group : corpus.document(d).groups()) {
      switch (a.slots[g].storage) {
        case GroupStorage::positions:
          for (auto& o : a.positions_of(g, group.count)) o = static_cast<std::uint32_t>(rng.below(outcomes));
          break;
        case GroupStorage::counts: {
          auto counts = a.mass_of(g, outcomes);
          std::fill(counts.begin(), counts.end(), 0.0);
          for (std::uint32_t i = 0; i < group.count; ++i) counts[rng.below(outcomes)] += 1.0;
          break;
        }
        case GroupStorage::distribution: {
          auto dist = a.mass_of(g, outcomes);
          std::fill(dist.begin(), dist.end(), 0.0);
          dist[rng.below(outcomes)] = 1.0;
          break;
        }
      }
      ++g;
    }
  }
}

ChainState init_assignments(const ModelContext& ctx, Strategy strategy, std::uint64_t seed) {
  ChainState state;
  state.rng = Rng(seed);
  state.assignments = make_layout(ctx, strategy);
  randomize_documents(ctx, state.assignments, state.rng, 0, static_cast<DocId>(ctx.corpus().doc_count()));
  state.counts = counts_from_assignments(ctx, state.assignments);
  return state;
}

namespace {

void check_layout(const ModelContext& ctx, const AssignmentState& a) {
  const Corpus& corpus = ctx.corpus();
  if (a.topics != ctx.topics() || a.kind != ctx.kind()) {
    throw ConsistencyError("assignments were made for a different model");
  }
  if (a.slots.size() != corpus.group_count()) {
    throw ConsistencyError("assignments cover " + std::to_string(a.slots.size()) + " groups, corpus has " +
                           std::to_string(corpus.group_count()));
  }
  std::size_t position_offset = 0;
  std::size_t mass_offset = 0;
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    std::size_t g = corpus.group_begin(d);
    for (const auto& group : corpus.document(d).groups()) {
      const auto& slot = a.slots[g++];
      std::size_t& expected = slot.storage == GroupStorage::positions ? position_offset : mass_offset;
      if (slot.offset != expected) throw ConsistencyError("assignment layout does not match document " + std::to_string(d));
      expected += slot.storage == GroupStorage::positions ? group.count : ctx.outcomes(d);
    }
  }
  if (position_offset != a.positions.size() || mass_offset != a.mass.size()) {
    throw ConsistencyError("assignment storage size does not match the corpus");
  }
}

}  // namespace

void accumulate_counts(const ModelContext& ctx, const AssignmentState& a, DocId begin, DocId end,
                       CountState& counts) {
  const Corpus& corpus = ctx.corpus();
  for (DocId d = begin; d < end; ++d) {
    const std::size_t outcomes = ctx.outcomes(d);
    std::size_t g = corpus.group_begin(d);
    for (const auto& group : corpus.document(d).groups()) {
      switch (a.slots[g].storage) {
        case GroupStorage::positions:
          for (auto o : a.positions_of(g, group.count)) {
            if (o >= outcomes) {
              throw ConsistencyError("document " + std::to_string(d) + " has outcome " + std::to_string(o) +
                                     " outside its " + std::to_string(outcomes) + " outcomes");
            }
            add_outcome(ctx, counts, d, group.term, o, 1.0);
          }
          break;
        case GroupStorage::counts:
        case GroupStorage::distribution: {
          const double scale = a.slots[g].storage == GroupStorage::counts ? 1.0 : static_cast<double>(group.count);
          auto m = a.mass_of(g, outcomes);
          for (std::size_t o = 0; o < outcomes; ++o) {
            if (m[o] < 0.0) throw ConsistencyError("negative assignment mass in document " + std::to_string(d));
            if (m[o] != 0.0) add_outcome(ctx, counts, d, group.term, o, scale * m[o]);
          }
          break;
        }
      }
      ++g;
    }
  }
}

CountState counts_from_assignments(const ModelContext& ctx, const AssignmentState& a) {
  check_layout(ctx, a);
  const Corpus& corpus = ctx.corpus();
  auto counts = CountState::zeros(corpus.doc_count(), ctx.topics(), corpus.vocab_size(),
                                  ctx.kind() == ModelKind::linked ? ctx.influence().total_size() : 0);
  accumulate_counts(ctx, a, 0, static_cast<DocId>(corpus.doc_count()), counts);
  return counts;
}

namespace {

template <typename T>
void write_list(std::ostream& out, const char* tag, std::span<const T> values) {
  out << tag;
  for (const auto& v : values) {
    if constexpr (std::is_floating_point_v<T>) {
      out << ' ' << detail::format_double(v);
    } else {
      out << ' ' << v;
    }
  }
  out << '\n';
}

class LineSource {
 public:
  LineSource(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  detail::FieldReader next(const char* expected_tag) {
    if (!std::getline(in_, line_)) throw ParseError(source_, lineno_ + 1, std::string("missing ") + expected_tag);
    ++lineno_;
    detail::FieldReader fields(line_, source_, lineno_);
    auto tag = fields.next("tag");
    if (tag != expected_tag) fields.fail("expected '" + std::string(expected_tag) + "', found '" + std::string(tag) + "'");
    return fields;
  }

  std::string next_line() {
    if (!std::getline(in_, line_)) throw ParseError(source_, lineno_ + 1, "unexpected end of checkpoint");
    ++lineno_;
    return line_;
  }

  std::size_t lineno() const { return lineno_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t lineno_ = 0;
};

std::vector<double> read_doubles(detail::FieldReader& fields) {
  std::vector<double> v;
  while (!fields.done()) v.push_back(fields.next_double("value"));
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& a = ckpt.assignments;
  out << "ldackpt 1 " << to_string(ckpt.kind) << ' ' << to_string(ckpt.strategy) << ' ' << ckpt.hyper.topics()
      << ' ' << ckpt.hyper.vocab_size() << ' ' << ckpt.doc_count << ' ' << ckpt.iteration << ' ' << ckpt.seed
      << '\n';
  write_list(out, "alpha", ckpt.hyper.alpha());
  write_list(out, "beta", ckpt.hyper.beta());
  out << "gamma_p " << detail::format_double(ckpt.hyper.gamma_scale_p()) << '\n';
  out << "sampler " << detail::format_double(ckpt.sparsity_ell) << ' ' << ckpt.recount_every << '\n';
  out << "rng " << ckpt.rng_state << '\n';
  out << "groups " << a.slots.size() << '\n';

  // Group extents follow from consecutive offsets within each storage array.
  std::vector<std::size_t> next_offset(a.slots.size());
  {
    std::size_t pos_end = a.positions.size();
    std::size_t mass_end = a.mass.size();
    for (std::size_t g = a.slots.size(); g-- > 0;) {
      if (a.slots[g].storage == GroupStorage::positions) {
        next_offset[g] = pos_end;
        pos_end = a.slots[g].offset;
      } else {
        next_offset[g] = mass_end;
        mass_end = a.slots[g].offset;
      }
    }
  }
  for (std::size_t g = 0; g < a.slots.size(); ++g) {
    const auto& slot = a.slots[g];
    const std::size_t n = next_offset[g] - slot.offset;
    switch (slot.storage) {
      case GroupStorage::positions:
        write_list(out, "P", std::span<const std::uint32_t>(a.positions.data() + slot.offset, n));
        break;
      case GroupStorage::counts:
        write_list(out, "C", std::span<const double>(a.mass.data() + slot.offset, n));
        break;
      case GroupStorage::distribution:
        write_list(out, "F", std::span<const double>(a.mass.data() + slot.offset, n));
        break;
    }
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  LineSource lines(in, source);
  Checkpoint ckpt;
  std::size_t topics = 0;
  std::size_t vocab = 0;
  {
    auto f = lines.next("ldackpt");
    if (f.next_uint32("version") != 1) f.fail("unsupported checkpoint version");
    try {
      ckpt.kind = parse_model_kind(f.next("model kind"));
      ckpt.strategy = parse_strategy(f.next("strategy"));
    } catch (const UsageError& e) {
      f.fail(e.what());
    }
    topics = f.next_uint64("topic count");
    vocab = f.next_uint64("vocabulary size");
    ckpt.doc_count = f.next_uint64("document count");
    ckpt.iteration = f.next_uint64("iteration");
    ckpt.seed = f.next_uint64("seed");
    f.expect_end();
  }
  auto alpha_fields = lines.next("alpha");
  auto alpha = read_doubles(alpha_fields);
  auto beta_fields = lines.next("beta");
  auto beta = read_doubles(beta_fields);
  if (alpha.size() != topics || beta.size() != vocab) alpha_fields.fail("hyperparameter lengths do not match header");
  double p = 0.0;
  {
    auto f = lines.next("gamma_p");
    p = f.next_double("gamma scale");
    f.expect_end();
  }
  ckpt.hyper = Hyperparams(std::move(alpha), std::move(beta), p);
  {
    auto f = lines.next("sampler");
    ckpt.sparsity_ell = f.next_double("sparsity");
    ckpt.recount_every = f.next_uint64("recount interval");
    f.expect_end();
  }
  {
    auto f = lines.next("rng");
    ckpt.rng_state = std::string(f.rest());
  }
  std::size_t group_count = 0;
  {
    auto f = lines.next("groups");
    group_count = f.next_uint64("group count");
    f.expect_end();
  }

  auto& a = ckpt.assignments;
  a.kind = ckpt.kind;
  a.topics = topics;
  a.slots.resize(group_count);
  for (std::size_t g = 0; g < group_count; ++g) {
    const std::string line = lines.next_line();
    detail::FieldReader f(line, lines.source(), lines.lineno());
    const auto tag = f.next("storage tag");
    if (tag == "P") {
      a.slots[g] = {GroupStorage::positions, a.positions.size()};
      while (!f.done()) a.positions.push_back(f.next_uint32("outcome"));
    } else if (tag == "C" || tag == "F") {
      a.slots[g] = {tag == "C" ? GroupStorage::counts : GroupStorage::distribution, a.mass.size()};
      while (!f.done()) a.mass.push_back(f.next_double("mass"));
    } else {
      f.fail("unknown storage tag '" + std::string(tag) + "'");
    }
  }
  lines.next("end").expect_end();
  return ckpt;
}

}  // namespace linklda
