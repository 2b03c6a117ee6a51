#include "linklda/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "linklda/error.hpp"
#include "linklda/rng.hpp"
#include "text_io.hpp"

namespace linklda {

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<TermId>(i)).second) {
      throw ValidationError("duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

std::optional<TermId> Vocabulary::find(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Document::Document(std::vector<TermGroup> occurrences) {
  std::sort(occurrences.begin(), occurrences.end(),
            [](const TermGroup& a, const TermGroup& b) { return a.term < b.term; });
  for (const auto& g : occurrences) {
    if (g.count == 0) throw ValidationError("term frequency must be positive");
    if (!groups_.empty() && groups_.back().term == g.term) {
      groups_.back().count += g.count;
    } else {
      groups_.push_back(g);
    }
    length_ += g.count;
  }
}

std::size_t LinkGraph::link_count() const {
  std::size_t n = 0;
  for (const auto& out : outlinks_) n += out.size();
  return n;
}

void LinkGraph::add(DocId src, DocId dst, double weight) {
  if (src >= outlinks_.size() || dst >= outlinks_.size()) {
    throw ValidationError("link " + std::to_string(src) + " -> " + std::to_string(dst) + " references unknown document");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ValidationError("link weight must be a positive finite number");
  }
  if (src == dst) return;
  auto& out = outlinks_[src];
  auto it = std::lower_bound(out.begin(), out.end(), dst, [](const Link& l, DocId t) { return l.target < t; });
  if (it != out.end() && it->target == dst) {
    it->weight += weight;
  } else {
    out.insert(it, Link{dst, weight});
  }
}

void LinkGraph::set_outlinks(DocId src, std::vector<Link> links) {
  outlinks_.at(src).clear();
  for (const auto& l : links) add(src, l.target, l.weight);
}

Corpus::Corpus(Vocabulary vocabulary, std::vector<Document> documents, LinkGraph links,
               std::vector<std::optional<std::string>> labels)
    : vocabulary_(std::move(vocabulary)),
      documents_(std::move(documents)),
      links_(std::move(links)),
      labels_(std::move(labels)) {
  if (links_.node_count() == 0 && !documents_.empty()) links_ = LinkGraph(documents_.size());
  if (links_.node_count() != documents_.size()) {
    throw ValidationError("link graph has " + std::to_string(links_.node_count()) + " nodes for " +
                          std::to_string(documents_.size()) + " documents");
  }
  if (labels_.empty()) labels_.resize(documents_.size());
  if (labels_.size() != documents_.size()) throw ValidationError("label count does not match document count");

  group_begin_.reserve(documents_.size() + 1);
  group_begin_.push_back(0);
  for (std::size_t d = 0; d < documents_.size(); ++d) {
    for (const auto& g : documents_[d].groups()) {
      if (g.term >= vocabulary_.size()) {
        throw ValidationError("document " + std::to_string(d) + " references term " + std::to_string(g.term) +
                              " outside vocabulary of size " + std::to_string(vocabulary_.size()));
      }
    }
    token_count_ += documents_[d].length();
    group_begin_.push_back(group_begin_.back() + documents_[d].group_count());
  }
}

std::vector<std::uint64_t> Corpus::term_frequencies() const {
  std::vector<std::uint64_t> freq(vocab_size(), 0);
  for (const auto& doc : documents_) {
    for (const auto& g : doc.groups()) freq[g.term] += g.count;
  }
  return freq;
}

namespace {

struct RawTriple {
  DocId doc;
  TermId term;
  std::uint32_t count;
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace

Corpus load_corpus(const CorpusPaths& paths) {
  std::vector<std::string> terms;
  {
    auto in = open_input(paths.vocab);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto term = detail::trim(line);
      if (term.empty()) throw ParseError(paths.vocab.string(), lineno, "empty vocabulary term");
      terms.emplace_back(term);
    }
  }
  Vocabulary vocabulary(std::move(terms));

  std::vector<RawTriple> triples;
  std::size_t doc_count = 0;
  {
    auto in = open_input(paths.docs);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      detail::FieldReader fields(line, paths.docs.string(), lineno);
      if (fields.done()) continue;
      RawTriple t{fields.next_uint32("doc id"), fields.next_uint32("term id"), fields.next_uint32("count")};
      fields.expect_end();
      if (t.count == 0) throw ParseError(paths.docs.string(), lineno, "count must be positive");
      if (t.term >= vocabulary.size()) {
        throw ValidationError(paths.docs.string() + ":" + std::to_string(lineno) + ": term id " +
                              std::to_string(t.term) + " outside vocabulary of size " +
                              std::to_string(vocabulary.size()));
      }
      doc_count = std::max<std::size_t>(doc_count, std::size_t{t.doc} + 1);
      triples.push_back(t);
    }
  }

  std::vector<std::vector<TermGroup>> occurrences(doc_count);
  for (const auto& t : triples) occurrences[t.doc].push_back(TermGroup{t.term, t.count});
  std::vector<Document> documents;
  documents.reserve(doc_count);
  for (auto& occ : occurrences) documents.emplace_back(std::move(occ));

  LinkGraph links(doc_count);
  if (paths.links) {
    auto in = open_input(*paths.links);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      detail::FieldReader fields(line, paths.links->string(), lineno);
      if (fields.done()) continue;
      DocId src = fields.next_uint32("source doc id");
      DocId dst = fields.next_uint32("target doc id");
      double w = fields.next_double("weight");
      fields.expect_end();
      if (src >= doc_count || dst >= doc_count) {
        throw ValidationError(paths.links->string() + ":" + std::to_string(lineno) + ": link to unknown document");
      }
      if (!(w > 0.0)) throw ParseError(paths.links->string(), lineno, "weight must be positive");
      links.add(src, dst, w);
    }
  }

  std::vector<std::optional<std::string>> labels(doc_count);
  if (paths.labels) {
    auto in = open_input(*paths.labels);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      detail::FieldReader fields(line, paths.labels->string(), lineno);
      if (fields.done()) continue;
      DocId d = fields.next_uint32("doc id");
      std::string category(detail::trim(fields.rest()));
      if (category.empty()) throw ParseError(paths.labels->string(), lineno, "missing category");
      if (d >= doc_count) {
        throw ValidationError(paths.labels->string() + ":" + std::to_string(lineno) + ": label for unknown document");
      }
      if (labels[d]) {
        throw ValidationError(paths.labels->string() + ":" + std::to_string(lineno) + ": document " +
                              std::to_string(d) + " labeled twice");
      }
      labels[d] = std::move(category);
    }
  }

  return drop_empty_documents(Corpus(std::move(vocabulary), std::move(documents), std::move(links), std::move(labels)));
}

void write_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  {
    auto out = open_output(paths.vocab);
    for (const auto& t : corpus.vocabulary().terms()) out << t << '\n';
  }
  {
    auto out = open_output(paths.docs);
    for (DocId d = 0; d < corpus.doc_count(); ++d) {
      for (const auto& g : corpus.document(d).groups()) out << d << ' ' << g.term << ' ' << g.count << '\n';
    }
  }
  if (paths.links) {
    auto out = open_output(*paths.links);
    for (DocId d = 0; d < corpus.doc_count(); ++d) {
      for (const auto& l : corpus.links().outlinks(d)) {
        out << d << ' ' << l.target << ' ' << detail::format_double(l.weight) << '\n';
      }
    }
  }
  if (paths.labels) {
    auto out = open_output(*paths.labels);
    for (DocId d = 0; d < corpus.doc_count(); ++d) {
      if (corpus.label(d)) out << d << ' ' << *corpus.label(d) << '\n';
    }
  }
}

Corpus select_documents(const Corpus& corpus, std::span<const DocId> keep) {
  constexpr DocId kDropped = ~DocId{0};
  std::vector<DocId> remap(corpus.doc_count(), kDropped);
  for (std::size_t i = 0; i < keep.size(); ++i) remap.at(keep[i]) = static_cast<DocId>(i);

  std::vector<Document> documents;
  std::vector<std::optional<std::string>> labels;
  LinkGraph links(keep.size());
  documents.reserve(keep.size());
  labels.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    documents.push_back(corpus.document(keep[i]));
    labels.push_back(corpus.label(keep[i]));
    for (const auto& l : corpus.links().outlinks(keep[i])) {
      if (remap[l.target] != kDropped) links.add(static_cast<DocId>(i), remap[l.target], l.weight);
    }
  }
  return Corpus(corpus.vocabulary(), std::move(documents), std::move(links), std::move(labels));
}

Corpus drop_empty_documents(const Corpus& corpus) {
  std::vector<DocId> keep;
  keep.reserve(corpus.doc_count());
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    if (!corpus.document(d).empty()) keep.push_back(d);
  }
  if (keep.size() == corpus.doc_count()) return corpus;
  return select_documents(corpus, keep);
}

Corpus prune_vocabulary(const Corpus& corpus, std::size_t keep_top) {
  if (keep_top == 0) throw UsageError("vocabulary size to keep must be positive");
  if (keep_top >= corpus.vocab_size()) return corpus;

  const auto freq = corpus.term_frequencies();
  std::vector<TermId> order(corpus.vocab_size());
  std::iota(order.begin(), order.end(), TermId{0});
  std::stable_sort(order.begin(), order.end(), [&](TermId a, TermId b) { return freq[a] > freq[b]; });
  std::vector<bool> kept(corpus.vocab_size(), false);
  for (std::size_t i = 0; i < keep_top; ++i) kept[order[i]] = true;

  constexpr TermId kDropped = ~TermId{0};
  std::vector<TermId> remap(corpus.vocab_size(), kDropped);
  std::vector<std::string> terms;
  for (TermId t = 0; t < corpus.vocab_size(); ++t) {
    if (kept[t]) {
      remap[t] = static_cast<TermId>(terms.size());
      terms.push_back(corpus.vocabulary().term(t));
    }
  }

  std::vector<Document> documents;
  documents.reserve(corpus.doc_count());
  for (const auto& doc : corpus.documents()) {
    std::vector<TermGroup> groups;
    for (const auto& g : doc.groups()) {
      if (remap[g.term] != kDropped) groups.push_back(TermGroup{remap[g.term], g.count});
    }
    documents.emplace_back(std::move(groups));
  }
  return drop_empty_documents(
      Corpus(Vocabulary(std::move(terms)), std::move(documents), corpus.links(), corpus.labels()));
}

Corpus prune_outlinks(const Corpus& corpus, std::size_t keep_top) {
  if (keep_top == 0) throw UsageError("outlink cap must be positive");
  LinkGraph links(corpus.doc_count());
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    auto out = corpus.links().outlinks(d);
    std::vector<Link> ranked(out.begin(), out.end());
    std::sort(ranked.begin(), ranked.end(), [](const Link& a, const Link& b) {
      return a.weight != b.weight ? a.weight > b.weight : a.target < b.target;
    });
    if (ranked.size() > keep_top) ranked.resize(keep_top);
    links.set_outlinks(d, std::move(ranked));
  }
  return Corpus(corpus.vocabulary(), corpus.documents(), std::move(links), corpus.labels());
}

std::vector<std::optional<std::size_t>> assign_folds(const std::vector<std::optional<std::string>>& labels,
                                                     std::size_t fold_count, std::uint64_t seed) {
  if (fold_count == 0) throw UsageError("fold count must be positive");
  std::vector<DocId> labeled;
  for (DocId d = 0; d < labels.size(); ++d) {
    if (labels[d]) labeled.push_back(d);
  }
  Rng rng(seed);
  for (std::size_t i = labeled.size(); i > 1; --i) {
    std::swap(labeled[i - 1], labeled[rng.below(i)]);
  }
  std::vector<std::optional<std::size_t>> fold(labels.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) fold[labeled[i]] = i % fold_count;
  return fold;
}

TrainTestSplit split_train_test(const Corpus& corpus, std::size_t fold_count, std::size_t fold_index,
                                std::uint64_t seed) {
  if (fold_index >= fold_count) {
    throw UsageError("fold index " + std::to_string(fold_index) + " out of range for " +
                     std::to_string(fold_count) + " folds");
  }
  const auto fold = assign_folds(corpus.labels(), fold_count, seed);

  TrainTestSplit split;
  for (DocId d = 0; d < corpus.doc_count(); ++d) {
    if (fold[d] && *fold[d] == fold_index) {
      split.test_origin.push_back(d);
    } else {
      split.train_origin.push_back(d);
    }
  }
  split.train = select_documents(corpus, split.train_origin);
  split.test = select_documents(corpus, split.test_origin);

  std::vector<DocId> order = split.train_origin;
  order.insert(order.end(), split.test_origin.begin(), split.test_origin.end());
  std::vector<DocId> position(corpus.doc_count());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<DocId>(i);
  const std::size_t train_count = split.train_origin.size();

  std::vector<Document> documents;
  std::vector<std::optional<std::string>> labels;
  LinkGraph links(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    documents.push_back(corpus.document(order[i]));
    labels.push_back(corpus.label(order[i]));
    for (const auto& l : corpus.links().outlinks(order[i])) {
      const DocId target = position[l.target];
      if (i < train_count && target >= train_count) continue;
      links.add(static_cast<DocId>(i), target, l.weight);
    }
  }
  split.combined = Corpus(corpus.vocabulary(), std::move(documents), std::move(links), std::move(labels));
  return split;
}

}  // namespace linklda
