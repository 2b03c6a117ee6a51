#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linklda {

using DocId = std::uint32_t;
using TermId = std::uint32_t;

/// Ordered list of terms with its inverse index. Ids are dense from 0.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::string& term(TermId id) const { return terms_.at(id); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<TermId> find(const std::string& term) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
};

/// All occurrences of one term inside one document.
struct TermGroup {
  TermId term = 0;
  std::uint32_t count = 0;

  friend bool operator==(const TermGroup&, const TermGroup&) = default;
};

/// Bag of words with occurrences of the same term grouped together.
/// Groups are sorted by term id and term ids are distinct.
class Document {
 public:
  Document() = default;
  /// Accepts repeated terms (merged) in any order; zero counts are rejected.
  explicit Document(std::vector<TermGroup> occurrences);

  std::span<const TermGroup> groups() const { return groups_; }
  std::size_t group_count() const { return groups_.size(); }
  std::uint64_t length() const { return length_; }
  bool empty() const { return length_ == 0; }

  friend bool operator==(const Document&, const Document&) = default;

 private:
  std::vector<TermGroup> groups_;
  std::uint64_t length_ = 0;
};

struct Link {
  DocId target = 0;
  double weight = 0.0;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Weighted directed graph over documents. Self-loops are never stored and
/// parallel links are merged by summing their weights. Outlinks are kept
/// sorted by target id.
class LinkGraph {
 public:
  LinkGraph() = default;
  explicit LinkGraph(std::size_t nodes) : outlinks_(nodes) {}

  std::size_t node_count() const { return outlinks_.size(); }
  std::size_t link_count() const;
  std::span<const Link> outlinks(DocId d) const { return outlinks_.at(d); }

  /// Adds weight to src -> dst. Self-loops are ignored.
  void add(DocId src, DocId dst, double weight);
  /// Replaces the outlinks of `src`; input is merged and sorted.
  void set_outlinks(DocId src, std::vector<Link> links);

  friend bool operator==(const LinkGraph&, const LinkGraph&) = default;

 private:
  std::vector<std::vector<Link>> outlinks_;
};

/// Immutable, validated document collection.
///
/// Besides the per-document group lists, a corpus exposes a global group
/// numbering (documents in order, groups in term order) that sampler state
/// uses for flat storage.
class Corpus {
 public:
  Corpus() = default;
  /// Validates term ids, link targets and label count. Documents may be
  /// empty here; use drop_empty_documents() to apply the ingestion rule.
  Corpus(Vocabulary vocabulary, std::vector<Document> documents, LinkGraph links,
         std::vector<std::optional<std::string>> labels = {});

  const Vocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<Document>& documents() const { return documents_; }
  const Document& document(DocId d) const { return documents_.at(d); }
  const LinkGraph& links() const { return links_; }
  const std::optional<std::string>& label(DocId d) const { return labels_.at(d); }
  const std::vector<std::optional<std::string>>& labels() const { return labels_; }

  std::size_t doc_count() const { return documents_.size(); }
  std::size_t vocab_size() const { return vocabulary_.size(); }
  std::uint64_t token_count() const { return token_count_; }
  std::size_t group_count() const { return group_begin_.empty() ? 0 : group_begin_.back(); }
  /// Global index of the first group of document `d`; `d == doc_count()` is allowed.
  std::size_t group_begin(DocId d) const { return group_begin_[d]; }
  /// Corpus-wide frequency of every term.
  std::vector<std::uint64_t> term_frequencies() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.vocabulary_ == b.vocabulary_ && a.documents_ == b.documents_ && a.links_ == b.links_ &&
           a.labels_ == b.labels_;
  }

 private:
  Vocabulary vocabulary_;
  std::vector<Document> documents_;
  LinkGraph links_;
  std::vector<std::optional<std::string>> labels_;
  std::vector<std::size_t> group_begin_;
  std::uint64_t token_count_ = 0;
};

struct CorpusPaths {
  std::filesystem::path docs;
  std::filesystem::path vocab;
  std::optional<std::filesystem::path> links;
  std::optional<std::filesystem::path> labels;
};

/// Reads the four text formats. Document count is one past the largest doc
/// id mentioned in any file; documents without tokens are dropped and the
/// remaining ids re-densified.
Corpus load_corpus(const CorpusPaths& paths);
void write_corpus(const Corpus& corpus, const CorpusPaths& paths);

/// Keeps only `keep` documents (in the given order), remapping links and
/// labels. Links to documents that are not kept disappear.
Corpus select_documents(const Corpus& corpus, std::span<const DocId> keep);
Corpus drop_empty_documents(const Corpus& corpus);

/// Keeps the `keep_top` most frequent terms (ties: lower id). Kept terms
/// retain their relative order; emptied documents are dropped.
Corpus prune_vocabulary(const Corpus& corpus, std::size_t keep_top);
/// Keeps each document's `keep_top` heaviest outlinks (ties: lower target).
Corpus prune_outlinks(const Corpus& corpus, std::size_t keep_top);

/// One cross-validation fold.
///
/// `combined` holds the training documents first, then the test documents,
/// and is the corpus unseen inference runs on. Training documents keep only
/// links to training documents, so the first `train.doc_count()` documents
/// of `combined` are identical to `train`. Test documents keep all their
/// outlinks.
struct TrainTestSplit {
  Corpus train;
  Corpus test;
  Corpus combined;
  std::vector<DocId> train_origin;  // original id of each training document
  std::vector<DocId> test_origin;
};

/// Labeled documents are shuffled by `seed` and dealt round-robin into
/// `fold_count` folds; fold `fold_index` is the test set. Unlabeled
/// documents always stay in training.
TrainTestSplit split_train_test(const Corpus& corpus, std::size_t fold_count, std::size_t fold_index,
                                std::uint64_t seed);

/// Fold index of every labeled document, in the order used by
/// split_train_test. Unlabeled documents map to nullopt.
std::vector<std::optional<std::size_t>> assign_folds(const std::vector<std::optional<std::string>>& labels,
                                                     std::size_t fold_count, std::uint64_t seed);

}  // namespace linklda
