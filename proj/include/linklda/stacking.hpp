#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linklda/corpus.hpp"
#include "linklda/kernels.hpp"

namespace linklda {

struct TopicModel;

enum class EdgeProvenance { cocitation, chi, reversed_cocitation, reversed_chi };

std::string_view to_string(EdgeProvenance provenance);

/// Sparse nonnegative edge weights, rows sorted by target.
struct EdgeWeights {
  EdgeProvenance provenance = EdgeProvenance::cocitation;
  Adjacency adjacency;

  std::size_t node_count() const { return adjacency.size(); }
};

/// coc(u, v) = |{x : x -> u and x -> v}| for u != v. Symmetric; zero entries omitted.
EdgeWeights cocitation_weights(const LinkGraph& graph);

/// Every link reversed with its weight kept.
LinkGraph reverse_graph(const LinkGraph& graph);

/// weight(d, r) = chi_d(r) renormalized over d's outneighbors (self mass
/// dropped). Documents without outlinks get no edges.
EdgeWeights chi_edge_weights(const TopicModel& model, const LinkGraph& graph);

/// Transposes an edge set; provenance becomes the reversed variant.
EdgeWeights reverse_edges(const EdgeWeights& weights);

/// f(u) = sum_v W(u,v) p(v) / sum_v W(u,v), where p(v) is the training label
/// when `train_labels[v]` is set and the base prediction otherwise. Nodes
/// without weighted neighbors get 0.5.
std::vector<double> stack_features(std::span<const double> base_predictions, const EdgeWeights& weights,
                                   std::span<const std::optional<int>> train_labels);

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

/// Mann-Whitney AUC, ties counted one half. Throws ValidationError without
/// both classes.
double auc(std::span<const ScoredLabel> scored);

/// L2-regularized logistic regression fit by full-batch gradient descent.
class LogisticRegression {
 public:
  struct Options {
    std::size_t epochs = 500;
    double step = 1.0;
    double l2 = 1e-3;
  };

  LogisticRegression() = default;
  explicit LogisticRegression(Options options) : options_(options) {}

  /// `features` is row-major with `dims` columns; rows are selected by `rows`.
  void fit(std::span<const double> features, std::size_t dims, std::span<const std::size_t> rows,
           std::span<const int> labels);
  double predict(std::span<const double> row) const;
  std::span<const double> weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  Options options_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

struct StackingDataset {
  std::size_t dims = 0;
  std::vector<double> features;  // base features for every document, row-major
  std::vector<std::optional<std::string>> labels;
  EdgeWeights weights;
};

struct StackingOptions {
  std::size_t fold_count = 10;
  std::size_t layers = 1;  // 0, 1 or 2
  std::vector<std::uint64_t> seeds{1};
  std::string weighting = "none";  // echoed into results
  LogisticRegression::Options classifier;
};

struct FoldResult {
  std::string category;
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  double auc = 0.0;
};

struct StackingReport {
  std::vector<FoldResult> folds;
  std::vector<std::string> categories;
  std::vector<double> class_auc;        // mean over seeds and folds, aligned with categories
  std::vector<double> macro_per_seed;   // mean over classes of per-class fold means
  double macro_auc = 0.0;               // mean of macro_per_seed
  double macro_stddev = 0.0;            // across seeds
  std::vector<std::string> warnings;

  /// `class,fold,layers,weighting,auc`; fold is written as seed/fold. Two
  /// summary rows follow with class `macro` and fold `mean` / `stddev`.
  void write_csv(std::ostream& out, std::size_t layers, std::string_view weighting) const;
};

/// One-vs-rest cross-validated evaluation. Layer 0 trains on the base
/// features; each further layer appends the stacked neighbor feature built
/// from the previous layer's predictions (training labels substituted for
/// training documents) and retrains. Folds whose training or test part lacks
/// a class are skipped with a warning.
StackingReport train_and_evaluate(const StackingDataset& data, const StackingOptions& options);

}  // namespace linklda
