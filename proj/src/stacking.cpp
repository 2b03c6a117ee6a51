#include "linklda/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "linklda/error.hpp"
#include "linklda/estimate.hpp"
#include "text_io.hpp"

namespace linklda {

std::string_view to_string(EdgeProvenance provenance) {
  switch (provenance) {
    case EdgeProvenance::cocitation: return "cocit";
    case EdgeProvenance::chi: return "chi";
    case EdgeProvenance::reversed_cocitation: return "rev-cocit";
    case EdgeProvenance::reversed_chi: return "rev-chi";
  }
  return "?";
}

EdgeWeights cocitation_weights(const LinkGraph& graph) {
  return EdgeWeights{EdgeProvenance::cocitation, kernels::cocitation_parallel(graph)};
}

LinkGraph reverse_graph(const LinkGraph& graph) {
  LinkGraph reversed(graph.node_count());
  for (DocId u = 0; u < graph.node_count(); ++u) {
    for (const auto& l : graph.outlinks(u)) reversed.add(l.target, u, l.weight);
  }
  return reversed;
}

EdgeWeights chi_edge_weights(const TopicModel& model, const LinkGraph& graph) {
  if (model.kind != ModelKind::linked) throw UsageError("chi weights need a linked model");
  if (model.influence.doc_count() != graph.node_count()) throw ValidationError("chi and graph sizes differ");
  EdgeWeights weights{EdgeProvenance::chi, Adjacency(graph.node_count())};
  for (DocId d = 0; d < graph.node_count(); ++d) {
    const auto out = graph.outlinks(d);
    const auto members = model.influence.members(d);
    const auto chi = model.chi_of(d);
    if (members.size() != out.size() + 1) throw ValidationError("chi was inferred on a different graph");
    double neighbor_mass = 0.0;
    for (std::size_t r = 1; r < chi.size(); ++r) neighbor_mass += chi[r];
    auto& row = weights.adjacency[d];
    for (std::size_t r = 1; r < chi.size(); ++r) {
      if (members[r] != out[r - 1].target) throw ValidationError("chi was inferred on a different graph");
      row.push_back(WeightedEdge{members[r], chi[r] / neighbor_mass});
    }
  }
  return weights;
}

EdgeWeights reverse_edges(const EdgeWeights& weights) {
  EdgeWeights reversed;
  switch (weights.provenance) {
    case EdgeProvenance::cocitation: reversed.provenance = EdgeProvenance::reversed_cocitation; break;
    case EdgeProvenance::chi: reversed.provenance = EdgeProvenance::reversed_chi; break;
    case EdgeProvenance::reversed_cocitation: reversed.provenance = EdgeProvenance::cocitation; break;
    case EdgeProvenance::reversed_chi: reversed.provenance = EdgeProvenance::chi; break;
  }
  reversed.adjacency.resize(weights.node_count());
  for (DocId u = 0; u < weights.node_count(); ++u) {
    for (const auto& e : weights.adjacency[u]) reversed.adjacency[e.target].push_back(WeightedEdge{u, e.weight});
  }
  return reversed;
}

std::vector<double> stack_features(std::span<const double> base_predictions, const EdgeWeights& weights,
                                   std::span<const std::optional<int>> train_labels) {
  const std::size_t n = weights.node_count();
  if (base_predictions.size() != n || train_labels.size() != n) {
    throw ValidationError("stacking inputs disagree on node count");
  }
  std::vector<double> feature(n, 0.5);
  for (std::size_t u = 0; u < n; ++u) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& e : weights.adjacency[u]) {
      if (e.weight < 0.0) throw ValidationError("negative edge weight");
      const double p = train_labels[e.target] ? static_cast<double>(*train_labels[e.target])
                                              : base_predictions[e.target];
      num += e.weight * p;
      den += e.weight;
    }
    if (den > 0.0) feature[u] = num / den;
  }
  return feature;
}

double auc(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  double positives = 0.0;
  double negatives = 0.0;
  double rank_sum = 0.0;  // sum of midranks of positives, 1-based
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (sorted[t].positive) {
        positives += 1.0;
        rank_sum += midrank;
      } else {
        negatives += 1.0;
      }
    }
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) throw ValidationError("AUC needs both positive and negative examples");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void LogisticRegression::fit(std::span<const double> features, std::size_t dims, std::span<const std::size_t> rows,
                             std::span<const int> labels) {
  if (rows.size() != labels.size()) throw ValidationError("row and label counts differ");
  weights_.assign(dims, 0.0);
  bias_ = 0.0;
  if (rows.empty()) return;
  const double n = static_cast<double>(rows.size());
  std::vector<double> grad(dims);
  for (std::size_t epoch = 0; epoch < options_.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* x = features.data() + rows[i] * dims;
      double s = bias_;
      for (std::size_t j = 0; j < dims; ++j) s += weights_[j] * x[j];
      const double err = sigmoid(s) - static_cast<double>(labels[i]);
      for (std::size_t j = 0; j < dims; ++j) grad[j] += err * x[j];
      grad_bias += err;
    }
    for (std::size_t j = 0; j < dims; ++j) weights_[j] -= options_.step * (grad[j] / n + options_.l2 * weights_[j]);
    bias_ -= options_.step * grad_bias / n;
  }
}

double LogisticRegression::predict(std::span<const double> row) const {
  double s = bias_;
  for (std::size_t j = 0; j < weights_.size(); ++j) s += weights_[j] * row[j];
  return sigmoid(s);
}

void StackingReport::write_csv(std::ostream& out, std::size_t layers, std::string_view weighting) const {
  out << "class,fold,layers,weighting,auc\n";
  for (const auto& f : folds) {
    out << f.category << ',' << f.seed << '/' << f.fold << ',' << layers << ',' << weighting << ','
        << detail::format_double(f.auc) << '\n';
  }
  out << "macro,mean," << layers << ',' << weighting << ',' << detail::format_double(macro_auc) << '\n';
  out << "macro,stddev," << layers << ',' << weighting << ',' << detail::format_double(macro_stddev) << '\n';
}

StackingReport train_and_evaluate(const StackingDataset& data, const StackingOptions& options) {
  const std::size_t m = data.labels.size();
  if (data.dims == 0 || data.features.size() != m * data.dims) throw ValidationError("feature matrix has wrong shape");
  if (data.weights.node_count() != m) throw ValidationError("edge weights do not cover every document");
  if (options.layers > 2) throw UsageError("at most two stacking layers are supported");
  if (options.seeds.empty()) throw UsageError("at least one seed is required");

  StackingReport report;
  {
    std::set<std::string> seen;
    for (const auto& l : data.labels) {
      if (l) seen.insert(*l);
    }
    report.categories.assign(seen.begin(), seen.end());
  }
  if (report.categories.size() < 2) throw ValidationError("need at least two categories");
  report.class_auc.assign(report.categories.size(), 0.0);
  std::vector<std::size_t> class_folds(report.categories.size(), 0);

  for (const auto seed : options.seeds) {
    const auto fold_of = assign_folds(data.labels, options.fold_count, seed);
    double macro = 0.0;
    std::size_t macro_classes = 0;
    for (std::size_t c = 0; c < report.categories.size(); ++c) {
      const auto& category = report.categories[c];
      double class_sum = 0.0;
      std::size_t class_count = 0;
      for (std::size_t fold = 0; fold < options.fold_count; ++fold) {
        std::vector<std::size_t> train_rows;
        std::vector<int> train_y;
        std::vector<std::size_t> test_rows;
        std::vector<std::optional<int>> train_labels(m);
        for (std::size_t d = 0; d < m; ++d) {
          if (!fold_of[d]) continue;
          const int y = *data.labels[d] == category ? 1 : 0;
          if (*fold_of[d] == fold) {
            test_rows.push_back(d);
          } else {
            train_rows.push_back(d);
            train_y.push_back(y);
            train_labels[d] = y;
          }
        }
        auto has_both = [&](auto first, auto last, auto label_of) {
          bool pos = false;
          bool neg = false;
          for (auto it = first; it != last; ++it) (label_of(*it) ? pos : neg) = true;
          return pos && neg;
        };
        const bool train_ok = has_both(train_y.begin(), train_y.end(), [](int y) { return y == 1; });
        const bool test_ok = has_both(test_rows.begin(), test_rows.end(),
                                      [&](std::size_t d) { return *data.labels[d] == category; });
        if (!train_ok || !test_ok) {
          report.warnings.push_back("seed " + std::to_string(seed) + " class " + category + " fold " +
                                    std::to_string(fold) + ": single-class fold skipped");
          continue;
        }

        std::size_t dims = data.dims;
        std::vector<double> features = data.features;
        std::vector<double> predictions(m);
        LogisticRegression model(options.classifier);
        for (std::size_t layer = 0;; ++layer) {
          model.fit(features, dims, train_rows, train_y);
          for (std::size_t d = 0; d < m; ++d) {
            predictions[d] = model.predict(std::span<const double>(features.data() + d * dims, dims));
          }
          if (layer == options.layers) break;
          const auto stacked = stack_features(predictions, data.weights, train_labels);
          std::vector<double> widened(m * (dims + 1));
          for (std::size_t d = 0; d < m; ++d) {
            std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(d * dims), dims,
                        widened.begin() + static_cast<std::ptrdiff_t>(d * (dims + 1)));
            widened[d * (dims + 1) + dims] = stacked[d];
          }
          features = std::move(widened);
          ++dims;
        }

        std::vector<ScoredLabel> scored;
        scored.reserve(test_rows.size());
        for (auto d : test_rows) scored.push_back(ScoredLabel{predictions[d], *data.labels[d] == category});
        const double a = auc(scored);
        report.folds.push_back(FoldResult{category, seed, fold, a});
        class_sum += a;
        ++class_count;
      }
      if (class_count > 0) {
        const double mean = class_sum / static_cast<double>(class_count);
        report.class_auc[c] += mean;
        ++class_folds[c];
        macro += mean;
        ++macro_classes;
      }
    }
    report.macro_per_seed.push_back(macro_classes > 0 ? macro / static_cast<double>(macro_classes) : 0.5);
  }
  for (std::size_t c = 0; c < report.categories.size(); ++c) {
    if (class_folds[c] > 0) report.class_auc[c] /= static_cast<double>(class_folds[c]);
  }
  const double n = static_cast<double>(report.macro_per_seed.size());
  report.macro_auc = std::accumulate(report.macro_per_seed.begin(), report.macro_per_seed.end(), 0.0) / n;
  double var = 0.0;
  for (double v : report.macro_per_seed) var += (v - report.macro_auc) * (v - report.macro_auc);
  report.macro_stddev = n > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return report;
}

}  // namespace linklda
