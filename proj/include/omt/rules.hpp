#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "omt/dataset.hpp"
#include "omt/feature_graph.hpp"

namespace omt {

enum class MetricKind { misclassification, squared_error, absolute_error };

// A candidate decision rule: a source-to-sink path restricted to its
// informative (non-SKIP) nodes, with the samples it covers and the path
// statistics the master problem needs. Rules are immutable values; covers
// are shared so SKIP extensions stay cheap.
struct Rule {
  std::vector<int32_t> node_ids;  // non-SKIP nodes in layer order
  std::shared_ptr<const std::vector<int32_t>> cover;  // sorted sample indices
  int32_t length = 0;             // non-SKIP node count

  std::vector<int32_t> class_counts;        // per class over cover
  double sum_y = 0.0, sum_y2 = 0.0;         // regression accumulators
  std::vector<int32_t> group_class_counts;  // [group * n_classes + class]

  double loss = 0.0;  // xi_j under the configured metric
  int32_t tp = 0, fp = 0, fn = 0;
  double path_cost = 0.0;

  int32_t predicted = -1;        // majority class, lowest id on ties
  double predicted_value = 0.0;  // mean / median for regression metrics

  int cover_size() const { return cover ? static_cast<int>(cover->size()) : 0; }
};

struct RuleConfig {
  MetricKind metric = MetricKind::misclassification;
  int max_rule_length = 0;
  int min_support = 1;
  int positive_class = -1;  // required for tp/fp/fn and fairness
  std::optional<double> per_path_fairness_delta;
};

struct PathMetric {
  double xi = 0.0;
  int32_t tp = 0, fp = 0, fn = 0;
};

// Loss and binary-classification counts for a rule whose statistics are
// populated. The rule's predicted class is the majority class; tp/fp/fn are
// taken against positive_class (all zero tp/fp when the rule predicts the
// other class, fn = positives lost in the cover).
PathMetric path_metric(const Rule& rule, MetricKind metric, int positive_class);

// The empty path at the source: covers every sample.
Rule root_rule(const BinnedDataset& dataset, const RuleConfig& config);

// Path-extension operator. SKIP nodes advance the layer and leave cover and
// statistics untouched. Informative nodes filter the cover and recompute all
// statistics; returns nullopt when the extension violates rule length,
// minimum support, a forbidden pair, or the path cost budget.
std::optional<Rule> extend(const Rule& rule, const GraphNode& node,
                           const BinnedDataset& dataset, const FeatureGraph& graph,
                           const RuleConfig& config);

// Per-group positive rates over the cover: share of group-g samples carrying
// the positive label; 0 for groups absent from the cover.
std::vector<double> fairness_stats(const Rule& rule, int n_groups, int n_classes,
                                   int positive_class);

// Largest pairwise gap of the per-group positive rates; 0 without group data.
double fairness_gap(const Rule& rule, int n_groups, int n_classes, int positive_class);

// Complete-rule feasibility checks that are not prefix-monotone and so run
// once per finished path rather than per extension.
bool passes_path_fairness(const Rule& rule, const BinnedDataset& dataset,
                          const RuleConfig& config);

}  // namespace omt
