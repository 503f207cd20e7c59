#include "omt/rules.hpp"

#include <algorithm>
#include <cmath>

namespace omt {

namespace {

double median_of(std::vector<double>& v) {
  const size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Fills counts, loss, prediction and binary stats from the cover.
void compute_stats(Rule& rule, const BinnedDataset& data, const RuleConfig& config) {
  const std::vector<int32_t>& cover = *rule.cover;
  const int n = static_cast<int>(cover.size());

  if (data.is_classification) {
    rule.class_counts.assign(data.n_classes, 0);
    for (int32_t i : cover) ++rule.class_counts[data.labels[i]];
    auto best = std::max_element(rule.class_counts.begin(), rule.class_counts.end());
    rule.predicted = n > 0 ? static_cast<int32_t>(best - rule.class_counts.begin()) : -1;
    rule.loss = n > 0 ? static_cast<double>(n - *best) : 0.0;

    if (data.group_column) {
      const int groups = data.cardinalities[*data.group_column];
      rule.group_class_counts.assign(groups * data.n_classes, 0);
      const auto& gcodes = data.codes[*data.group_column];
      for (int32_t i : cover)
        ++rule.group_class_counts[gcodes[i] * data.n_classes + data.labels[i]];
    }
  } else {
    rule.sum_y = rule.sum_y2 = 0.0;
    for (int32_t i : cover) {
      rule.sum_y += data.y[i];
      rule.sum_y2 += data.y[i] * data.y[i];
    }
    if (config.metric == MetricKind::squared_error) {
      rule.predicted_value = n > 0 ? rule.sum_y / n : 0.0;
      rule.loss = n > 0 ? std::max(0.0, rule.sum_y2 - rule.sum_y * rule.sum_y / n) : 0.0;
    } else {
      if (n == 0) {
        rule.predicted_value = 0.0;
        rule.loss = 0.0;
      } else {
        std::vector<double> ys;
        ys.reserve(n);
        for (int32_t i : cover) ys.push_back(data.y[i]);
        rule.predicted_value = median_of(ys);
        double s = 0.0;
        for (int32_t i : cover) s += std::abs(data.y[i] - rule.predicted_value);
        rule.loss = s;
      }
    }
  }

  PathMetric pm = path_metric(rule, config.metric, config.positive_class);
  rule.tp = pm.tp;
  rule.fp = pm.fp;
  rule.fn = pm.fn;
}

}  // namespace

PathMetric path_metric(const Rule& rule, MetricKind metric, int positive_class) {
  PathMetric pm;
  pm.xi = rule.loss;
  if (metric != MetricKind::misclassification || positive_class < 0) return pm;
  if (positive_class >= static_cast<int>(rule.class_counts.size())) return pm;
  const int32_t positives = rule.class_counts[positive_class];
  if (rule.predicted == positive_class) {
    pm.tp = positives;
    pm.fp = static_cast<int32_t>(rule.cover_size()) - positives;
    pm.fn = 0;
  } else {
    pm.tp = 0;
    pm.fp = 0;
    pm.fn = positives;
  }
  return pm;
}

Rule root_rule(const BinnedDataset& dataset, const RuleConfig& config) {
  if (config.metric == MetricKind::misclassification && !dataset.is_classification)
    throw ConfigError("misclassification metric requires class labels");
  if (config.metric != MetricKind::misclassification && dataset.is_classification)
    throw ConfigError("regression metric requires numeric labels");
  if (dataset.group_column && dataset.cardinalities[*dataset.group_column] > 8)
    throw ConfigError("sensitive feature has more than 8 groups");

  Rule rule;
  auto all = std::make_shared<std::vector<int32_t>>(dataset.n_samples);
  for (int i = 0; i < dataset.n_samples; ++i) (*all)[i] = i;
  rule.cover = std::move(all);
  compute_stats(rule, dataset, config);
  return rule;
}

std::optional<Rule> extend(const Rule& rule, const GraphNode& node,
                           const BinnedDataset& dataset, const FeatureGraph& graph,
                           const RuleConfig& config) {
  if (node.is_skip) return rule;

  if (rule.length + 1 > config.max_rule_length) return std::nullopt;
  for (int32_t prev : rule.node_ids)
    if (graph.pair_forbidden(prev, node.id)) return std::nullopt;

  const double cost = rule.path_cost + node.test_cost;
  const auto& budget = graph.constraints().max_path_cost;
  if (budget && cost > *budget + 1e-12) return std::nullopt;

  auto filtered = std::make_shared<std::vector<int32_t>>();
  const auto& codes = dataset.codes[node.feature];
  filtered->reserve(rule.cover->size());
  for (int32_t i : *rule.cover)
    if (node.admits(codes[i])) filtered->push_back(i);
  if (static_cast<int>(filtered->size()) < config.min_support) return std::nullopt;

  Rule out;
  out.node_ids = rule.node_ids;
  out.node_ids.push_back(node.id);
  out.cover = std::move(filtered);
  out.length = rule.length + 1;
  out.path_cost = cost;
  compute_stats(out, dataset, config);
  return out;
}

std::vector<double> fairness_stats(const Rule& rule, int n_groups, int n_classes,
                                   int positive_class) {
  std::vector<double> phi(n_groups, 0.0);
  if (rule.group_class_counts.empty() || positive_class < 0) return phi;
  for (int g = 0; g < n_groups; ++g) {
    int total = 0;
    for (int c = 0; c < n_classes; ++c) total += rule.group_class_counts[g * n_classes + c];
    if (total > 0)
      phi[g] = static_cast<double>(rule.group_class_counts[g * n_classes + positive_class]) / total;
  }
  return phi;
}

double fairness_gap(const Rule& rule, int n_groups, int n_classes, int positive_class) {
  if (rule.group_class_counts.empty()) return 0.0;
  std::vector<double> phi = fairness_stats(rule, n_groups, n_classes, positive_class);
  auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  return *hi - *lo;
}

bool passes_path_fairness(const Rule& rule, const BinnedDataset& dataset,
                          const RuleConfig& config) {
  if (!config.per_path_fairness_delta || !dataset.group_column) return true;
  const int groups = dataset.cardinalities[*dataset.group_column];
  return fairness_gap(rule, groups, dataset.n_classes, config.positive_class) <=
         *config.per_path_fairness_delta + 1e-12;
}

}  // namespace omt
