#include "omt/enumerate.hpp"

#include <algorithm>

namespace omt {

namespace {

struct Enumerator {
  const FeatureGraph& graph;
  const BinnedDataset& data;
  const RuleConfig& config;
  std::vector<int32_t> picked;  // non-SKIP node ids on the current prefix
  std::vector<Rule> out;

  void complete() {
    double cost = 0.0;
    for (int32_t id : picked) {
      cost += graph.node(id).test_cost;
      for (int32_t other : picked)
        if (other != id && graph.pair_forbidden(id, other)) return;
    }
    if (graph.constraints().max_path_cost && cost > *graph.constraints().max_path_cost + 1e-12)
      return;

    auto cover = std::make_shared<std::vector<int32_t>>();
    for (int32_t i = 0; i < data.n_samples; ++i) {
      bool ok = true;
      for (int32_t id : picked) {
        const GraphNode& n = graph.node(id);
        if (!n.admits(data.codes[n.feature][i])) {
          ok = false;
          break;
        }
      }
      if (ok) cover->push_back(i);
    }
    if (static_cast<int>(cover->size()) < config.min_support) return;

    Rule rule;
    rule.node_ids = picked;
    rule.length = static_cast<int32_t>(picked.size());
    rule.path_cost = cost;
    rule.cover = std::move(cover);
    recompute(rule);
    if (!passes_path_fairness(rule, data, config)) return;
    out.push_back(std::move(rule));
  }

  // Statistics recompute mirroring the production path but driven from the
  // independently scanned cover.
  void recompute(Rule& rule) {
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
        const auto& g = data.codes[*data.group_column];
        for (int32_t i : cover)
          ++rule.group_class_counts[g[i] * data.n_classes + data.labels[i]];
      }
    } else {
      for (int32_t i : cover) {
        rule.sum_y += data.y[i];
        rule.sum_y2 += data.y[i] * data.y[i];
      }
      if (config.metric == MetricKind::squared_error) {
        rule.predicted_value = n > 0 ? rule.sum_y / n : 0.0;
        rule.loss = n > 0 ? std::max(0.0, rule.sum_y2 - rule.sum_y * rule.sum_y / n) : 0.0;
      } else {
        std::vector<double> ys;
        for (int32_t i : cover) ys.push_back(data.y[i]);
        std::sort(ys.begin(), ys.end());
        rule.predicted_value =
            n == 0 ? 0.0
                   : (n % 2 == 1 ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]));
        double s = 0.0;
        for (int32_t i : cover) s += std::abs(data.y[i] - rule.predicted_value);
        rule.loss = s;
      }
    }
    PathMetric pm = path_metric(rule, config.metric, config.positive_class);
    rule.tp = pm.tp;
    rule.fp = pm.fp;
    rule.fn = pm.fn;
  }

  void descend(int layer) {
    if (layer == graph.n_layers()) {
      complete();
      return;
    }
    const Layer& l = graph.layers()[layer];
    for (int i = 0; i < l.count; ++i) {
      const GraphNode& n = graph.node(l.first_node + i);
      if (n.is_skip) {
        descend(layer + 1);
      } else {
        if (static_cast<int>(picked.size()) + 1 > config.max_rule_length) continue;
        picked.push_back(n.id);
        descend(layer + 1);
        picked.pop_back();
      }
    }
  }
};

}  // namespace

std::vector<Rule> enumerate_paths(const FeatureGraph& graph, const BinnedDataset& dataset,
                                  const RuleConfig& config, uint64_t cap) {
  PathCount pc = count_paths(graph, config.max_rule_length);
  if (pc.overflow || pc.count > cap)
    throw ConfigError("enumeration refused: " +
                      (pc.overflow ? std::string("path count overflows")
                                   : std::to_string(pc.count) + " paths") +
                      " exceeds cap " + std::to_string(cap));
  Enumerator e{graph, dataset, config, {}, {}};
  e.descend(0);
  return e.out;
}

}  // namespace omt
