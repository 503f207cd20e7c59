#include "omt/feature_graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace omt {

int FeatureGraph::next_layer_of(int32_t node_id) const {
  const GraphNode& n = nodes_[node_id];
  if (n.feature == kSourceFeature) return 0;
  for (int t = 0; t < n_layers(); ++t) {
    const Layer& l = layers_[t];
    if (node_id >= l.first_node && node_id < l.first_node + l.count) return t + 1;
  }
  return n_layers();  // sink (never extended)
}

bool FeatureGraph::pair_forbidden(int32_t a, int32_t b) const {
  for (const auto& [x, y] : constraints_.forbidden_pairs)
    if ((x == a && y == b) || (x == b && y == a)) return true;
  return false;
}

std::optional<int32_t> FeatureGraph::find_node(int feature, int32_t lo_code,
                                               int32_t hi_code) const {
  for (const GraphNode& n : nodes_)
    if (!n.is_skip && n.feature == feature && n.lo_code == lo_code && n.hi_code == hi_code)
      return n.id;
  return std::nullopt;
}

std::string FeatureGraph::describe_node(int32_t id, const Encoding& enc) const {
  const GraphNode& n = nodes_[id];
  if (n.feature == kSourceFeature) return "source";
  if (n.feature == kSinkFeature) return "sink";
  const std::string& name = enc.feature_names[n.feature];
  if (n.is_skip) return name + "=any";
  const FeatureEncoder& fe = enc.features[n.feature];
  if (fe.kind == ColumnKind::categorical) return name + "=" + fe.categories[n.lo_code];
  if (n.lo_code == n.hi_code) return name + "@bin" + std::to_string(n.lo_code);
  return name + "@bin" + std::to_string(n.lo_code) + ".." + std::to_string(n.hi_code);
}

FeatureGraph build_graph(const BinnedDataset& dataset,
                         const std::vector<int>& feature_order,
                         const AttributeConstraints& constraints) {
  const int k = dataset.n_features;
  std::vector<bool> seen(k, false);
  if (static_cast<int>(feature_order.size()) != k)
    throw ConfigError("feature order has " + std::to_string(feature_order.size()) +
                      " entries, dataset has " + std::to_string(k) + " features");
  for (int f : feature_order) {
    if (f < 0 || f >= k || seen[f]) throw ConfigError("feature order is not a permutation");
    seen[f] = true;
  }

  FeatureGraph g;
  g.feature_order_ = feature_order;
  g.constraints_ = constraints;

  GraphNode source;
  source.id = 0;
  source.feature = kSourceFeature;
  g.nodes_.push_back(source);

  auto cost_of = [&](int feature) {
    for (const auto& [f, c] : constraints.feature_test_cost)
      if (f == feature) return c;
    return 0.0;
  };

  for (int f : feature_order) {
    Layer layer;
    layer.feature = f;
    layer.first_node = static_cast<int>(g.nodes_.size());
    const FeatureEncoder& fe = dataset.encoding.features[f];
    const double cost = cost_of(f);

    if (fe.kind == ColumnKind::categorical || fe.bins.intervals.empty()) {
      for (int32_t v = 0; v < dataset.cardinalities[f]; ++v) {
        GraphNode n;
        n.id = static_cast<int32_t>(g.nodes_.size());
        n.feature = f;
        n.lo_code = n.hi_code = v;
        n.test_cost = cost;
        g.nodes_.push_back(n);
      }
    } else {
      for (size_t i = 0; i < fe.bins.intervals.size(); ++i) {
        const Interval& iv = fe.bins.intervals[i];
        GraphNode n;
        n.id = static_cast<int32_t>(g.nodes_.size());
        n.feature = f;
        n.lo_code = iv.first_base;
        n.hi_code = iv.last_base;
        n.interval_index = static_cast<int32_t>(i);
        n.test_cost = cost;
        g.nodes_.push_back(n);
      }
    }

    GraphNode skip;
    skip.id = static_cast<int32_t>(g.nodes_.size());
    skip.feature = f;
    skip.lo_code = 0;
    skip.hi_code = dataset.cardinalities[f] - 1;
    skip.is_skip = true;
    g.nodes_.push_back(skip);

    layer.count = static_cast<int>(g.nodes_.size()) - layer.first_node;
    g.layers_.push_back(layer);
  }

  GraphNode sink;
  sink.id = static_cast<int32_t>(g.nodes_.size());
  sink.feature = kSinkFeature;
  g.nodes_.push_back(sink);
  return g;
}

PathCount count_paths(const FeatureGraph& graph, std::optional<int> max_rule_length) {
  constexpr uint64_t kMax = std::numeric_limits<uint64_t>::max();
  auto mul_sat = [](uint64_t a, uint64_t b, bool& over) {
    if (a != 0 && b > kMax / a) {
      over = true;
      return kMax;
    }
    return a * b;
  };
  auto add_sat = [](uint64_t a, uint64_t b, bool& over) {
    if (b > kMax - a) {
      over = true;
      return kMax;
    }
    return a + b;
  };

  PathCount result;
  if (!max_rule_length) {
    result.count = 1;
    for (const Layer& l : graph.layers())
      result.count = mul_sat(result.count, static_cast<uint64_t>(l.count), result.overflow);
    return result;
  }

  const int d = std::max(0, *max_rule_length);
  // ways[u] = paths through processed layers using u non-SKIP nodes
  std::vector<uint64_t> ways(d + 1, 0);
  ways[0] = 1;
  for (const Layer& l : graph.layers()) {
    const uint64_t informative = static_cast<uint64_t>(l.count) - 1;
    std::vector<uint64_t> next(d + 1, 0);
    for (int u = 0; u <= d; ++u) {
      if (ways[u] == 0) continue;
      next[u] = add_sat(next[u], ways[u], result.overflow);  // SKIP
      if (u + 1 <= d)
        next[u + 1] =
            add_sat(next[u + 1], mul_sat(ways[u], informative, result.overflow), result.overflow);
    }
    ways = std::move(next);
  }
  for (uint64_t w : ways) result.count = add_sat(result.count, w, result.overflow);
  return result;
}

std::vector<int> natural_order(int n_features) {
  std::vector<int> order(n_features);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

std::vector<int> gain_order(const BinnedDataset& data) {
  std::vector<int> order = natural_order(data.n_features);
  std::vector<double> gain(data.n_features);
  for (int f = 0; f < data.n_features; ++f) gain[f] = information_gain(data, f);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gain[a] > gain[b]; });
  return order;
}

}  // namespace omt
