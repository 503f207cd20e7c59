#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "omt/dataset.hpp"

namespace omt {

inline constexpr int32_t kSourceFeature = -1;
inline constexpr int32_t kSinkFeature = -2;

// One node of the layered feature graph. The admitted condition is a
// contiguous base-code range [lo_code, hi_code]: a singleton for a
// categorical value, a span for a cumulative interval, the full range for
// SKIP. SKIP also admits codes outside the fitted range (unseen values).
struct GraphNode {
  int32_t id = 0;
  int32_t feature = kSourceFeature;
  int32_t lo_code = 0;
  int32_t hi_code = 0;
  bool is_skip = false;
  double test_cost = 0.0;
  int32_t interval_index = -1;  // index into the feature's BinSpec intervals, -1 otherwise

  bool admits(int32_t code) const {
    return is_skip || (code >= lo_code && code <= hi_code);
  }
};

struct Layer {
  int feature = 0;      // dataset feature index
  int first_node = 0;   // id of the first node in this layer
  int count = 0;        // nodes in the layer, SKIP included
};

struct AttributeConstraints {
  std::vector<std::pair<int32_t, int32_t>> forbidden_pairs;  // node-id pairs
  std::optional<double> max_path_cost;
  std::vector<std::pair<int, double>> feature_test_cost;     // (feature, cost)
};

class FeatureGraph {
 public:
  FeatureGraph() = default;

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const GraphNode& node(int32_t id) const { return nodes_[id]; }
  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<int>& feature_order() const { return feature_order_; }
  const AttributeConstraints& constraints() const { return constraints_; }

  int32_t source_id() const { return 0; }
  int32_t sink_id() const { return static_cast<int32_t>(nodes_.size()) - 1; }
  int n_layers() const { return static_cast<int>(layers_.size()); }

  // Layer index a node extends into: source extends into layer 0, layer t
  // into t+1; n_layers() means the sink.
  int next_layer_of(int32_t node_id) const;

  bool pair_forbidden(int32_t a, int32_t b) const;

  // Resolves a (feature, lo_code, hi_code) condition to its node id.
  std::optional<int32_t> find_node(int feature, int32_t lo_code, int32_t hi_code) const;

  std::string describe_node(int32_t id, const Encoding& enc) const;

  friend FeatureGraph build_graph(const BinnedDataset& dataset,
                                  const std::vector<int>& feature_order,
                                  const AttributeConstraints& constraints);

 private:
  std::vector<GraphNode> nodes_;
  std::vector<Layer> layers_;
  std::vector<int> feature_order_;
  AttributeConstraints constraints_;
};

// Builds the layered graph from the dataset's fitted encoders: one layer per
// feature in feature_order, one node per categorical value or (possibly
// cumulative) interval plus one SKIP node, with source and sink terminals.
FeatureGraph build_graph(const BinnedDataset& dataset,
                         const std::vector<int>& feature_order,
                         const AttributeConstraints& constraints = {});

// Source-to-sink path count. Unconstrained: product of layer sizes.
// With max_rule_length d: paths using at most d non-SKIP nodes, by dynamic
// programming over layers. Saturates at the uint64 ceiling.
struct PathCount {
  uint64_t count = 0;
  bool overflow = false;
};
PathCount count_paths(const FeatureGraph& graph,
                      std::optional<int> max_rule_length = std::nullopt);

// Feature order helpers for the CLI.
std::vector<int> natural_order(int n_features);
std::vector<int> gain_order(const BinnedDataset& data);

}  // namespace omt
