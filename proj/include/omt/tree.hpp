#pragma once

#include <string>
#include <vector>

#include "omt/colgen.hpp"
#include "omt/dataset.hpp"
#include "omt/master.hpp"

namespace omt {

struct TreeCondition {
  int feature = 0;
  int32_t lo_code = 0;
  int32_t hi_code = 0;

  bool admits(int32_t code) const { return code >= lo_code && code <= hi_code; }
};

struct TreeRule {
  std::vector<TreeCondition> conditions;  // in feature-order position
  int32_t label = -1;       // class id (classification)
  double value = 0.0;       // leaf value (regression)
  int32_t pool_index = -1;
  int32_t cover_size = 0;   // training cover, diagnostic
};

struct EvalReport {
  double accuracy = 0.0;
  double f1 = 0.0;  // binary classification only
  std::vector<std::vector<int>> confusion;  // [true][predicted]
  double coverage = 0.0;  // fraction of samples matched by >= 1 rule
  int n_rules = 0;
  double mean_rule_length = 0.0;
};

// The extracted multiway-split tree: selected rules in decision-list order
// (most specific first: descending length, ascending pool index) plus a
// fallback label for samples outside every rule.
class MultiwayTree {
 public:
  std::vector<TreeRule> rules;
  int32_t fallback_label = -1;
  double fallback_value = 0.0;
  std::vector<int> feature_order;
  int depth = 0;
  int leaf_budget = 0;
  MetricKind metric = MetricKind::misclassification;
  int positive_class = -1;
  Encoding encoding;

  // Index of the matching rule in rule order, -1 for fallback.
  int match(const std::vector<int32_t>& sample_codes) const;

  int32_t predict_class(const std::vector<int32_t>& sample_codes) const;
  double predict_value(const std::vector<int32_t>& sample_codes) const;

  std::string to_json() const;
  std::string to_dot() const;
  static MultiwayTree from_json(const std::string& text);
};

MultiwayTree assemble_tree(const MipSolution& mip, const MasterProblem& mp,
                           const BinnedDataset& dataset, const FeatureGraph& graph,
                           const CgConfig& config);

EvalReport evaluate(const MultiwayTree& tree, const BinnedDataset& dataset);

// Top-down multiway splitter minimizing weighted Gini impurity, one child
// per feature value, each feature used at most once per path. Comparison
// baseline only.
MultiwayTree greedy_baseline(const BinnedDataset& dataset, int depth, int min_support);

}  // namespace omt
