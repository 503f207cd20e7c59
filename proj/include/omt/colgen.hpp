#pragma once

#include <optional>
#include <vector>

#include "omt/master.hpp"
#include "omt/rules.hpp"

namespace omt {

struct CgConfig {
  int K = 1000;
  int max_iterations = 40;
  int max_columns = 10000;
  double dual_tolerance = 1e-6;
  double stall_epsilon = 1e-6;   // objective improvement below this counts as a stall
  int stall_window = 3;          // consecutive stalled iterations before stopping
  double min_support_fraction = 0.01;
  int max_rule_length = 2;       // d
  int leaf_budget = 4;           // l
  MetricKind metric = MetricKind::misclassification;
  int positive_class = -1;
  std::optional<double> per_path_fairness_delta;
  double time_limit_s = 1200.0;  // checked between iterations; bounds the MIP phase
  SimplexOptions lp;
  int mip_node_limit = 100000;

  RuleConfig rule_config(int n_samples) const;
};

enum class CgStop { dual_feasible, stalled, iteration_limit, column_limit };

struct CgIterationLog {
  int iteration = 0;
  double rmp_objective = 0.0;
  double min_reduced_cost = 0.0;
  int columns_added = 0;
  int pool_size = 0;
  double elapsed_ms = 0.0;
};

struct CgReport {
  int iterations_run = 0;
  int columns_generated = 0;
  double nu_lp = 0.0;
  double nu_ip = 0.0;
  double gap = 0.0;
  CgStop converged_by = CgStop::iteration_limit;
  std::vector<CgIterationLog> per_iteration;
};

struct PricedRule {
  Rule rule;
  double rc = 0.0;
};

// K-shortest-path pricing sweep over the feature graph (lowest reduced cost
// first). Walks the nodes source-to-sink keeping at most K partial rules per
// node; every partial whose completed reduced cost is negative is a complete
// rule (its remaining layers are implicitly SKIP) and enters the result list.
// Reduced costs are recomputed per extension since path costs are not
// arc-additive. Returns at most K rules with rc < -dual_tolerance, ascending.
std::vector<PricedRule> ksp(const FeatureGraph& graph, const BinnedDataset& dataset,
                            const DualVector& duals, const CgConfig& config,
                            const std::vector<SideConstraint>& side_constraints);

struct CgResult {
  MasterProblem master;
  CgReport report;
  MipSolution mip;
};

// Full column-generation run: iterate RMP solve / pricing / column insertion
// until dual feasibility, an objective stall, the iteration limit, or the
// column cap, then solve the Master-MIP over the generated pool.
CgResult run_cg(const FeatureGraph& graph, const BinnedDataset& dataset,
                const CgConfig& config, std::vector<SideConstraint> side_constraints,
                std::vector<double> penalties);

// Default per-sample penalty: twice the largest single-sample loss
// contribution under the metric (2.0 for misclassification).
std::vector<double> default_penalties(const BinnedDataset& dataset, MetricKind metric);

}  // namespace omt
