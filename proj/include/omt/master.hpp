#pragma once

#include <functional>
#include <string>
#include <vector>

#include "omt/rules.hpp"
#include "omt/simplex.hpp"

namespace omt {

// A linear side constraint over the selection variables. The coefficient is
// a function of the rule so that columns entering the pool later pick up
// their coefficients automatically.
struct SideConstraint {
  enum class Kind { f1_min, fairness_budget, custom };
  Kind kind = Kind::custom;
  std::string name;
  RowSense sense = RowSense::ge;
  double rhs = 0.0;
  double delta = 0.0;        // threshold parameter of the built-in kinds
  int positive_class = -1;
  int n_groups = 0, n_classes = 0;  // fairness bookkeeping
  std::function<double(const Rule&)> custom_coeff;

  double coeff(const Rule& rule) const;
};

// F1 >= delta over the covered samples, written as the linear row
// sum_j [tp_j - delta*(tp_j + 0.5*(fp_j + fn_j))] z_j >= 0.
SideConstraint linearize_f1_constraint(double delta, int positive_class);

// sum_j gap_j z_j <= delta where gap_j is the rule's largest pairwise
// difference of per-group positive rates.
SideConstraint fairness_budget_constraint(double delta, int positive_class,
                                          int n_groups, int n_classes);

struct MasterProblem {
  std::vector<Rule> pool;
  std::vector<double> penalties;  // c_i > 0 per sample
  int leaf_budget = 1;
  std::vector<SideConstraint> side_constraints;
  int n_samples = 0;
};

struct DualVector {
  std::vector<double> lambda;  // per coverage row
  double mu = 0.0;             // cardinality row
  std::vector<double> tau;     // per side constraint

  static DualVector from_lp(const LpSolution& sol, int n_samples, int n_side);
};

// LP relaxation over the current pool: columns z_j in [0, inf) (z <= 1 is
// implied by the coverage rows), slacks s_i in [0, inf); rows are N coverage
// equalities, one cardinality row, then the side-constraint rows.
LinearProgram build_rmp(const MasterProblem& mp);

// rc_j = xi_j - (sum_{i in cover} lambda_i + mu + sum_m rho_mj tau_m)
double reduced_cost(const Rule& rule, const DualVector& duals,
                    const std::vector<SideConstraint>& side_constraints);

struct MipSolution {
  std::vector<int32_t> selected;       // pool indices with z_j = 1
  std::vector<int32_t> slack_samples;  // samples left uncovered
  double objective = 0.0;              // nu_IP
  double bound = 0.0;                  // nu_LP of the root relaxation
  double gap = 0.0;                    // (nu_IP - nu_LP)/nu_IP, 0 when nu_IP <= 0
  bool hit_time_limit = false;
  bool hit_node_limit = false;
  int nodes_explored = 0;
};

struct MipOptions {
  double time_limit_s = 1200.0;
  int node_limit = 100000;
  SimplexOptions lp;
};

// Best-first branch and bound over the pool. Branches on the z_j closest to
// 0.5 (larger cover on ties), explores the fix-to-1 child first, prunes
// against the incumbent, and seeds the incumbent with a greedy rounding by
// ascending xi_j/|cover|. The all-slack solution keeps the search feasible.
MipSolution solve_master_mip(const MasterProblem& mp, const MipOptions& options = {});

}  // namespace omt
