#include "omt/master.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace omt {

double SideConstraint::coeff(const Rule& rule) const {
  switch (kind) {
    case Kind::f1_min:
      return rule.tp - delta * (rule.tp + 0.5 * (rule.fp + rule.fn));
    case Kind::fairness_budget:
      return fairness_gap(rule, n_groups, n_classes, positive_class);
    case Kind::custom:
      return custom_coeff(rule);
  }
  return 0.0;
}

SideConstraint linearize_f1_constraint(double delta, int positive_class) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("min_f1 must lie in (0,1), got " + std::to_string(delta));
  SideConstraint sc;
  sc.kind = SideConstraint::Kind::f1_min;
  sc.name = "min_f1";
  sc.sense = RowSense::ge;
  sc.rhs = 0.0;
  sc.delta = delta;
  sc.positive_class = positive_class;
  return sc;
}

SideConstraint fairness_budget_constraint(double delta, int positive_class,
                                          int n_groups, int n_classes) {
  SideConstraint sc;
  sc.kind = SideConstraint::Kind::fairness_budget;
  sc.name = "fairness_budget";
  sc.sense = RowSense::le;
  sc.rhs = delta;
  sc.delta = delta;
  sc.positive_class = positive_class;
  sc.n_groups = n_groups;
  sc.n_classes = n_classes;
  return sc;
}

DualVector DualVector::from_lp(const LpSolution& sol, int n_samples, int n_side) {
  DualVector d;
  d.lambda.assign(sol.duals.begin(), sol.duals.begin() + n_samples);
  d.mu = sol.duals[n_samples];
  d.tau.assign(sol.duals.begin() + n_samples + 1, sol.duals.begin() + n_samples + 1 + n_side);
  return d;
}

LinearProgram build_rmp(const MasterProblem& mp) {
  const int n_rules = static_cast<int>(mp.pool.size());
  const int n = mp.n_samples;
  LinearProgram lp;
  for (const Rule& r : mp.pool) lp.add_variable(r.loss);
  for (int i = 0; i < n; ++i) lp.add_variable(mp.penalties[i]);

  // Coverage: sum_j a_ij z_j + s_i = 1.
  std::vector<LpRow> rows(n);
  for (int i = 0; i < n; ++i) {
    rows[i].sense = RowSense::eq;
    rows[i].rhs = 1.0;
  }
  for (int j = 0; j < n_rules; ++j)
    for (int32_t i : *mp.pool[j].cover) {
      rows[i].idx.push_back(j);
      rows[i].val.push_back(1.0);
    }
  for (int i = 0; i < n; ++i) {
    rows[i].idx.push_back(n_rules + i);
    rows[i].val.push_back(1.0);
    lp.rows.push_back(std::move(rows[i]));
  }

  // Cardinality: sum_j z_j <= l.
  LpRow card;
  card.sense = RowSense::le;
  card.rhs = mp.leaf_budget;
  for (int j = 0; j < n_rules; ++j) {
    card.idx.push_back(j);
    card.val.push_back(1.0);
  }
  lp.rows.push_back(std::move(card));

  for (const SideConstraint& sc : mp.side_constraints) {
    LpRow row;
    row.sense = sc.sense;
    row.rhs = sc.rhs;
    for (int j = 0; j < n_rules; ++j) {
      double c = sc.coeff(mp.pool[j]);
      if (c != 0.0) {
        row.idx.push_back(j);
        row.val.push_back(c);
      }
    }
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

double reduced_cost(const Rule& rule, const DualVector& duals,
                    const std::vector<SideConstraint>& side_constraints) {
  double dual_sum = duals.mu;
  for (int32_t i : *rule.cover) dual_sum += duals.lambda[i];
  for (size_t m = 0; m < side_constraints.size(); ++m)
    dual_sum += side_constraints[m].coeff(rule) * duals.tau[m];
  return rule.loss - dual_sum;
}

namespace {

struct BnbNode {
  double bound;
  uint64_t seq;       // pop order among equal bounds: smaller first
  std::vector<int8_t> fixing;  // -1 free, 0/1 fixed

  bool operator<(const BnbNode& other) const {
    if (bound != other.bound) return bound > other.bound;  // min-heap by bound
    return seq > other.seq;
  }
};

struct Candidate {
  std::vector<int32_t> selected;
  double objective = kInf;
  bool valid = false;
};

// Objective and feasibility of an integral selection; slack costs included.
Candidate evaluate_selection(const MasterProblem& mp, const std::vector<int32_t>& selected) {
  Candidate cand;
  if (static_cast<int>(selected.size()) > mp.leaf_budget) return cand;
  std::vector<uint8_t> covered(mp.n_samples, 0);
  double obj = 0.0;
  for (int32_t j : selected) {
    for (int32_t i : *mp.pool[j].cover) {
      if (covered[i]) return cand;  // overlap: violates the partition rows
      covered[i] = 1;
    }
    obj += mp.pool[j].loss;
  }
  for (int i = 0; i < mp.n_samples; ++i)
    if (!covered[i]) obj += mp.penalties[i];
  for (const SideConstraint& sc : mp.side_constraints) {
    double lhs = 0.0;
    for (int32_t j : selected) lhs += sc.coeff(mp.pool[j]);
    if (sc.sense == RowSense::ge && lhs < sc.rhs - 1e-9) return cand;
    if (sc.sense == RowSense::le && lhs > sc.rhs + 1e-9) return cand;
    if (sc.sense == RowSense::eq && std::abs(lhs - sc.rhs) > 1e-9) return cand;
  }
  cand.selected = selected;
  cand.objective = obj;
  cand.valid = true;
  return cand;
}

Candidate greedy_incumbent(const MasterProblem& mp) {
  std::vector<int32_t> order(mp.pool.size());
  for (size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int32_t>(j);
  std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    const Rule& ra = mp.pool[a];
    const Rule& rb = mp.pool[b];
    double ka = ra.cover_size() > 0 ? ra.loss / ra.cover_size() : kInf;
    double kb = rb.cover_size() > 0 ? rb.loss / rb.cover_size() : kInf;
    return ka < kb;
  });

  std::vector<uint8_t> covered(mp.n_samples, 0);
  std::vector<int32_t> chosen;
  for (int32_t j : order) {
    if (static_cast<int>(chosen.size()) >= mp.leaf_budget) break;
    bool overlaps = false;
    for (int32_t i : *mp.pool[j].cover)
      if (covered[i]) {
        overlaps = true;
        break;
      }
    if (overlaps) continue;
    chosen.push_back(j);
    for (int32_t i : *mp.pool[j].cover) covered[i] = 1;
  }
  std::sort(chosen.begin(), chosen.end());
  Candidate cand = evaluate_selection(mp, chosen);
  if (!cand.valid) cand = evaluate_selection(mp, {});  // all-slack fallback
  return cand;
}

}  // namespace

MipSolution solve_master_mip(const MasterProblem& mp, const MipOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const int n_rules = static_cast<int>(mp.pool.size());

  LinearProgram base = build_rmp(mp);
  // Explicit unit bounds keep child LPs bounded once variables are fixed.
  base.upper.assign(base.n_vars, kInf);
  for (int j = 0; j < n_rules; ++j) base.upper[j] = 1.0;

  MipSolution out;
  Candidate incumbent = greedy_incumbent(mp);

  std::priority_queue<BnbNode> open;
  uint64_t seq = 0;
  bool root_solved = false;

  BnbNode root;
  root.fixing.assign(n_rules, -1);
  root.seq = seq++;
  root.bound = -kInf;
  open.push(std::move(root));

  while (!open.empty()) {
    if (out.nodes_explored >= options.node_limit) {
      out.hit_node_limit = true;
      break;
    }
    if (elapsed() > options.time_limit_s) {
      out.hit_time_limit = true;
      break;
    }
    BnbNode node = open.top();
    open.pop();
    if (root_solved && node.bound >= incumbent.objective - 1e-9) continue;
    ++out.nodes_explored;

    LinearProgram lp = base;
    for (int j = 0; j < n_rules; ++j) {
      if (node.fixing[j] == 0) lp.upper[j] = 0.0;
      if (node.fixing[j] == 1) lp.lower[j] = 1.0;
    }
    LpSolution sol = solve_lp(lp, options.lp);
    if (sol.status == LpStatus::infeasible) continue;
    if (sol.status == LpStatus::iteration_limit)
      throw std::runtime_error("master mip: node LP hit the iteration limit");
    if (!root_solved) {
      out.bound = sol.objective;
      root_solved = true;
    }
    if (sol.objective >= incumbent.objective - 1e-9) continue;

    // Most fractional z, ties to the larger cover, then lower index.
    int branch = -1;
    double best_frac = -1.0;
    for (int j = 0; j < n_rules; ++j) {
      double z = sol.primal[j];
      if (z <= 1e-6 || z >= 1.0 - 1e-6) continue;
      double score = 0.5 - std::abs(z - 0.5);
      if (branch < 0 || score > best_frac + 1e-12 ||
          (score > best_frac - 1e-12 &&
           mp.pool[j].cover_size() > mp.pool[branch].cover_size())) {
        branch = j;
        best_frac = std::max(best_frac, score);
      }
    }

    if (branch < 0) {
      // Integral: round and record.
      std::vector<int32_t> selected;
      for (int j = 0; j < n_rules; ++j)
        if (sol.primal[j] > 0.5) selected.push_back(j);
      Candidate cand = evaluate_selection(mp, selected);
      if (cand.valid && cand.objective < incumbent.objective - 1e-12) incumbent = cand;
      continue;
    }

    BnbNode one = node;
    one.fixing[branch] = 1;
    one.bound = sol.objective;
    one.seq = seq++;
    BnbNode zero = node;
    zero.fixing[branch] = 0;
    zero.bound = sol.objective;
    zero.seq = seq++;
    open.push(std::move(one));
    open.push(std::move(zero));
  }

  out.selected = incumbent.selected;
  out.objective = incumbent.objective;
  if (!root_solved) out.bound = incumbent.objective;

  std::vector<uint8_t> covered(mp.n_samples, 0);
  for (int32_t j : out.selected)
    for (int32_t i : *mp.pool[j].cover) covered[i] = 1;
  for (int i = 0; i < mp.n_samples; ++i)
    if (!covered[i]) out.slack_samples.push_back(i);

  out.gap = out.objective > 0.0 ? (out.objective - out.bound) / out.objective : 0.0;
  return out;
}

}  // namespace omt
