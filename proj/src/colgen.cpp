#include "omt/colgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>

namespace omt {

RuleConfig CgConfig::rule_config(int n_samples) const {
  RuleConfig rc;
  rc.metric = metric;
  rc.max_rule_length = max_rule_length;
  rc.min_support =
      std::max(1, static_cast<int>(std::ceil(min_support_fraction * n_samples)));
  rc.positive_class = positive_class;
  rc.per_path_fairness_delta = per_path_fairness_delta;
  return rc;
}

namespace {

bool rule_less(const Rule& a, double rc_a, const Rule& b, double rc_b) {
  if (rc_a != rc_b) return rc_a < rc_b;
  if (a.length != b.length) return a.length < b.length;
  return a.node_ids < b.node_ids;
}

// Bounded best list ordered by reduced cost; the worst entry sits on top of
// the heap and is evicted first.
class BestList {
 public:
  explicit BestList(size_t cap) : cap_(cap) {}

  bool insert(PricedRule&& entry) {
    if (cap_ == 0) return false;
    if (entries_.size() < cap_) {
      entries_.push_back(std::move(entry));
      std::push_heap(entries_.begin(), entries_.end(), cmp_);
      return true;
    }
    if (!rule_less(entry.rule, entry.rc, entries_.front().rule, entries_.front().rc))
      return false;
    std::pop_heap(entries_.begin(), entries_.end(), cmp_);
    entries_.back() = std::move(entry);
    std::push_heap(entries_.begin(), entries_.end(), cmp_);
    return true;
  }

  std::vector<PricedRule> take_sorted() {
    std::vector<PricedRule> out = std::move(entries_);
    std::sort(out.begin(), out.end(), [](const PricedRule& a, const PricedRule& b) {
      return rule_less(a.rule, a.rc, b.rule, b.rc);
    });
    return out;
  }

  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); entries_.shrink_to_fit(); }

 private:
  static bool worst_on_top(const PricedRule& a, const PricedRule& b) {
    return rule_less(a.rule, a.rc, b.rule, b.rc);
  }
  size_t cap_;
  std::vector<PricedRule> entries_;
  std::function<bool(const PricedRule&, const PricedRule&)> cmp_ = worst_on_top;
};

// Sink accumulator with signature dedup: the same rule completes once per
// trailing SKIP position, so signatures keep each condition set once.
class SinkList {
 public:
  explicit SinkList(size_t cap) : cap_(cap) {}

  void insert(const Rule& rule, double rc) {
    if (signatures_.count(rule.node_ids)) return;
    if (entries_.size() >= cap_) {
      const PricedRule& worst = entries_.front();
      if (!rule_less(rule, rc, worst.rule, worst.rc)) return;
      signatures_.erase(worst.rule.node_ids);
      std::pop_heap(entries_.begin(), entries_.end(), worst_on_top);
      entries_.pop_back();
    }
    signatures_.insert(rule.node_ids);
    entries_.push_back(PricedRule{rule, rc});
    std::push_heap(entries_.begin(), entries_.end(), worst_on_top);
  }

  std::vector<PricedRule> take_sorted() {
    std::vector<PricedRule> out = std::move(entries_);
    std::sort(out.begin(), out.end(), [](const PricedRule& a, const PricedRule& b) {
      return rule_less(a.rule, a.rc, b.rule, b.rc);
    });
    return out;
  }

 private:
  static bool worst_on_top(const PricedRule& a, const PricedRule& b) {
    return rule_less(a.rule, a.rc, b.rule, b.rc);
  }
  size_t cap_;
  std::vector<PricedRule> entries_;
  std::set<std::vector<int32_t>> signatures_;
};

}  // namespace

std::vector<PricedRule> ksp(const FeatureGraph& graph, const BinnedDataset& dataset,
                            const DualVector& duals, const CgConfig& config,
                            const std::vector<SideConstraint>& side_constraints) {
  const RuleConfig rule_cfg = config.rule_config(dataset.n_samples);
  const size_t K = static_cast<size_t>(std::max(1, config.K));

  auto rc_of = [&](const Rule& rule) { return reduced_cost(rule, duals, side_constraints); };

  const int32_t n_nodes = static_cast<int32_t>(graph.nodes().size());
  std::vector<BestList> lists(n_nodes, BestList(K));
  SinkList sink(K);

  {
    Rule root = root_rule(dataset, rule_cfg);
    double rc = rc_of(root);
    lists[graph.source_id()].insert(PricedRule{std::move(root), rc});
  }

  for (int32_t t = 0; t < n_nodes; ++t) {
    if (lists[t].empty()) continue;
    std::vector<PricedRule> partials = lists[t].take_sorted();
    lists[t].clear();

    const int next_layer = graph.next_layer_of(t);
    const Layer* layer = next_layer < graph.n_layers() ? &graph.layers()[next_layer] : nullptr;

    for (PricedRule& p : partials) {
      // A partial path is already a complete rule (remaining layers SKIP).
      if (p.rc < 0.0 && passes_path_fairness(p.rule, dataset, rule_cfg))
        sink.insert(p.rule, p.rc);
      if (!layer) continue;
      for (int i = 0; i < layer->count; ++i) {
        const GraphNode& child = graph.node(layer->first_node + i);
        if (child.is_skip) {
          lists[child.id].insert(PricedRule{p.rule, p.rc});
          continue;
        }
        std::optional<Rule> extended = extend(p.rule, child, dataset, graph, rule_cfg);
        if (!extended) continue;
        double rc = rc_of(*extended);
        lists[child.id].insert(PricedRule{std::move(*extended), rc});
      }
    }
  }

  std::vector<PricedRule> out = sink.take_sorted();
  out.erase(std::remove_if(out.begin(), out.end(),
                           [&](const PricedRule& p) { return p.rc >= -config.dual_tolerance; }),
            out.end());
  return out;
}

std::vector<double> default_penalties(const BinnedDataset& dataset, MetricKind metric) {
  const int n = dataset.n_samples;
  std::vector<double> c(n, 2.0);
  if (metric == MetricKind::misclassification) return c;

  double mean = 0.0;
  for (double v : dataset.y) mean += v;
  mean /= std::max(1, n);
  if (metric == MetricKind::squared_error) {
    double worst = 0.0;
    for (double v : dataset.y) worst = std::max(worst, (v - mean) * (v - mean));
    c.assign(n, std::max(1e-6, 2.0 * worst));
  } else {
    std::vector<double> ys = dataset.y;
    std::sort(ys.begin(), ys.end());
    double med = n == 0 ? 0.0 : (n % 2 ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]));
    double worst = 0.0;
    for (double v : dataset.y) worst = std::max(worst, std::abs(v - med));
    c.assign(n, std::max(1e-6, 2.0 * worst));
  }
  return c;
}

namespace {

int log_level() {
  const char* env = std::getenv("OMT_LOG");
  if (!env) return 0;
  std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

}  // namespace

CgResult run_cg(const FeatureGraph& graph, const BinnedDataset& dataset,
                const CgConfig& config, std::vector<SideConstraint> side_constraints,
                std::vector<double> penalties) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_s = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const int verbosity = log_level();

  CgResult result;
  MasterProblem& mp = result.master;
  mp.n_samples = dataset.n_samples;
  mp.leaf_budget = config.leaf_budget;
  mp.penalties = std::move(penalties);
  mp.side_constraints = std::move(side_constraints);
  if (static_cast<int>(mp.penalties.size()) != dataset.n_samples)
    throw ConfigError("penalty vector size does not match the dataset");

  CgReport& report = result.report;
  report.converged_by = CgStop::iteration_limit;

  SimplexBasis basis;
  std::set<std::vector<int32_t>> pool_signatures;
  double prev_objective = kInf;
  int stall_count = 0;

  auto solve_rmp = [&](bool warm) {
    LinearProgram lp = build_rmp(mp);
    LpSolution sol = solve_lp(lp, config.lp, warm ? &basis : nullptr, &basis);
    if (sol.status != LpStatus::optimal)
      throw std::runtime_error("column generation aborted: RMP solve returned " +
                               std::string(sol.status == LpStatus::infeasible
                                               ? "infeasible"
                                               : "iteration_limit"));
    return sol;
  };

  LpSolution sol = solve_rmp(false);
  report.nu_lp = sol.objective;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    if (elapsed_s() > config.time_limit_s) {
      report.converged_by = CgStop::iteration_limit;
      break;
    }

    DualVector duals =
        DualVector::from_lp(sol, dataset.n_samples, static_cast<int>(mp.side_constraints.size()));
    std::vector<PricedRule> priced = ksp(graph, dataset, duals, config, mp.side_constraints);
    ++report.iterations_run;

    if (priced.empty()) {
      report.converged_by = CgStop::dual_feasible;
      break;
    }

    int added = 0;
    bool pool_full = false;
    for (PricedRule& p : priced) {
      if (static_cast<int>(mp.pool.size()) >= config.max_columns) {
        pool_full = true;
        break;
      }
      if (!pool_signatures.insert(p.rule.node_ids).second) continue;
      mp.pool.push_back(std::move(p.rule));
      ++added;
    }
    report.columns_generated += added;

    CgIterationLog log;
    log.iteration = report.iterations_run;
    log.rmp_objective = sol.objective;
    log.min_reduced_cost = priced.front().rc;
    log.columns_added = added;
    log.pool_size = static_cast<int>(mp.pool.size());
    log.elapsed_ms = elapsed_s() * 1000.0;
    report.per_iteration.push_back(log);
    if (verbosity >= 1)
      std::fprintf(stderr, "iter=%d rmp_obj=%.6f min_rc=%.6g cols_added=%d pool_size=%d elapsed_ms=%.0f\n",
                   log.iteration, log.rmp_objective, log.min_reduced_cost, log.columns_added,
                   log.pool_size, log.elapsed_ms);

    if (pool_full) {
      report.converged_by = CgStop::column_limit;
      sol = solve_rmp(true);
      break;
    }
    if (added == 0) {
      // Everything priced was already pooled; the duals cannot move.
      report.converged_by = CgStop::stalled;
      break;
    }

    sol = solve_rmp(true);
    if (prev_objective - sol.objective < config.stall_epsilon) {
      if (++stall_count >= config.stall_window) {
        report.converged_by = CgStop::stalled;
        break;
      }
    } else {
      stall_count = 0;
    }
    prev_objective = sol.objective;
  }

  report.nu_lp = sol.objective;

  MipOptions mip_options;
  mip_options.lp = config.lp;
  mip_options.node_limit = config.mip_node_limit;
  mip_options.time_limit_s = std::max(1.0, config.time_limit_s - elapsed_s());
  result.mip = solve_master_mip(mp, mip_options);

  report.nu_ip = result.mip.objective;
  report.gap = report.nu_ip > 0.0 ? (report.nu_ip - report.nu_lp) / report.nu_ip : 0.0;
  if (verbosity >= 1)
    std::fprintf(stderr, "cg done: nu_lp=%.6f nu_ip=%.6f gap=%.4f%% pool=%zu\n", report.nu_lp,
                 report.nu_ip, report.gap * 100.0, mp.pool.size());
  return result;
}

}  // namespace omt
