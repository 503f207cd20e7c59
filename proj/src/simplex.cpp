#include "omt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace omt {

int LinearProgram::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return n_vars++;
}

void LinearProgram::add_row(RowSense sense, double rhs, std::vector<int32_t> idx,
                            std::vector<double> val) {
  LpRow row;
  row.sense = sense;
  row.rhs = rhs;
  row.idx = std::move(idx);
  row.val = std::move(val);
  rows.push_back(std::move(row));
}

namespace {

constexpr double kTolPivot = 1e-9;

enum VarStatus : uint8_t { AT_LO, AT_UP, BASIC };

// Internal augmented layout: [0,n) structural, [n,n+m) logicals (one per
// row, coefficient +1), [n+m,n+2m) artificials (phase 1 only).
class Solver {
 public:
  Solver(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.n_vars;
    m_ = static_cast<int>(lp.rows.size());
    n_aug_ = n_ + 2 * m_;

    cols_.resize(n_aug_);
    for (int r = 0; r < m_; ++r) {
      const LpRow& row = lp.rows[r];
      for (size_t k = 0; k < row.idx.size(); ++k) {
        int j = row.idx[k];
        if (j < 0 || j >= n_) throw ConfigError("lp row references variable out of range");
        cols_[j].push_back({r, row.val[k]});
      }
    }
    lo_.assign(n_aug_, 0.0);
    up_.assign(n_aug_, 0.0);
    cost_.assign(n_aug_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.lower.empty() ? 0.0 : lp.lower[j];
      up_[j] = lp.upper.empty() ? kInf : lp.upper[j];
      cost_[j] = lp.objective[j];
      if (lo_[j] > up_[j] + 1e-15) throw ConfigError("variable with lower bound above upper");
    }
    b_.resize(m_);
    for (int r = 0; r < m_; ++r) {
      b_[r] = lp.rows[r].rhs;
      int logical = n_ + r;
      cols_[logical].push_back({r, 1.0});
      switch (lp.rows[r].sense) {
        case RowSense::eq: lo_[logical] = up_[logical] = 0.0; break;
        case RowSense::le: lo_[logical] = 0.0; up_[logical] = kInf; break;
        case RowSense::ge: lo_[logical] = -kInf; up_[logical] = 0.0; break;
      }
      // Artificials are pinned until phase 1 opens the ones it needs.
      int art = n_ + m_ + r;
      cols_[art].push_back({r, 1.0});
      lo_[art] = up_[art] = 0.0;
    }
  }

  LpSolution run(const SimplexBasis* warm, SimplexBasis* out) {
    LpSolution sol;
    bool warm_ok = warm && !warm->empty() && load_basis(*warm);
    if (!warm_ok) {
      if (!cold_start()) {
        // Phase 1 required.
        std::vector<double> saved_cost = cost_;
        for (int j = 0; j < n_aug_; ++j) cost_[j] = j >= n_ + m_ ? 1.0 : 0.0;
        LpStatus st = optimize(sol.iterations);
        double infeas = objective_value();
        cost_ = saved_cost;
        if (st == LpStatus::iteration_limit) {
          finish(sol, LpStatus::iteration_limit, out);
          return sol;
        }
        if (infeas > opt_.tol_feas * 10.0) {
          finish(sol, LpStatus::infeasible, out);
          return sol;
        }
        drive_out_artificials();
        for (int r = 0; r < m_; ++r) lo_[n_ + m_ + r] = up_[n_ + m_ + r] = 0.0;
        refactor();
      }
    }
    LpStatus st = optimize(sol.iterations);
    finish(sol, st, out);
    return sol;
  }

 private:
  struct Entry {
    int row;
    double val;
  };
  struct Eta {
    int row;
    std::vector<double> d;
  };

  const LinearProgram& lp_;
  const SimplexOptions& opt_;
  int n_ = 0, m_ = 0, n_aug_ = 0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> lo_, up_, cost_, b_;

  std::vector<int32_t> basic_;       // var per row
  std::vector<uint8_t> vstat_;       // per augmented var
  std::vector<double> xb_;           // basic values per row
  std::vector<double> lu_;           // m*m row-major LU in place
  std::vector<int32_t> perm_;        // row permutation of the LU
  std::vector<Eta> etas_;
  int pivots_since_refactor_ = 0;
  int degenerate_streak_ = 0;

  double nb_value(int j) const { return vstat_[j] == AT_UP ? up_[j] : lo_[j]; }

  // --- factorization -------------------------------------------------

  bool factor() {
    lu_.assign(static_cast<size_t>(m_) * m_, 0.0);
    perm_.resize(m_);
    for (int r = 0; r < m_; ++r) perm_[r] = r;
    for (int c = 0; c < m_; ++c)
      for (const Entry& e : cols_[basic_[c]]) lu_[static_cast<size_t>(e.row) * m_ + c] = e.val;

    for (int k = 0; k < m_; ++k) {
      int piv = k;
      double best = std::abs(lu_[static_cast<size_t>(perm_[k]) * m_ + k]);
      for (int r = k + 1; r < m_; ++r) {
        double v = std::abs(lu_[static_cast<size_t>(perm_[r]) * m_ + k]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-12) return false;  // singular basis
      std::swap(perm_[k], perm_[piv]);
      double* pk = &lu_[static_cast<size_t>(perm_[k]) * m_];
      for (int r = k + 1; r < m_; ++r) {
        double* pr = &lu_[static_cast<size_t>(perm_[r]) * m_];
        double f = pr[k] / pk[k];
        pr[k] = f;
        if (f == 0.0) continue;
        for (int c = k + 1; c < m_; ++c) pr[c] -= f * pk[c];
      }
    }
    etas_.clear();
    pivots_since_refactor_ = 0;
    return true;
  }

  // z = B^-1 v
  void ftran(std::vector<double>& z) const {
    std::vector<double> w(m_);
    for (int r = 0; r < m_; ++r) w[r] = z[perm_[r]];
    for (int r = 1; r < m_; ++r) {
      const double* pr = &lu_[static_cast<size_t>(perm_[r]) * m_];
      double s = w[r];
      for (int c = 0; c < r; ++c) s -= pr[c] * w[c];
      w[r] = s;
    }
    for (int r = m_ - 1; r >= 0; --r) {
      const double* pr = &lu_[static_cast<size_t>(perm_[r]) * m_];
      double s = w[r];
      for (int c = r + 1; c < m_; ++c) s -= pr[c] * w[c];
      w[r] = s / pr[r];
    }
    z = std::move(w);
    for (const Eta& e : etas_) {
      double zr = z[e.row] / e.d[e.row];
      for (int i = 0; i < m_; ++i) z[i] -= e.d[i] * zr;
      z[e.row] = zr;
    }
  }

  // y with B^T y = v
  void btran(std::vector<double>& y) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const Eta& e = *it;
      double s = y[e.row];
      for (int i = 0; i < m_; ++i)
        if (i != e.row) s -= e.d[i] * y[i];
      y[e.row] = s / e.d[e.row];
    }
    std::vector<double> w(m_);
    // Solve U^T w = y
    for (int r = 0; r < m_; ++r) {
      const double s = y[r];
      double acc = s;
      for (int c = 0; c < r; ++c) acc -= lu_[static_cast<size_t>(perm_[c]) * m_ + r] * w[c];
      w[r] = acc / lu_[static_cast<size_t>(perm_[r]) * m_ + r];
    }
    // Solve L^T z = w
    for (int r = m_ - 1; r >= 0; --r) {
      double acc = w[r];
      for (int c = r + 1; c < m_; ++c) acc -= lu_[static_cast<size_t>(perm_[c]) * m_ + r] * w[c];
      w[r] = acc;
    }
    y.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) y[perm_[r]] = w[r];
  }

  void compute_xb() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < n_aug_; ++j) {
      if (vstat_[j] == BASIC) continue;
      double v = nb_value(j);
      if (v == 0.0) continue;
      for (const Entry& e : cols_[j]) rhs[e.row] -= e.val * v;
    }
    ftran(rhs);
    xb_ = std::move(rhs);
  }

  void refactor() {
    if (!factor()) throw std::runtime_error("simplex: singular basis during refactorization");
    compute_xb();
  }

  // --- starting bases -------------------------------------------------

  bool load_basis(const SimplexBasis& basis) {
    if (static_cast<int>(basis.basic.size()) != m_) return false;
    basic_.assign(m_, -1);
    vstat_.assign(n_aug_, AT_LO);
    for (int j = 0; j < n_aug_; ++j)
      if (lo_[j] == -kInf) vstat_[j] = AT_UP;
    std::vector<bool> used(n_aug_, false);
    for (int r = 0; r < m_; ++r) {
      int32_t enc = basis.basic[r];
      int j = enc >= 0 ? enc : n_ + (-1 - enc);
      if (enc >= 0 && enc >= n_) return false;
      if (enc < 0 && (-1 - enc) >= m_) return false;
      if (used[j]) return false;
      used[j] = true;
      basic_[r] = j;
      vstat_[j] = BASIC;
    }
    for (int32_t enc : basis.at_upper) {
      int j = enc >= 0 ? enc : n_ + (-1 - enc);
      if (j < 0 || j >= n_ + m_ || vstat_[j] == BASIC) continue;
      if (up_[j] < kInf) vstat_[j] = AT_UP;
    }
    if (!factor()) return false;
    compute_xb();
    for (int r = 0; r < m_; ++r) {
      int j = basic_[r];
      if (xb_[r] < lo_[j] - opt_.tol_feas || xb_[r] > up_[j] + opt_.tol_feas) return false;
    }
    return true;
  }

  // Logical start basis. Returns true when already primal feasible.
  bool cold_start() {
    basic_.assign(m_, -1);
    vstat_.assign(n_aug_, AT_LO);
    for (int j = 0; j < n_aug_; ++j)
      if (lo_[j] == -kInf) vstat_[j] = AT_UP;

    std::vector<double> residual = b_;
    for (int j = 0; j < n_; ++j) {
      double v = nb_value(j);
      if (v == 0.0) continue;
      for (const Entry& e : cols_[j]) residual[e.row] -= e.val * v;
    }
    bool feasible = true;
    for (int r = 0; r < m_; ++r) {
      int logical = n_ + r;
      if (residual[r] >= lo_[logical] - opt_.tol_feas &&
          residual[r] <= up_[logical] + opt_.tol_feas) {
        basic_[r] = logical;
        vstat_[logical] = BASIC;
      } else {
        feasible = false;
        int art = n_ + m_ + r;
        // Park the logical at its bound nearest the residual, let the
        // artificial absorb the rest with a nonnegative value.
        double parked;
        if (residual[r] > up_[logical]) {
          vstat_[logical] = up_[logical] < kInf ? AT_UP : AT_LO;
          parked = nb_value(logical);
        } else {
          vstat_[logical] = lo_[logical] > -kInf ? AT_LO : AT_UP;
          parked = nb_value(logical);
        }
        double rest = residual[r] - parked;
        cols_[art][0].val = rest >= 0.0 ? 1.0 : -1.0;
        lo_[art] = 0.0;
        up_[art] = kInf;
        basic_[r] = art;
        vstat_[art] = BASIC;
      }
    }
    refactor();
    return feasible;
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basic_[r] < n_ + m_) continue;
      // Any real column with a usable pivot element in this row replaces the
      // artificial; otherwise the row is redundant and the artificial stays
      // pinned at zero.
      std::vector<double> er(m_, 0.0);
      er[r] = 1.0;
      btran(er);
      for (int j = 0; j < n_ + m_; ++j) {
        if (vstat_[j] == BASIC || lo_[j] == up_[j]) continue;
        double piv = 0.0;
        for (const Entry& e : cols_[j]) piv += er[e.row] * e.val;
        if (std::abs(piv) > 1e-7) {
          std::vector<double> d(m_, 0.0);
          for (const Entry& e : cols_[j]) d[e.row] += e.val;
          ftran(d);
          apply_pivot(j, r, d, 0.0, vstat_[j] == AT_UP ? -1.0 : 1.0);
          break;
        }
      }
    }
  }

  // --- pivoting --------------------------------------------------------

  void apply_pivot(int entering, int row, const std::vector<double>& d, double t, double sigma) {
    int leaving = basic_[row];
    for (int i = 0; i < m_; ++i) xb_[i] -= sigma * d[i] * t;
    double enter_val = nb_value(entering) + sigma * t;
    vstat_[leaving] = sigma * d[row] > 0.0 ? AT_LO : AT_UP;
    if (lo_[leaving] == up_[leaving]) vstat_[leaving] = AT_LO;
    if (lo_[leaving] == -kInf && vstat_[leaving] == AT_LO) vstat_[leaving] = AT_UP;
    basic_[row] = entering;
    vstat_[entering] = BASIC;
    xb_[row] = enter_val;

    Eta eta;
    eta.row = row;
    eta.d = d;
    etas_.push_back(std::move(eta));
    if (++pivots_since_refactor_ >= opt_.refactor_every) refactor();
  }

  double objective_value() const {
    double obj = 0.0;
    for (int j = 0; j < n_aug_; ++j)
      if (vstat_[j] != BASIC) obj += cost_[j] * nb_value(j);
    for (int r = 0; r < m_; ++r) obj += cost_[basic_[r]] * xb_[r];
    return obj;
  }

  LpStatus optimize(int& iterations) {
    bool final_check_done = false;
    while (true) {
      if (iterations >= opt_.iter_limit) return LpStatus::iteration_limit;

      std::vector<double> y(m_);
      for (int r = 0; r < m_; ++r) y[r] = cost_[basic_[r]];
      btran(y);

      const bool bland = degenerate_streak_ >= opt_.bland_after;
      int entering = -1;
      double best_score = opt_.tol_opt;
      double entering_sigma = 1.0;
      for (int j = 0; j < n_aug_; ++j) {
        if (vstat_[j] == BASIC || lo_[j] == up_[j]) continue;
        double rc = cost_[j];
        for (const Entry& e : cols_[j]) rc -= y[e.row] * e.val;
        double score;
        double sigma;
        if (vstat_[j] == AT_LO) {
          score = -rc;
          sigma = 1.0;
        } else {
          score = rc;
          sigma = -1.0;
        }
        if (score > best_score) {
          entering = j;
          entering_sigma = sigma;
          if (bland) break;
          best_score = score;
        }
      }

      if (entering < 0) {
        if (!final_check_done && !etas_.empty()) {
          refactor();  // refresh numerics, then confirm optimality once
          final_check_done = true;
          continue;
        }
        return LpStatus::optimal;
      }
      final_check_done = false;

      std::vector<double> d(m_, 0.0);
      for (const Entry& e : cols_[entering]) d[e.row] += e.val;
      ftran(d);

      // Ratio test. sigma*d is the rate at which basics decrease.
      double t_max = up_[entering] - lo_[entering];  // bound flip span
      int leave_row = -1;
      double leave_piv = 0.0;
      double t_best = kInf;
      for (int r = 0; r < m_; ++r) {
        double rate = entering_sigma * d[r];
        int k = basic_[r];
        double t;
        if (rate > kTolPivot) {
          if (lo_[k] == -kInf) continue;
          t = (xb_[r] - lo_[k]) / rate;
        } else if (rate < -kTolPivot) {
          if (up_[k] == kInf) continue;
          t = (up_[k] - xb_[r]) / -rate;
        } else {
          continue;
        }
        if (t < -1e-9) t = 0.0;
        t = std::max(t, 0.0);
        if (t < t_best - 1e-12 ||
            (t < t_best + 1e-12 &&
             (leave_row < 0 || std::abs(d[r]) > std::abs(leave_piv) + 1e-15))) {
          t_best = t;
          leave_row = r;
          leave_piv = d[r];
        }
      }

      ++iterations;
      if (t_max < t_best - 1e-12) {
        if (t_max == kInf) throw std::runtime_error("simplex: unbounded direction");
        // Bound flip: entering moves across to its other bound.
        for (int i = 0; i < m_; ++i) xb_[i] -= entering_sigma * d[i] * t_max;
        vstat_[entering] = vstat_[entering] == AT_LO ? AT_UP : AT_LO;
        degenerate_streak_ = 0;
        continue;
      }
      if (leave_row < 0) throw std::runtime_error("simplex: unbounded direction");
      degenerate_streak_ = t_best <= 1e-9 ? degenerate_streak_ + 1 : 0;
      apply_pivot(entering, leave_row, d, t_best, entering_sigma);
    }
  }

  void finish(LpSolution& sol, LpStatus status, SimplexBasis* out) {
    sol.status = status;
    sol.primal.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j)
      if (vstat_[j] != BASIC) sol.primal[j] = nb_value(j);
    for (int r = 0; r < m_; ++r)
      if (basic_[r] < n_) sol.primal[basic_[r]] = xb_[r];

    std::vector<double> y(m_);
    for (int r = 0; r < m_; ++r) y[r] = cost_[basic_[r]];
    btran(y);
    sol.duals = std::move(y);

    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp_.objective[j] * sol.primal[j];
    sol.objective = obj;

    if (out) {
      out->basic.clear();
      out->at_upper.clear();
      for (int r = 0; r < m_; ++r) {
        int j = basic_[r];
        if (j < n_)
          out->basic.push_back(j);
        else if (j < n_ + m_)
          out->basic.push_back(-1 - (j - n_));
        else
          out->basic.push_back(-1 - (j - n_ - m_));  // redundant row: report its logical
      }
      for (int j = 0; j < n_ + m_; ++j)
        if (vstat_[j] == AT_UP && up_[j] < kInf)
          out->at_upper.push_back(j < n_ ? j : -1 - (j - n_));
    }
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options,
                    const SimplexBasis* warm_start, SimplexBasis* final_basis) {
  if (static_cast<int>(lp.objective.size()) != lp.n_vars)
    throw ConfigError("lp objective size does not match n_vars");
  if (!lp.lower.empty() && static_cast<int>(lp.lower.size()) != lp.n_vars)
    throw ConfigError("lp lower bound size does not match n_vars");
  if (!lp.upper.empty() && static_cast<int>(lp.upper.size()) != lp.n_vars)
    throw ConfigError("lp upper bound size does not match n_vars");

  if (lp.rows.empty()) {
    // Pure bound problem.
    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.primal.resize(lp.n_vars);
    for (int j = 0; j < lp.n_vars; ++j) {
      double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
      double hi = lp.upper.empty() ? kInf : lp.upper[j];
      if (lp.objective[j] < 0.0) {
        if (hi == kInf) throw std::runtime_error("simplex: unbounded direction");
        sol.primal[j] = hi;
      } else {
        sol.primal[j] = lo;
      }
      sol.objective += lp.objective[j] * sol.primal[j];
    }
    if (final_basis) *final_basis = SimplexBasis{};
    return sol;
  }

  Solver solver(lp, options);
  return solver.run(warm_start, final_basis);
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream os;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  os << "min:";
  for (int j = 0; j < lp.n_vars; ++j)
    if (lp.objective[j] != 0.0) os << " " << num(lp.objective[j]) << " x" << j << " +";
  os << " 0\n";
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    const LpRow& row = lp.rows[r];
    os << "r" << r << ":";
    for (size_t k = 0; k < row.idx.size(); ++k)
      os << " " << num(row.val[k]) << " x" << row.idx[k] << (k + 1 < row.idx.size() ? " +" : "");
    os << (row.sense == RowSense::eq ? " = " : row.sense == RowSense::le ? " <= " : " >= ")
       << num(row.rhs) << "\n";
  }
  os << "bounds:\n";
  for (int j = 0; j < lp.n_vars; ++j) {
    double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
    double hi = lp.upper.empty() ? kInf : lp.upper[j];
    os << "  " << num(lo) << " <= x" << j << " <= " << (hi == kInf ? "inf" : num(hi)) << "\n";
  }
  return os.str();
}

}  // namespace omt
