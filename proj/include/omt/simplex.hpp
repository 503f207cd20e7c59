#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "omt/common.hpp"

namespace omt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { eq, le, ge };

struct LpRow {
  std::vector<int32_t> idx;
  std::vector<double> val;
  RowSense sense = RowSense::eq;
  double rhs = 0.0;
};

// min c'x subject to sparse rows and per-variable bounds, lower >= 0.
struct LinearProgram {
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<double> lower;  // defaults to 0 when empty
  std::vector<double> upper;  // defaults to +inf when empty

  int add_variable(double cost, double lo = 0.0, double hi = kInf);
  void add_row(RowSense sense, double rhs, std::vector<int32_t> idx, std::vector<double> val);
};

enum class LpStatus { optimal, infeasible, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> primal;  // structural variables
  std::vector<double> duals;   // one per row
  double objective = 0.0;
  int iterations = 0;
};

struct SimplexOptions {
  double tol_feas = 1e-7;
  double tol_opt = 1e-6;
  double tol_gap = 1e-6;   // primal/dual agreement asserted by callers and tests
  int iter_limit = 200000;
  int refactor_every = 50;
  int bland_after = 100;   // consecutive degenerate pivots before Bland's rule
};

// Opaque resumable basis. Entries >= 0 name structural variables; entry
// -1-r names the logical variable of row r. Layout-independent, so a basis
// survives appending new columns (they start nonbasic at their lower bound).
struct SimplexBasis {
  std::vector<int32_t> basic;
  std::vector<int32_t> at_upper;
  bool empty() const { return basic.empty(); }
};

// Bounded-variable primal simplex with a dense LU basis and product-form
// updates. Two-phase start; Dantzig pricing with a Bland fallback after a
// degenerate stall. Duals are read from the final basis. A warm basis is
// used when it is still primal feasible under the current bounds, otherwise
// the solver silently cold-starts.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {},
                    const SimplexBasis* warm_start = nullptr,
                    SimplexBasis* final_basis = nullptr);

// Plain-text dump (objective, rows, bounds) for checking an instance by hand.
std::string dump_lp(const LinearProgram& lp);

}  // namespace omt
