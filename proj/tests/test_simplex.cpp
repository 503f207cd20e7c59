#include <cmath>

#include "doctest.h"
#include "omt/simplex.hpp"
#include "oracles.hpp"

using namespace omt;

namespace {

// Random feasible bounded LP: interior point by construction, finite boxes.
LinearProgram random_lp(Rng& rng, int max_vars = 6, int max_rows = 5) {
  const int n = 2 + static_cast<int>(rng.below(max_vars - 1));
  const int m = 1 + static_cast<int>(rng.below(max_rows));
  LinearProgram lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    double hi = 1.0 + rng.uniform() * 9.0;
    lp.add_variable(-5.0 + rng.uniform() * 10.0, 0.0, hi);
    x0[j] = rng.uniform() * hi;
  }
  for (int r = 0; r < m; ++r) {
    std::vector<int32_t> idx;
    std::vector<double> val;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.below(3) == 0) continue;
      double a = -3.0 + rng.uniform() * 6.0;
      idx.push_back(j);
      val.push_back(a);
      act += a * x0[j];
    }
    if (idx.empty()) {
      idx.push_back(static_cast<int32_t>(rng.below(n)));
      val.push_back(1.0);
      act = x0[idx[0]];
    }
    switch (rng.below(3)) {
      case 0: lp.add_row(RowSense::le, act + rng.uniform() * 2.0, idx, val); break;
      case 1: lp.add_row(RowSense::ge, act - rng.uniform() * 2.0, idx, val); break;
      default: lp.add_row(RowSense::eq, act, idx, val); break;
    }
  }
  return lp;
}

double primal_infeasibility(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (const LpRow& row : lp.rows) {
    double lhs = 0.0;
    for (size_t k = 0; k < row.idx.size(); ++k) lhs += row.val[k] * x[row.idx[k]];
    switch (row.sense) {
      case RowSense::eq: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
      case RowSense::le: worst = std::max(worst, lhs - row.rhs); break;
      case RowSense::ge: worst = std::max(worst, row.rhs - lhs); break;
    }
  }
  for (int j = 0; j < lp.n_vars; ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    if (lp.upper[j] < kInf) worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

// Dual objective including bound contributions, for the strong-duality check.
double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  double obj = 0.0;
  for (size_t r = 0; r < lp.rows.size(); ++r) obj += sol.duals[r] * lp.rows[r].rhs;
  for (int j = 0; j < lp.n_vars; ++j) {
    double rc = lp.objective[j];
    for (size_t r = 0; r < lp.rows.size(); ++r) {
      const LpRow& row = lp.rows[r];
      for (size_t k = 0; k < row.idx.size(); ++k)
        if (row.idx[k] == j) rc -= sol.duals[r] * row.val[k];
    }
    // Reduced cost pairs with the active bound.
    if (rc > 0.0)
      obj += rc * lp.lower[j];
    else if (lp.upper[j] < kInf)
      obj += rc * lp.upper[j];
  }
  return obj;
}

}  // namespace

TEST_CASE("maximize x subject to x <= 1 via min -x") {
  LinearProgram lp;
  lp.add_variable(-1.0, 0.0, 10.0);
  lp.add_row(RowSense::le, 1.0, {0}, {1.0});
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("slack-only partition LP pins duals at the penalties") {
  // min 2 s0 + 2 s1 + 2 s2 subject to s_i = 1.
  LinearProgram lp;
  for (int i = 0; i < 3; ++i) lp.add_variable(2.0);
  for (int i = 0; i < 3; ++i) lp.add_row(RowSense::eq, 1.0, {i}, {1.0});
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(6.0));
  for (int i = 0; i < 3; ++i) {
    CHECK(sol.primal[i] == doctest::Approx(1.0));
    CHECK(sol.duals[i] == doctest::Approx(2.0));
  }
}

TEST_CASE("infeasible system is detected") {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 1.0);
  lp.add_row(RowSense::ge, 5.0, {0}, {1.0});
  CHECK(solve_lp(lp).status == LpStatus::infeasible);
}

TEST_CASE("equality rows force phase 1 and still solve") {
  // min x0 + x1 s.t. x0 + x1 = 2, x0 - x1 = 0 -> x = (1,1).
  LinearProgram lp;
  lp.add_variable(1.0);
  lp.add_variable(1.0);
  lp.add_row(RowSense::eq, 2.0, {0, 1}, {1.0, 1.0});
  lp.add_row(RowSense::eq, 0.0, {0, 1}, {1.0, -1.0});
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.primal[1] == doctest::Approx(1.0));
}

TEST_CASE("random LPs match the vertex-enumeration oracle") {
  Rng rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    LinearProgram lp = random_lp(rng);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);  // feasible by construction
    double oracle_obj = oracle::vertex_enumeration_min(lp);
    CHECK(std::abs(sol.objective - oracle_obj) <= 1e-7);
    ++solved;
  }
  CHECK(solved == 50);
}

TEST_CASE("strong duality and complementary slackness on random instances") {
  Rng rng(5150);
  for (int trial = 0; trial < 50; ++trial) {
    LinearProgram lp = random_lp(rng);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(primal_infeasibility(lp, sol.primal) <= 1e-7);
    CHECK(std::abs(sol.objective - dual_objective(lp, sol)) <= 1e-7);

    // Interior variables have vanishing reduced cost.
    for (int j = 0; j < lp.n_vars; ++j) {
      double lo = lp.lower[j], hi = lp.upper[j];
      if (sol.primal[j] > lo + 1e-6 && sol.primal[j] < hi - 1e-6) {
        double rc = lp.objective[j];
        for (size_t r = 0; r < lp.rows.size(); ++r)
          for (size_t k = 0; k < lp.rows[r].idx.size(); ++k)
            if (lp.rows[r].idx[k] == j) rc -= sol.duals[r] * lp.rows[r].val[k];
        CHECK(std::abs(rc) <= 1e-6);
      }
    }
  }
}

TEST_CASE("re-solving from scratch reproduces the objective exactly") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    LinearProgram lp = random_lp(rng);
    LpSolution a = solve_lp(lp);
    LpSolution b = solve_lp(lp);
    REQUIRE(a.status == LpStatus::optimal);
    CHECK(std::abs(a.objective - b.objective) <= 1e-9);
  }
}

TEST_CASE("warm start from the optimal basis reproduces the solve") {
  Rng rng(47);
  LinearProgram lp = random_lp(rng, 6, 4);
  SimplexBasis basis;
  LpSolution cold = solve_lp(lp, {}, nullptr, &basis);
  REQUIRE(cold.status == LpStatus::optimal);

  // Append a useless expensive column; the old basis stays optimal.
  lp.add_variable(1000.0, 0.0, 5.0);
  LpSolution warm = solve_lp(lp, {}, &basis, nullptr);
  REQUIRE(warm.status == LpStatus::optimal);
  CHECK(warm.objective == doctest::Approx(cold.objective));
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("iteration limit reports and returns the best iterate") {
  Rng rng(99);
  LinearProgram lp = random_lp(rng, 6, 5);
  SimplexOptions opt;
  opt.iter_limit = 1;
  LpSolution sol = solve_lp(lp, opt);
  CHECK(sol.status == LpStatus::iteration_limit);
}

TEST_CASE("dump_lp emits objective, rows, and bounds") {
  LinearProgram lp;
  lp.add_variable(2.0, 0.0, 1.0);
  lp.add_row(RowSense::le, 3.0, {0}, {1.5});
  std::string text = dump_lp(lp);
  CHECK(text.find("min:") != std::string::npos);
  CHECK(text.find("r0:") != std::string::npos);
  CHECK(text.find("bounds:") != std::string::npos);
  CHECK(text.find("1.5 x0 <= 3") != std::string::npos);
}
