#include <cmath>

#include "doctest.h"
#include "omt/master.hpp"
#include "oracles.hpp"

using namespace omt;

namespace {

Rule make_rule(std::vector<int32_t> cover, double loss, int32_t tp = 0, int32_t fp = 0,
               int32_t fn = 0) {
  Rule r;
  r.cover = std::make_shared<std::vector<int32_t>>(std::move(cover));
  r.loss = loss;
  r.length = 1;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  return r;
}

MasterProblem make_master(int n, double penalty, int leaf_budget) {
  MasterProblem mp;
  mp.n_samples = n;
  mp.penalties.assign(n, penalty);
  mp.leaf_budget = leaf_budget;
  return mp;
}

}  // namespace

TEST_CASE("empty pool RMP: slack basis, duals equal penalties") {
  MasterProblem mp = make_master(3, 2.0, 2);
  LinearProgram lp = build_rmp(mp);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(6.0));
  DualVector duals = DualVector::from_lp(sol, 3, 0);
  for (double l : duals.lambda) CHECK(l == doctest::Approx(2.0));
  CHECK(duals.mu == doctest::Approx(0.0));
}

TEST_CASE("one full-cover rule beats slack and is selected") {
  MasterProblem mp = make_master(4, 2.0, 1);
  mp.pool.push_back(make_rule({0, 1, 2, 3}, 1.0));
  LinearProgram lp = build_rmp(mp);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.primal[0] == doctest::Approx(1.0));
}

TEST_CASE("partial cover leaves the uncovered sample to slack") {
  MasterProblem mp = make_master(2, 2.0, 2);
  mp.pool.push_back(make_rule({0}, 0.0));
  LpSolution sol = solve_lp(build_rmp(mp));
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(2.0));  // rule free, one slack at 2
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.primal[2] == doctest::Approx(1.0));  // slack of sample 1
}

TEST_CASE("reduced cost follows the dual formula") {
  DualVector duals;
  duals.lambda = {0.0, 0.5, 0.5};
  duals.mu = -0.2;

  Rule r = make_rule({1, 2}, 1.0);
  CHECK(reduced_cost(r, duals, {}) == doctest::Approx(0.2));

  Rule empty = make_rule({}, 0.0);
  DualVector zero;
  zero.lambda = {0.0, 0.0, 0.0};
  zero.mu = 0.0;
  CHECK(reduced_cost(empty, zero, {}) == doctest::Approx(0.0));

  // One side constraint with coefficient 2 and dual 0.3.
  std::vector<SideConstraint> side(1);
  side[0].kind = SideConstraint::Kind::custom;
  side[0].custom_coeff = [](const Rule&) { return 2.0; };
  duals.tau = {0.3};
  CHECK(reduced_cost(r, duals, side) == doctest::Approx(-0.4));
}

TEST_CASE("f1 linearization coefficients") {
  SideConstraint sc = linearize_f1_constraint(0.8, 1);
  Rule r = make_rule({}, 0.0, 10, 2, 3);
  CHECK(sc.coeff(r) == doctest::Approx(0.0));

  SideConstraint sc2 = linearize_f1_constraint(0.5, 1);
  Rule r2 = make_rule({}, 0.0, 0, 5, 0);
  CHECK(sc2.coeff(r2) == doctest::Approx(-1.25));

  CHECK_THROWS_AS(linearize_f1_constraint(1.5, 1), ConfigError);
  CHECK_THROWS_AS(linearize_f1_constraint(0.0, 1), ConfigError);

  // Aggregate tp=20 fp=4 fn=6 meets delta=0.8 with equality.
  double f1 = 20.0 / (20.0 + 0.5 * (4.0 + 6.0));
  CHECK(f1 == doctest::Approx(0.8));
}

TEST_CASE("three disjoint free rules cover everything at zero cost") {
  MasterProblem mp = make_master(6, 2.0, 3);
  mp.pool.push_back(make_rule({0, 1}, 0.0));
  mp.pool.push_back(make_rule({2, 3}, 0.0));
  mp.pool.push_back(make_rule({4, 5}, 0.0));
  MipSolution sol = solve_master_mip(mp);
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.selected.size() == 3);
  CHECK(sol.slack_samples.empty());
  CHECK(sol.gap == doctest::Approx(0.0));
}

TEST_CASE("leaf budget forces the full-cover rule over the cheap partial one") {
  MasterProblem mp = make_master(4, 2.0, 1);
  mp.pool.push_back(make_rule({0, 1, 2, 3}, 1.0));  // A
  mp.pool.push_back(make_rule({0, 1}, 0.0));        // B
  MipSolution sol = solve_master_mip(mp);
  CHECK(sol.objective == doctest::Approx(1.0));
  REQUIRE(sol.selected.size() == 1);
  CHECK(sol.selected[0] == 0);

  oracle::BruteForceMip bf = oracle::brute_force_mip(mp);
  CHECK(bf.objective == doctest::Approx(sol.objective));
}

TEST_CASE("branch and bound matches brute force on random pools") {
  Rng rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(5));
    const int pool_size = 4 + static_cast<int>(rng.below(12));
    MasterProblem mp = make_master(n, 2.0, 1 + static_cast<int>(rng.below(4)));
    for (int j = 0; j < pool_size; ++j) {
      std::vector<int32_t> cover;
      for (int i = 0; i < n; ++i)
        if (rng.below(3) == 0) cover.push_back(i);
      mp.pool.push_back(make_rule(std::move(cover), rng.uniform() * 2.0));
    }
    MipSolution sol = solve_master_mip(mp);
    oracle::BruteForceMip bf = oracle::brute_force_mip(mp);
    CHECK(std::abs(sol.objective - bf.objective) <= 1e-9);
    CHECK(sol.bound <= sol.objective + 1e-9);
  }
}

TEST_CASE("every sample is covered exactly once or in slack") {
  Rng rng(808);
  MasterProblem mp = make_master(10, 2.0, 3);
  for (int j = 0; j < 10; ++j) {
    std::vector<int32_t> cover;
    for (int i = 0; i < 10; ++i)
      if (rng.below(2) == 0) cover.push_back(i);
    mp.pool.push_back(make_rule(std::move(cover), rng.uniform()));
  }
  MipSolution sol = solve_master_mip(mp);
  std::vector<int> hits(10, 0);
  for (int32_t j : sol.selected)
    for (int32_t i : *mp.pool[j].cover) ++hits[i];
  for (int32_t i : sol.slack_samples) ++hits[i];
  for (int i = 0; i < 10; ++i) CHECK(hits[i] == 1);
}

TEST_CASE("high penalties prefer covering to abandonment") {
  // Two disjoint rules with small losses; penalty 2 x max loss keeps both.
  MasterProblem mp = make_master(4, 2.0, 2);
  mp.pool.push_back(make_rule({0, 1}, 1.0));
  mp.pool.push_back(make_rule({2, 3}, 1.0));
  MipSolution sol = solve_master_mip(mp);
  CHECK(sol.selected.size() == 2);
  CHECK(sol.slack_samples.empty());
}

TEST_CASE("side constraints hold exactly in the integer solution") {
  MasterProblem mp = make_master(4, 2.0, 2);
  mp.pool.push_back(make_rule({0, 1}, 0.0, 2, 0, 0));  // good F1 column
  mp.pool.push_back(make_rule({2, 3}, 0.0, 0, 2, 0));  // pure false positives
  SideConstraint sc = linearize_f1_constraint(0.7, 1);
  mp.side_constraints.push_back(sc);
  MipSolution sol = solve_master_mip(mp);
  double lhs = 0.0;
  for (int32_t j : sol.selected) lhs += sc.coeff(mp.pool[j]);
  CHECK(lhs >= -1e-9);
  // The all-false-positive rule alone would violate the row.
  for (int32_t j : sol.selected) CHECK(j != 1);
}

TEST_CASE("nu_lp bounds nu_ip on a fractional instance") {
  // Classic odd-cycle cover: three pairwise-overlapping rules, LP is 1.5x.
  MasterProblem mp = make_master(3, 10.0, 3);
  mp.pool.push_back(make_rule({0, 1}, 1.0));
  mp.pool.push_back(make_rule({1, 2}, 1.0));
  mp.pool.push_back(make_rule({0, 2}, 1.0));
  MipSolution sol = solve_master_mip(mp);
  CHECK(sol.bound <= sol.objective + 1e-9);
  oracle::BruteForceMip bf = oracle::brute_force_mip(mp);
  CHECK(std::abs(sol.objective - bf.objective) <= 1e-9);
}
