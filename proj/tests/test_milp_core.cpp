#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <random>
#include <sstream>

#include "lanegame/logic_compiler.hpp"
#include "lanegame/milp_solver.hpp"
#include "oracle_utils.hpp"

using namespace lanegame;
using lanegame::testing::lp_vertex_oracle;
using lanegame::testing::milp_enum_oracle;

namespace {

MilpInstance random_lp(std::mt19937& rng) {
  MilpInstance inst;
  std::uniform_int_distribution<int> nd(2, 5), md(1, 6), cd(-3, 3), costd(-5, 5);
  std::uniform_real_distribution<double> bd(0.5, 10.0);
  const int n = nd(rng), m = md(rng);
  for (int j = 0; j < n; ++j) {
    const double lo = -bd(rng), hi = bd(rng);
    inst.add_var(VarKind::Continuous, lo, hi);
    inst.objective.add(j, static_cast<double>(costd(rng)));
  }
  for (int r = 0; r < m; ++r) {
    LinearExpr e;
    for (int j = 0; j < n; ++j) {
      const int c = cd(rng);
      if (c != 0) e.add(j, static_cast<double>(c));
    }
    const double rhs = std::uniform_real_distribution<double>(-6.0, 12.0)(rng);
    inst.add_row(e, rhs);
  }
  return inst;
}

MilpInstance random_milp(std::mt19937& rng) {
  MilpInstance inst;
  std::uniform_int_distribution<int> nint_d(1, 12), ncont_d(0, 10), md(2, 10),
      cd(-3, 3), costd(-5, 5);
  const int n_int = nint_d(rng), n_cont = ncont_d(rng);
  long combos = 1;
  for (int j = 0; j < n_int; ++j) {
    // mostly binaries, a few short general integers, capped enumeration size
    const bool general = (rng() % 4 == 0) && combos < 3000;
    if (general) {
      inst.add_var(VarKind::Integer, -2, 3);
      combos *= 6;
    } else {
      inst.add_var(VarKind::Binary, 0, 1);
      combos *= 2;
    }
    if (combos > 60000) break;
  }
  for (int j = 0; j < n_cont; ++j)
    inst.add_var(VarKind::Continuous, -10, 10);
  const int n = inst.num_vars();
  for (int j = 0; j < n; ++j) inst.objective.add(j, static_cast<double>(costd(rng)));
  const int m = md(rng);
  for (int r = 0; r < m; ++r) {
    LinearExpr e;
    for (int j = 0; j < n; ++j) {
      const int c = cd(rng);
      if (c != 0) e.add(j, static_cast<double>(c));
    }
    const double rhs = std::uniform_real_distribution<double>(-8.0, 15.0)(rng);
    inst.add_row(e, rhs);
  }
  return inst;
}

}  // namespace

TEST_CASE("bound-only LP optimum sits on the box") {
  MilpInstance inst;
  inst.add_var(VarKind::Continuous, 0, 3);
  inst.objective.add(0, -1.0);
  LpResult r = solve_lp(inst);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-3.0));
  CHECK(r.x[0] == doctest::Approx(3.0));
}

TEST_CASE("symmetric two-variable LP") {
  MilpInstance inst;
  inst.add_var(VarKind::Continuous, 0, 1);
  inst.add_var(VarKind::Continuous, 0, 1);
  inst.objective.add(0, 1.0).add(1, 1.0);
  LinearExpr ge1;  // x + y >= 1
  ge1.add(0, -1.0).add(1, -1.0);
  inst.add_row(ge1, -1.0);
  LpResult r = solve_lp(inst);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("LP infeasibility is certified") {
  MilpInstance inst;
  inst.add_var(VarKind::Continuous, 0, 1);
  LinearExpr le;  // x <= 0 and x >= 1 simultaneously
  le.add(0, 1.0);
  inst.add_row(le, 0.0);
  LinearExpr ge;
  ge.add(0, -1.0);
  inst.add_row(ge, -1.0);
  LpResult r = solve_lp(inst);
  CHECK(r.status == LpStatus::Infeasible);
}

TEST_CASE("LP unboundedness is detected") {
  MilpInstance inst;
  inst.add_var(VarKind::Continuous, 0,
               std::numeric_limits<double>::infinity());
  inst.objective.add(0, -1.0);
  LpResult r = solve_lp(inst);
  CHECK(r.status == LpStatus::Unbounded);
}

TEST_CASE("random LPs match the vertex-enumeration oracle") {
  std::mt19937 rng(2024);
  int checked = 0;
  for (int it = 0; it < 20; ++it) {
    MilpInstance inst = random_lp(rng);
    LpResult r = solve_lp(inst);
    auto oracle = lp_vertex_oracle(inst);
    if (oracle) {
      REQUIRE(r.status == LpStatus::Optimal);
      CHECK(r.objective == doctest::Approx(*oracle).epsilon(1e-6));
      ++checked;
    } else {
      CHECK(r.status == LpStatus::Infeasible);
    }
  }
  CHECK(checked >= 8);  // the seed must give a healthy mix
}

TEST_CASE("integer box optimum") {
  MilpInstance inst;
  inst.add_var(VarKind::Integer, 1, 3);
  inst.objective.add(0, -1.0);
  MilpResult r = solve_milp(inst);
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-3.0));
  CHECK(r.x[0] == doctest::Approx(3.0));
}

TEST_CASE("fractional-only integer box is infeasible") {
  MilpInstance inst;
  inst.add_var(VarKind::Integer, 0.2, 0.8);
  inst.objective.add(0, 1.0);
  MilpResult r = solve_milp(inst);
  CHECK(r.status == MilpStatus::Infeasible);
}

TEST_CASE("a reachable reference solves to zero cost") {
  VehicleParams p;
  p.id = 1;
  p.v_max = 36;
  p.delta = 5;
  p.r = 2;
  p.d0 = 5;
  p.h = 0;
  p.v_ref = {22, 24, 26};
  p.z_ref = {2, 2, 2};
  VehicleState s{0.0, 20.0, 2, 0, 0};
  WorldParams w;
  w.L = 3;
  w.T = 3;
  w.tau = 3;
  w.d_bar = 100;
  w.d_hat = 10;
  CompiledPlanProblem cpp = compile_vehicle_milp(p, s, w, {});
  MilpResult r = solve_milp(cpp.instance);
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-9));
  for (int t = 1; t <= 3; ++t) {
    CHECK(r.x[cpp.v_var(t)] == doctest::Approx(p.v_ref[t - 1]));
    CHECK(r.x[cpp.z_var(t)] == doctest::Approx(2.0));
  }
}

TEST_CASE("random MILPs match enumeration plus LP") {
  std::mt19937 rng(77);
  int optimal_checked = 0;
  for (int it = 0; it < 30; ++it) {
    MilpInstance inst = random_milp(rng);
    MilpResult r = solve_milp(inst);
    auto oracle = milp_enum_oracle(inst);
    if (oracle.feasible) {
      REQUIRE(r.status == MilpStatus::Optimal);
      CHECK(r.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
      ++optimal_checked;
    } else {
      CHECK(r.status == MilpStatus::Infeasible);
    }
  }
  CHECK(optimal_checked >= 10);
}

TEST_CASE("node log keeps the relaxation and incumbent invariants") {
  std::mt19937 rng(99);
  SolverConfig cfg;
  cfg.keep_node_log = true;
  for (int it = 0; it < 10; ++it) {
    MilpInstance inst = random_milp(rng);
    MilpResult r = solve_milp(inst, cfg);
    if (r.status != MilpStatus::Optimal || r.node_log.empty()) continue;
    const double root_bound = r.node_log.front().lp_bound;
    CHECK(root_bound <= r.objective + 1e-6);
    double last_inc = std::numeric_limits<double>::infinity();
    for (const auto& nd : r.node_log) {
      CHECK(nd.lp_bound >= root_bound - 1e-9);  // children only tighten
      if (nd.has_incumbent) {
        CHECK(nd.incumbent <= last_inc + 1e-12);
        last_inc = nd.incumbent;
      }
    }
  }
}

TEST_CASE("node limit returns an explicit status with the incumbent") {
  MilpInstance inst;
  for (int j = 0; j < 6; ++j) inst.add_var(VarKind::Binary, 0, 1);
  // knapsack-ish: force fractional relaxation
  LinearExpr e;
  for (int j = 0; j < 6; ++j) {
    e.add(j, 1.0 + 0.1 * j);
    inst.objective.add(j, -1.0 - 0.05 * j);
  }
  inst.add_row(e, 3.14);
  SolverConfig cfg;
  cfg.node_limit = 2;
  MilpResult r = solve_milp(inst, cfg);
  CHECK(r.status == MilpStatus::NodeLimit);
}

TEST_CASE("identical instance and config give identical results") {
  std::mt19937 rng(4242);
  for (int it = 0; it < 5; ++it) {
    MilpInstance inst = random_milp(rng);
    MilpResult a = solve_milp(inst);
    MilpResult b = solve_milp(inst);
    REQUIRE(a.status == b.status);
    CHECK(a.nodes == b.nodes);
    if (a.status == MilpStatus::Optimal) {
      CHECK(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
      REQUIRE(a.x.size() == b.x.size());
      CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("best-bound node order reaches the same optimum") {
  std::mt19937 rng(31337);
  SolverConfig bb;
  bb.node_order = NodeOrder::BestBound;
  for (int it = 0; it < 10; ++it) {
    MilpInstance inst = random_milp(rng);
    MilpResult a = solve_milp(inst);
    MilpResult b = solve_milp(inst, bb);
    REQUIRE(a.status == b.status);
    if (a.status == MilpStatus::Optimal)
      CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));
  }
}

TEST_CASE("interchange file round-trips and solves identically") {
  std::mt19937 rng(555);
  MilpInstance inst = random_milp(rng);
  std::stringstream ss;
  write_lp_format(inst, ss);
  MilpInstance back = read_lp_format(ss);
  REQUIRE(back.num_vars() == inst.num_vars());
  REQUIRE(back.num_rows() == inst.num_rows());
  for (int j = 0; j < inst.num_vars(); ++j) {
    CHECK(back.vars[j].kind == inst.vars[j].kind);
    CHECK(back.vars[j].lb == inst.vars[j].lb);
    CHECK(back.vars[j].ub == inst.vars[j].ub);
  }
  MilpResult a = solve_milp(inst);
  MilpResult b = solve_milp(back);
  REQUIRE(a.status == b.status);
  if (a.status == MilpStatus::Optimal)
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
}
