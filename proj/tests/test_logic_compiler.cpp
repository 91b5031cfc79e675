#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "lanegame/logic_compiler.hpp"

using namespace lanegame;

namespace {

constexpr double kEps = 0.1;  // strict tolerance used by the pattern tests

template <size_t N>
bool rows_ok(const std::array<Constraint, N>& rows, std::vector<double> vals) {
  for (const auto& r : rows)
    if (r.lhs.eval(vals) > r.rhs + 1e-9) return false;
  return true;
}

// expected delta set for [delta=1] <=> [x >= c] with the eps band semantics
std::set<int> geq_expected(double x, double c) {
  if (x >= c) return {1};
  if (x <= c - kEps) return {0};
  return {};
}

std::set<int> leq_expected(double x, double c) {
  if (x <= c) return {1};
  if (x >= c + kEps) return {0};
  return {};
}

WorldParams small_world(int T, double d_hat = 10.0) {
  WorldParams w;
  w.L = 2;
  w.T = T;
  w.tau = 1.0;
  w.d_bar = 100.0;
  w.d_hat = d_hat;
  w.eps_game = 1e-3;
  w.eps_strict = 1e-4;
  return w;
}

VehicleParams base_params(int id, int T) {
  VehicleParams p;
  p.id = id;
  p.v_max = 36;
  p.delta = 4.5;
  p.r = 2;
  p.d0 = 5;
  p.h = 0;
  p.v_ref.assign(T, 20.0);
  p.z_ref.assign(T, 1);
  return p;
}

NeighborPlan hold_neighbor(int id, const VehicleState& st, int T) {
  NeighborPlan nb;
  nb.id = id;
  nb.state = st;
  nb.v.assign(T, st.v);
  nb.z.assign(T, st.z);
  nb.a_l.assign(T, 0);
  nb.a_r.assign(T, 0);
  return nb;
}

}  // namespace

TEST_CASE("s_geq matches its truth table on a grid") {
  MilpInstance inst;
  const int x = inst.add_var(VarKind::Continuous, -5, 5);
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  const double c = 0.0;
  auto rows = s_geq(inst, d, var_expr(x), c, kEps);
  for (double xv : {-5.0, -0.2, -0.1, -0.05, 0.0, 0.05, 1.0, 5.0}) {
    std::set<int> got;
    for (int dv = 0; dv <= 1; ++dv)
      if (rows_ok(rows, {xv, double(dv)})) got.insert(dv);
    CHECK(got == geq_expected(xv, c));
  }
}

TEST_CASE("s_geq degenerates to a forced indicator outside the box") {
  MilpInstance inst;
  const int x = inst.add_var(VarKind::Continuous, -5, 5);
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  auto always = s_geq(inst, d, var_expr(x), -10.0, kEps);
  auto never = s_geq(inst, d, var_expr(x), 10.0, kEps);
  for (double xv : {-5.0, -1.0, 0.0, 2.5, 5.0}) {
    CHECK(rows_ok(always, {xv, 1.0}));
    CHECK_FALSE(rows_ok(always, {xv, 0.0}));
    CHECK(rows_ok(never, {xv, 0.0}));
    CHECK_FALSE(rows_ok(never, {xv, 1.0}));
  }
}

TEST_CASE("s_leq matches its truth table on a grid") {
  MilpInstance inst;
  const int x = inst.add_var(VarKind::Continuous, -5, 5);
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  const double c = 0.0;
  auto rows = s_leq(inst, d, var_expr(x), c, kEps);
  for (double xv : {-5.0, -1.0, 0.0, 0.05, 0.1, 0.2, 5.0}) {
    std::set<int> got;
    for (int dv = 0; dv <= 1; ++dv)
      if (rows_ok(rows, {xv, double(dv)})) got.insert(dv);
    CHECK(got == leq_expected(xv, c));
  }
  auto always = s_leq(inst, d, var_expr(x), 6.0, kEps);
  auto never = s_leq(inst, d, var_expr(x), -6.0, kEps);
  for (double xv : {-5.0, 0.0, 5.0}) {
    CHECK(rows_ok(always, {xv, 1.0}));
    CHECK_FALSE(rows_ok(always, {xv, 0.0}));
    CHECK(rows_ok(never, {xv, 0.0}));
    CHECK_FALSE(rows_ok(never, {xv, 1.0}));
  }
}

TEST_CASE("s_and and s_or enumerate to their truth tables") {
  MilpInstance inst;
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  const int s = inst.add_var(VarKind::Binary, 0, 1);
  const int g = inst.add_var(VarKind::Binary, 0, 1);
  auto andr = s_and(inst, d, s, g);
  auto orr = s_or(inst, d, s, g);
  for (int dv = 0; dv <= 1; ++dv)
    for (int sv = 0; sv <= 1; ++sv)
      for (int gv = 0; gv <= 1; ++gv) {
        std::vector<double> vals{double(dv), double(sv), double(gv)};
        CHECK(rows_ok(andr, vals) == (dv == (sv & gv)));
        CHECK(rows_ok(orr, vals) == (dv == (sv | gv)));
      }
}

TEST_CASE("s_and rejects non-binary arguments") {
  MilpInstance inst;
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  const int s = inst.add_var(VarKind::Binary, 0, 1);
  const int x = inst.add_var(VarKind::Continuous, 0, 1);
  CHECK_THROWS_AS(s_and(inst, d, s, x), CompileError);
  CHECK_THROWS_AS(s_or(inst, x, s, d), CompileError);
}

TEST_CASE("s_geq rejects an unbounded guard") {
  MilpInstance inst;
  const int x = inst.add_var(VarKind::Continuous, 0,
                             std::numeric_limits<double>::infinity());
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  CHECK_THROWS_AS(s_geq(inst, d, var_expr(x), 1.0, kEps), CompileError);
}

TEST_CASE("s_product pins g to 0 or f") {
  MilpInstance inst;
  const int x = inst.add_var(VarKind::Continuous, -5, 5);
  const int d = inst.add_var(VarKind::Binary, 0, 1);
  const int g = inst.add_var(VarKind::Continuous, -5, 5);
  auto rows = s_product(inst, g, var_expr(x), d);
  for (double xv : {-5.0, -1.25, 0.0, 3.5, 5.0}) {
    CHECK(rows_ok(rows, {xv, 0.0, 0.0}));
    if (xv != 0.0) CHECK_FALSE(rows_ok(rows, {xv, 0.0, xv}));
    CHECK_FALSE(rows_ok(rows, {xv, 0.0, 1.7}));
    CHECK(rows_ok(rows, {xv, 1.0, xv}));
    if (xv != 0.0) CHECK_FALSE(rows_ok(rows, {xv, 1.0, 0.0}));
    CHECK_FALSE(rows_ok(rows, {xv, 1.0, xv + 0.5}));
  }
}

TEST_CASE("compiled counts match the closed formulas") {
  for (int T = 1; T <= 4; ++T) {
    for (int N = 0; N <= 3; ++N) {
      WorldParams w = small_world(T);
      w.L = 3;
      VehicleParams p = base_params(1, T);
      VehicleState s{0.0, 20.0, 2, 0, 0};
      p.z_ref.assign(T, 2);
      std::vector<NeighborPlan> nbrs;
      for (int j = 0; j < N; ++j) {
        VehicleState stj{20.0 + 15.0 * j, 19.0, 1 + (j % 3), 0, 0};
        nbrs.push_back(hold_neighbor(10 + j, stj, T));
      }
      CompiledPlanProblem cpp = compile_vehicle_milp(p, s, w, nbrs);
      CHECK(cpp.instance.num_vars() == 1 + T * (21 * N + 4));
      CHECK(cpp.instance.num_rows() == T * (67 * N + 9));
      CHECK(cpp.n_own == 1 + 4 * T);
      CHECK(cpp.n_aux == 21 * T * N);
    }
  }
}

TEST_CASE("count examples from the formulas") {
  struct Case {
    int T, N, nv, nc;
  };
  for (const Case c : {Case{3, 1, 76, 228}, Case{4, 0, 17, 36}, Case{1, 2, 47, 143}}) {
    WorldParams w = small_world(c.T);
    w.L = 3;
    VehicleParams p = base_params(1, c.T);
    p.z_ref.assign(c.T, 1);
    VehicleState s{0.0, 20.0, 1, 0, 0};
    std::vector<NeighborPlan> nbrs;
    for (int j = 0; j < c.N; ++j) {
      VehicleState stj{30.0 + 20.0 * j, 21.0, 2, 0, 0};
      nbrs.push_back(hold_neighbor(5 + j, stj, c.T));
    }
    CompiledPlanProblem cpp = compile_vehicle_milp(p, s, w, nbrs);
    CHECK(cpp.instance.num_vars() == c.nv);
    CHECK(cpp.instance.num_rows() == c.nc);
  }
}

TEST_CASE("symbol map covers all auxiliaries exactly once") {
  const int T = 3;
  WorldParams w = small_world(T);
  VehicleParams p = base_params(1, T);
  VehicleState s{0.0, 20.0, 1, 0, 0};
  std::vector<NeighborPlan> nbrs;
  nbrs.push_back(hold_neighbor(2, VehicleState{12.3, 19.0, 2, 0, 0}, T));
  nbrs.push_back(hold_neighbor(3, VehicleState{-9.0, 22.0, 1, 0, 0}, T));
  CompiledPlanProblem cpp = compile_vehicle_milp(p, s, w, nbrs);

  const Sym aux[] = {Sym::Eta, Sym::Theta, Sym::Alpha, Sym::Beta, Sym::Xi,
                     Sym::Kappa, Sym::Lambda, Sym::Gamma, Sym::Delta, Sym::Mu,
                     Sym::Nu, Sym::Zeta, Sym::Phi, Sym::Psi, Sym::F, Sym::G,
                     Sym::Hh, Sym::K, Sym::Mm, Sym::P, Sym::S};
  std::set<int> seen;
  for (int slot = 0; slot < 2; ++slot)
    for (int t = 1; t <= T; ++t)
      for (Sym sym : aux) {
        const int idx = cpp.aux_var(sym, slot, t);
        CHECK(idx >= cpp.n_own);
        CHECK(idx < cpp.instance.num_vars());
        CHECK(cpp.instance.vars[idx].sym == sym);
        CHECK(cpp.instance.vars[idx].neighbor == slot);
        CHECK(cpp.instance.vars[idx].step == t);
        seen.insert(idx);
      }
  CHECK(static_cast<int>(seen.size()) == cpp.n_aux);
}

TEST_CASE("compile rejects invalid inputs") {
  const int T = 2;
  WorldParams w = small_world(T);
  VehicleParams p = base_params(1, T);
  VehicleState bad_speed{0.0, 40.0, 1, 0, 0};  // above v_max
  CHECK_THROWS_AS(compile_vehicle_milp(p, bad_speed, w, {}), CompileError);

  VehicleState s{0.0, 20.0, 1, 0, 0};
  NeighborPlan nb = hold_neighbor(2, VehicleState{10, 20, 2, 0, 0}, T);
  nb.v.pop_back();  // short plan
  CHECK_THROWS_AS(compile_vehicle_milp(p, s, w, {nb}), CompileError);

  VehicleParams short_ref = p;
  short_ref.v_ref.pop_back();
  CHECK_THROWS_AS(compile_vehicle_milp(short_ref, s, w, {}), CompileError);
}

TEST_CASE("constant guard inside the eps band is a compile error") {
  const int T = 1;
  WorldParams w = small_world(T);
  VehicleParams p = base_params(1, T);
  VehicleState s{0.0, 20.0, 1, 0, 0};
  // d(1) = d(0) + tau (v_j(0) - v_i(0)) lands in (-eps, 0)
  VehicleState stj{10.0, 20.0 - 10.0 - 0.5 * w.eps_strict, 2, 0, 0};
  NeighborPlan nb = hold_neighbor(2, stj, T);
  CHECK_THROWS_AS(compile_vehicle_milp(p, s, w, {nb}), CompileError);
}

TEST_CASE("neighbor data only shifts constants of the shared-shape rows") {
  const int T = 2;
  WorldParams w = small_world(T);
  VehicleParams p = base_params(1, T);
  VehicleState s{0.0, 20.0, 1, 0, 0};
  NeighborPlan nbA = hold_neighbor(2, VehicleState{11.0, 19.5, 2, 0, 0}, T);
  NeighborPlan nbB = hold_neighbor(2, VehicleState{26.0, 23.0, 2, 0, 0}, T);
  nbB.v = {24.0, 25.0};
  CompiledPlanProblem a = compile_vehicle_milp(p, s, w, {nbA});
  CompiledPlanProblem b = compile_vehicle_milp(p, s, w, {nbB});
  REQUIRE(a.instance.num_rows() == b.instance.num_rows());
  for (int r = 0; r < 9 * T; ++r)
    CHECK(a.instance.rows[r].lhs.terms == b.instance.rows[r].lhs.terms);
  for (const auto& row : b.instance.rows)
    for (const auto& [v, c] : row.lhs.terms) {
      CHECK(v >= 0);
      CHECK(v < b.instance.num_vars());
    }
}

TEST_CASE("small-scale semantic equivalence with the raw implications") {
  const int T = 2;
  WorldParams w = small_world(T, /*d_hat=*/9.0);
  VehicleParams p = base_params(1, T);
  p.z_ref.assign(T, 2);
  VehicleState s{0.0, 20.2, 1, 1, 0};  // left indicator on
  VehicleState stj{7.3, 18.9, 2, 0, 1};
  NeighborPlan nb = hold_neighbor(2, stj, T);
  nb.a_r = {1, 0};  // neighbor keeps signaling right at step 1
  CompiledPlanProblem cpp = compile_vehicle_milp(p, s, w, {nb});

  auto zeta_cond = [&](double d) { return d <= w.d_hat || d >= -w.d_hat; };
  auto ds_of = [&](double v) { return p.d0 + p.h * v; };

  int agree = 0, feas_count = 0, infeas_count = 0;
  const double dv[3] = {-p.delta, 0.0, p.delta};
  for (int z1 = 1; z1 <= 2; ++z1)
    for (int z2 = 1; z2 <= 2; ++z2)
      for (int a1 = 0; a1 < 3; ++a1)      // 0: none, 1: left, 2: right
        for (int a2 = 0; a2 < 3; ++a2)
          for (int iv1 = 0; iv1 < 3; ++iv1)
            for (int iv2 = 0; iv2 < 3; ++iv2) {
              std::vector<double> v{s.v + dv[iv1], 0.0};
              v[1] = v[0] + dv[iv2];
              if (v[0] < 0 || v[0] > p.v_max || v[1] < 0 || v[1] > p.v_max)
                continue;
              std::vector<int> z{z1, z2};
              std::vector<int> al{a1 == 1, a2 == 1};
              std::vector<int> ar{a1 == 2, a2 == 2};

              bool raw = true;
              auto zi = [&](int t) { return t == 0 ? s.z : z[t - 1]; };
              auto ali = [&](int t) { return t == 0 ? s.a_l : al[t - 1]; };
              auto ari = [&](int t) { return t == 0 ? s.a_r : ar[t - 1]; };
              auto vi = [&](int t) { return t == 0 ? s.v : v[t - 1]; };
              auto vj = [&](int t) { return t == 0 ? stj.v : nb.v[t - 1]; };
              auto zj = [&](int t) { return t == 0 ? stj.z : nb.z[t - 1]; };
              auto arj = [&](int t) { return t == 0 ? stj.a_r : nb.a_r[t - 1]; };
              std::vector<double> d(T + 1);
              d[0] = stj.pos - s.pos;
              for (int t = 1; t <= T; ++t)
                d[t] = d[t - 1] + w.tau * (vj(t - 1) - vi(t - 1));
              for (int t = 1; t <= T && raw; ++t) {
                if (zi(t) < zi(t - 1) - ari(t - 1) || zi(t) > zi(t - 1) + ali(t - 1))
                  raw = false;
                const int l = zj(t) - zi(t);
                if (l == 0 && std::abs(d[t]) < ds_of(vi(t))) raw = false;
                const double vrel = vj(t) - vi(t);
                if (l == 0 && d[t] >= 0 &&
                    vrel < -0.5 * (d[t] - ds_of(vi(t))) / w.tau - 1e-12)
                  raw = false;
                if (l == 0 && d[t] <= 0 &&
                    vrel > -0.5 * (d[t] + ds_of(vi(t))) / w.tau + 1e-12)
                  raw = false;
                const int lprev = zj(t - 1) - zi(t - 1);
                if (lprev == 1 && zeta_cond(d[t - 1]) && ali(t - 1) == 1 &&
                    arj(t - 1) == 1 && zi(t) != zi(t - 1))
                  raw = false;
              }

              bool milp = true;
              try {
                auto x = consistent_assignment(cpp, v, z, al, ar);
                milp = cpp.instance.max_violation(x) <= 1e-9;
              } catch (const CompileError&) {
                milp = false;
              }
              CHECK(milp == raw);
              agree += (milp == raw);
              feas_count += raw;
              infeas_count += !raw;
            }
  CHECK(feas_count > 0);
  CHECK(infeas_count > 0);
}

TEST_CASE("shrinking a variable box never enlarges the feasible set") {
  const int T = 2;
  WorldParams w = small_world(T);
  VehicleParams loose = base_params(1, T);
  VehicleParams tight = loose;
  tight.v_max = 24.5;  // tighter speed box
  VehicleState s{0.0, 20.0, 1, 0, 0};
  NeighborPlan nb = hold_neighbor(2, VehicleState{8.2, 19.0, 2, 0, 0}, T);
  CompiledPlanProblem cl = compile_vehicle_milp(loose, s, w, {nb});
  CompiledPlanProblem ct = compile_vehicle_milp(tight, s, w, {nb});

  const double dvs[3] = {-4.5, 0.0, 4.5};
  for (int z1 = 1; z1 <= 2; ++z1)
    for (int iv1 = 0; iv1 < 3; ++iv1)
      for (int iv2 = 0; iv2 < 3; ++iv2) {
        std::vector<double> v{s.v + dvs[iv1], 0.0};
        v[1] = v[0] + dvs[iv2];
        if (v[0] < 0 || v[0] > tight.v_max || v[1] < 0 || v[1] > tight.v_max)
          continue;
        std::vector<int> z{1, z1};
        std::vector<int> al{z1 > 1, 0}, ar{0, 0};
        bool tight_ok, loose_ok;
        try {
          auto xt = consistent_assignment(ct, v, z, al, ar);
          tight_ok = ct.instance.max_violation(xt) <= 1e-9;
        } catch (const CompileError&) {
          tight_ok = false;
        }
        try {
          auto xl = consistent_assignment(cl, v, z, al, ar);
          loose_ok = cl.instance.max_violation(xl) <= 1e-9;
        } catch (const CompileError&) {
          loose_ok = false;
        }
        if (tight_ok) CHECK(loose_ok);
      }
}
