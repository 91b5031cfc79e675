#include "lanegame/game.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace lanegame {

namespace {

std::vector<NeighborPlan> gather_neighbor_plans(
    int i, const std::vector<VehicleParams>& params,
    const std::vector<VehicleState>& states,
    const std::vector<std::vector<int>>& neighborhoods,
    const std::vector<PlayerPlan>& plans) {
  std::vector<NeighborPlan> out;
  for (int j : neighborhoods[i])
    out.push_back(to_neighbor_plan(params[j].id, states[j], plans[j]));
  return out;
}

// The stored auxiliaries go stale when neighbors move; rebuild the full
// vector from the stored decisions against the freshly compiled problem.
// Empty result: the stored decisions are no longer feasible.
std::optional<std::vector<double>> refresh_assignment(
    const CompiledPlanProblem& cpp, const PlayerPlan& plan, double feas_tol) {
  if (static_cast<int>(plan.v.size()) != cpp.T) return std::nullopt;
  try {
    auto x = consistent_assignment(cpp, plan.v, plan.z, plan.a_l, plan.a_r);
    if (cpp.instance.max_violation(x) <= 10 * feas_tol) return x;
  } catch (const CompileError&) {
  }
  return std::nullopt;
}

PlayerPlan decode_plan(const CompiledPlanProblem& cpp,
                       const std::vector<double>& x) {
  PlayerPlan p;
  const int T = cpp.T;
  p.x = x;
  p.v.resize(T);
  p.z.resize(T);
  p.a_l.resize(T);
  p.a_r.resize(T);
  for (int t = 1; t <= T; ++t) {
    p.v[t - 1] = x[cpp.v_var(t)];
    p.z[t - 1] = static_cast<int>(std::lround(x[cpp.z_var(t)]));
    p.a_l[t - 1] = static_cast<int>(std::lround(x[cpp.al_var(t)]));
    p.a_r[t - 1] = static_cast<int>(std::lround(x[cpp.ar_var(t)]));
  }
  p.cost = x[cpp.q_var()];
  return p;
}

// `uniform` Fisher-Yates with an explicit generator so the permutation stream
// is identical across standard libraries
std::vector<int> pass_order(int n, PlayerOrder order, std::uint64_t seed, int pass) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (order == PlayerOrder::RandomPerm) {
    std::uint64_t s = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(pass) + 1;
    auto next = [&s]() {
      s ^= s << 13;
      s ^= s >> 7;
      s ^= s << 17;
      return s;
    };
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(next() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[i], idx[j]);
    }
  }
  return idx;
}

}  // namespace

NeighborPlan to_neighbor_plan(int id, const VehicleState& state,
                              const PlayerPlan& plan) {
  NeighborPlan nb;
  nb.id = id;
  nb.state = state;
  nb.v = plan.v;
  nb.z = plan.z;
  nb.a_l = plan.a_l;
  nb.a_r = plan.a_r;
  return nb;
}

PlayerPlan make_hold_plan(const VehicleParams& params, const VehicleState& state,
                          const WorldParams& world,
                          const std::vector<NeighborPlan>& neighbors,
                          RuleSet rules) {
  PlayerPlan p;
  p.v.assign(world.T, state.v);
  p.z.assign(world.T, state.z);
  p.a_l.assign(world.T, 0);
  p.a_r.assign(world.T, 0);
  CompiledPlanProblem cpp =
      compile_vehicle_milp(params, state, world, neighbors, rules);
  p.x = consistent_assignment(cpp, p.v, p.z, p.a_l, p.a_r);
  p.cost = p.x[cpp.q_var()];
  return p;
}

BestResponse best_response(int i, const std::vector<VehicleParams>& params,
                           const std::vector<VehicleState>& states,
                           const WorldParams& world,
                           const std::vector<std::vector<int>>& neighborhoods,
                           const std::vector<PlayerPlan>& plans,
                           const GameConfig& cfg,
                           const PlayerPlan* seed_incumbent) {
  BestResponse out;
  auto nbrs = gather_neighbor_plans(i, params, states, neighborhoods, plans);
  CompiledPlanProblem cpp =
      compile_vehicle_milp(params[i], states[i], world, nbrs, cfg.rules);

  std::optional<std::vector<double>> seed_x;
  if (seed_incumbent)
    seed_x = refresh_assignment(cpp, *seed_incumbent, cfg.solver.feas_tol);
  std::optional<std::span<const double>> seed;
  if (seed_x) seed = std::span<const double>(*seed_x);

  MilpResult res = solve_milp(cpp.instance, cfg.solver, seed);
  out.status = res.status;
  out.nodes = res.nodes;
  if (res.status == MilpStatus::Optimal) out.plan = decode_plan(cpp, res.x);
  return out;
}

MineCheck check_eps_mine(const std::vector<VehicleParams>& params,
                         const std::vector<VehicleState>& states,
                         const WorldParams& world,
                         const std::vector<std::vector<int>>& neighborhoods,
                         const std::vector<PlayerPlan>& plans,
                         const GameConfig& cfg) {
  const int n = static_cast<int>(params.size());
  MineCheck out;
  out.slack.assign(n, 0.0);
  out.feasible.assign(n, true);
  out.is_equilibrium = true;
  for (int i = 0; i < n; ++i) {
    auto nbrs = gather_neighbor_plans(i, params, states, neighborhoods, plans);
    CompiledPlanProblem cpp =
        compile_vehicle_milp(params[i], states[i], world, nbrs, cfg.rules);
    auto refreshed = refresh_assignment(cpp, plans[i], cfg.solver.feas_tol);
    out.feasible[i] = refreshed.has_value();
    std::optional<std::span<const double>> seed;
    if (refreshed) seed = std::span<const double>(*refreshed);
    MilpResult res = solve_milp(cpp.instance, cfg.solver, seed);
    if (res.status != MilpStatus::Optimal) {
      out.is_equilibrium = false;
      out.slack[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    out.slack[i] = plans[i].cost - res.objective;
    if (out.slack[i] > world.eps_game) out.is_equilibrium = false;
  }
  return out;
}

GameResult gauss_southwell(const std::vector<VehicleParams>& params,
                           const std::vector<VehicleState>& states,
                           const WorldParams& world,
                           const std::vector<std::vector<int>>& neighborhoods,
                           const GameConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const int n = static_cast<int>(params.size());
  GameResult out;
  out.state.neighborhoods = neighborhoods;

  // initial plans: hold current state (feasible whenever the scenario is)
  out.state.plans.resize(n);
  out.state.costs.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<NeighborPlan> nbrs;
    for (int j : neighborhoods[i]) {
      NeighborPlan nb;
      nb.id = params[j].id;
      nb.state = states[j];
      nb.v.assign(world.T, states[j].v);
      nb.z.assign(world.T, states[j].z);
      nb.a_l.assign(world.T, 0);
      nb.a_r.assign(world.T, 0);
      nbrs.push_back(std::move(nb));
    }
    out.state.plans[i] =
        make_hold_plan(params[i], states[i], world, nbrs, cfg.rules);
    out.state.costs[i] = out.state.plans[i].cost;
  }
  out.state.potential =
      std::accumulate(out.state.costs.begin(), out.state.costs.end(), 0.0);

  int k = 0;
  int since_accept = 0;
  int pass = 0;
  bool done = false;
  while (!done) {
    const std::vector<int> order = pass_order(n, cfg.order, cfg.seed, pass++);
    for (int pos : order) {
      if (since_accept >= n) {
        done = true;
        break;
      }
      if (k >= cfg.max_iterations) {
        out.converged = false;
        out.iterations = k;
        return out;
      }
      ++k;
      const auto start = clock::now();
      BestResponse br =
          best_response(pos, params, states, world, neighborhoods,
                        out.state.plans, cfg, &out.state.plans[pos]);
      const double wall_ms =
          std::chrono::duration<double, std::milli>(clock::now() - start).count();

      IterationRecord rec;
      rec.k = k;
      rec.player = params[pos].id;
      rec.j_before = out.state.costs[pos];
      rec.nodes = br.nodes;
      rec.wall_ms = wall_ms;
      if (br.status != MilpStatus::Optimal) {
        rec.infeasible = true;
        rec.improved = false;
        rec.j_after = rec.j_before;
        rec.p_after = out.state.potential;
        ++since_accept;
      } else if (rec.j_before - br.plan.cost >= world.eps_game) {
        rec.improved = true;
        rec.j_after = br.plan.cost;
        out.state.potential -= rec.j_before - br.plan.cost;
        rec.p_after = out.state.potential;
        out.state.plans[pos] = std::move(br.plan);
        out.state.costs[pos] = rec.j_after;
        since_accept = 0;
      } else {
        rec.improved = false;
        rec.j_after = rec.j_before;
        rec.p_after = out.state.potential;
        ++since_accept;
      }
      out.log.push_back(rec);
    }
    if (since_accept >= n) done = true;
  }
  out.converged = true;
  out.iterations = k;
  return out;
}

void write_iteration_log(const std::vector<IterationRecord>& log,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "k,player,improved,J_before,J_after,P_after,nodes,wall_ms\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.9g,%.9g,%.9g,%ld,%.3f\n", r.k,
                  r.player, r.improved ? 1 : 0, r.j_before, r.j_after,
                  r.p_after, r.nodes, r.wall_ms);
    os << buf;
  }
}

}  // namespace lanegame
