#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanegame/logic_compiler.hpp"
#include "lanegame/milp_solver.hpp"

namespace lanegame {

/// One vehicle's current decision vector in decoded and raw form.
struct PlayerPlan {
  std::vector<double> v;   // speeds for steps 1..T
  std::vector<int> z;      // lanes
  std::vector<int> a_l;    // left indicators
  std::vector<int> a_r;    // right indicators
  double cost = 0.0;       // J_i = q
  std::vector<double> x;   // full variable vector of the compiled problem
};

enum class PlayerOrder { RoundRobin, RandomPerm };

struct GameConfig {
  PlayerOrder order = PlayerOrder::RoundRobin;
  std::uint64_t seed = 0;
  int max_iterations = 1000;
  RuleSet rules;
  SolverConfig solver;
};

struct IterationRecord {
  int k = 0;            // 1-based iteration counter
  int player = 0;       // vehicle id
  bool improved = false;
  double j_before = 0.0;
  double j_after = 0.0;
  double p_after = 0.0;
  long nodes = 0;
  double wall_ms = 0.0;
  bool infeasible = false;  // best response had no feasible point
};

struct GameState {
  std::vector<PlayerPlan> plans;           // by player position
  std::vector<std::vector<int>> neighborhoods;  // 0-based positions
  std::vector<double> costs;               // J_i
  double potential = 0.0;                  // P = sum J_i
};

struct GameResult {
  GameState state;
  std::vector<IterationRecord> log;
  bool converged = false;
  int iterations = 0;
};

struct BestResponse {
  MilpStatus status = MilpStatus::NumericalError;
  PlayerPlan plan;
  long nodes = 0;
};

struct MineCheck {
  bool is_equilibrium = false;
  std::vector<double> slack;    // J_i(stored) - J_i(best response)
  std::vector<bool> feasible;   // stored plan feasible in its own problem
};

/// Hold-everything plan: current lane and speed, indicators off. The
/// auxiliaries are filled by constraint propagation.
PlayerPlan make_hold_plan(const VehicleParams& params, const VehicleState& state,
                          const WorldParams& world,
                          const std::vector<NeighborPlan>& neighbors,
                          RuleSet rules = {});

NeighborPlan to_neighbor_plan(int id, const VehicleState& state,
                              const PlayerPlan& plan);

/// Exact best response of player `i` given the stored plans of its neighbors.
/// `seed_incumbent` optionally warm-starts the search with i's current plan.
BestResponse best_response(int i, const std::vector<VehicleParams>& params,
                           const std::vector<VehicleState>& states,
                           const WorldParams& world,
                           const std::vector<std::vector<int>>& neighborhoods,
                           const std::vector<PlayerPlan>& plans,
                           const GameConfig& cfg,
                           const PlayerPlan* seed_incumbent = nullptr);

/// Recomputes every player's best response from scratch and reports the
/// per-player improvement slack; equilibrium iff all slacks are <= eps.
MineCheck check_eps_mine(const std::vector<VehicleParams>& params,
                         const std::vector<VehicleState>& states,
                         const WorldParams& world,
                         const std::vector<std::vector<int>>& neighborhoods,
                         const std::vector<PlayerPlan>& plans,
                         const GameConfig& cfg);

/// Gauss-Southwell best-response iteration: players update one at a time and
/// a move is kept only when it improves that player's cost by at least
/// eps_game. Terminates once a full pass leaves every plan unchanged.
GameResult gauss_southwell(const std::vector<VehicleParams>& params,
                           const std::vector<VehicleState>& states,
                           const WorldParams& world,
                           const std::vector<std::vector<int>>& neighborhoods,
                           const GameConfig& cfg);

void write_iteration_log(const std::vector<IterationRecord>& log,
                         const std::string& path);

}  // namespace lanegame
