#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanegame/game.hpp"

namespace lanegame {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReplanMode { EveryStep, PerWindow };

struct SimConfig {
  int steps = 1;
  std::uint64_t seed = 0;
  PlayerOrder player_order = PlayerOrder::RoundRobin;
};

struct Scenario {
  WorldParams world;
  std::vector<VehicleParams> params;
  std::vector<VehicleState> states;
  SimConfig sim;
};

/// Parses and validates a scenario file; the validation error message lists
/// every violated invariant.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
void validate_scenario(const Scenario& sc);

struct TraceRow {
  double time = 0.0;
  int vehicle = 0;
  double pos = 0.0;
  double v = 0.0;
  int z = 1;
  int a_l = 0;
  int a_r = 0;
};

struct RoundMeta {
  int round = 0;
  int iterations = 0;
  double potential = 0.0;
  double wall_ms = 0.0;
};

/// Realized states per timestamp (vehicles in id order within a timestamp),
/// plus per-planning-round game metadata.
struct Trace {
  double tau = 1.0;
  std::vector<int> vehicle_ids;
  std::vector<TraceRow> rows;
  std::vector<RoundMeta> rounds;
};

struct PlanRoundResult {
  GameResult game;
  std::vector<std::vector<int>> neighborhoods;
};

/// One planning round: recompute neighborhoods from current positions, then
/// run the Gauss-Southwell iteration to an equilibrium.
PlanRoundResult plan_round(const Scenario& sc,
                           const std::vector<VehicleState>& states,
                           const GameConfig& cfg);

/// Applies plan step `step` (1-based) of every vehicle; positions advance by
/// tau * v.
std::vector<VehicleState> step_world(const std::vector<VehicleState>& states,
                                     const std::vector<PlayerPlan>& plans,
                                     double tau, int step = 1);

struct Violation {
  int step = 0;   // timestamp index in the trace
  int i = 0;      // vehicle ids
  int j = 0;
  std::string what;
  double value = 0.0;
};

struct SafetyVerdict {
  bool safe = true;
  std::optional<Violation> first;
  std::vector<Violation> all;
};

/// Definition-1 monitor: same-lane gaps >= d0 + h v and no sign flip of the
/// relative distance while the pair shares a lane at both ends of a step.
SafetyVerdict check_longitudinal_safety(const Trace& trace,
                                        const std::vector<VehicleParams>& params,
                                        double tol = 1e-6);

/// Definition-2 monitor: within d_hat on adjacent lanes, no vehicle may enter
/// the other's current lane over the next step.
SafetyVerdict check_consecutive_lane_safety(const Trace& trace, double d_hat);

void emit_trace(const Trace& trace, const std::string& path);
void emit_game_meta(const Trace& trace, const std::string& path);
Trace parse_trace(const std::string& path);

struct SimOptions {
  ReplanMode replan = ReplanMode::EveryStep;
  RuleSet rules;
  SolverConfig solver;
  int max_gs_iterations = 1000;
};

struct SimResult {
  Trace trace;
  bool converged = true;
  std::vector<std::vector<IterationRecord>> round_logs;
};

SimResult simulate(const Scenario& sc, const SimOptions& opt = {});

}  // namespace lanegame
