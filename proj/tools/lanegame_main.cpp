#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lanegame/harness.hpp"

namespace fs = std::filesystem;
using namespace lanegame;

namespace {

RuleSet rules_from(const std::vector<std::string>& disabled) {
  RuleSet rules;
  for (const auto& d : disabled) {
    if (d == "free-space")
      rules.free_space = false;
    else if (d == "lateral")
      rules.lateral = false;
    else
      throw CLI::ValidationError("--disable-rule must be free-space or lateral");
  }
  return rules;
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::vector<std::string>& disabled,
                 const std::string& replan) {
  Scenario sc = load_scenario(scenario_path);
  SimOptions opt;
  opt.rules = rules_from(disabled);
  opt.replan = replan == "per-window" ? ReplanMode::PerWindow : ReplanMode::EveryStep;

  SimResult res = simulate(sc, opt);

  fs::create_directories(out_dir);
  emit_trace(res.trace, out_dir + "/trace.csv");
  emit_game_meta(res.trace, out_dir + "/trace.game");
  for (size_t r = 0; r < res.round_logs.size(); ++r) {
    char name[64];
    std::snprintf(name, sizeof(name), "/iterations_r%03zu.csv", r);
    write_iteration_log(res.round_logs[r], out_dir + name);
  }

  if (!res.converged) {
    std::cerr << "non-convergence: a planning round hit the iteration guard\n";
    return 3;
  }
  SafetyVerdict lon = check_longitudinal_safety(res.trace, sc.params);
  SafetyVerdict lat = check_consecutive_lane_safety(res.trace, sc.world.d_hat);
  std::cout << "trace: " << out_dir << "/trace.csv\n";
  std::cout << "longitudinal: " << (lon.safe ? "safe" : "VIOLATION") << "\n";
  if (!lon.safe)
    std::cout << "  first at step " << lon.first->step << " pair ("
              << lon.first->i << "," << lon.first->j << ") " << lon.first->what
              << " = " << lon.first->value << "\n";
  std::cout << "lateral: " << (lat.safe ? "safe" : "VIOLATION") << "\n";
  if (!lat.safe)
    std::cout << "  first at step " << lat.first->step << " pair ("
              << lat.first->i << "," << lat.first->j << ") " << lat.first->what
              << "\n";
  return (lon.safe && lat.safe) ? 0 : 2;
}

int run_solve_once(const std::string& scenario_path, int round, bool dump_milp,
                   const std::string& out_dir,
                   const std::vector<std::string>& disabled) {
  Scenario sc = load_scenario(scenario_path);
  GameConfig cfg;
  cfg.order = sc.sim.player_order;
  cfg.seed = sc.sim.seed;
  cfg.rules = rules_from(disabled);

  std::vector<VehicleState> states = sc.states;
  for (int r = 0; r < round; ++r) {
    PlanRoundResult pr = plan_round(sc, states, cfg);
    if (!pr.game.converged) {
      std::cerr << "non-convergence while advancing to round " << round << "\n";
      return 3;
    }
    states = step_world(states, pr.game.state.plans, sc.world.tau, 1);
  }

  PlanRoundResult pr = plan_round(sc, states, cfg);
  std::cout << "round " << round << ": iterations = " << pr.game.iterations
            << ", potential = " << pr.game.state.potential << "\n";
  for (size_t i = 0; i < sc.params.size(); ++i)
    std::cout << "  vehicle " << sc.params[i].id
              << ": J = " << pr.game.state.costs[i] << "\n";

  if (dump_milp) {
    fs::create_directories(out_dir);
    for (size_t i = 0; i < sc.params.size(); ++i) {
      std::vector<NeighborPlan> nbrs;
      for (int j : pr.neighborhoods[i])
        nbrs.push_back(to_neighbor_plan(sc.params[j].id, states[j],
                                        pr.game.state.plans[j]));
      CompiledPlanProblem cpp = compile_vehicle_milp(sc.params[i], states[i],
                                                     sc.world, nbrs, cfg.rules);
      write_lp_file(cpp.instance,
                    out_dir + "/vehicle" + std::to_string(sc.params[i].id) + ".lp");
    }
    write_iteration_log(pr.game.log, out_dir + "/iterations.csv");
    std::cout << "wrote MILPs and the iteration log to " << out_dir << "\n";
  }
  return pr.game.converged ? 0 : 3;
}

int run_check(const std::string& trace_path, const std::string& scenario_path) {
  Scenario sc = load_scenario(scenario_path);
  Trace tr = parse_trace(trace_path);
  SafetyVerdict lon = check_longitudinal_safety(tr, sc.params);
  SafetyVerdict lat = check_consecutive_lane_safety(tr, sc.world.d_hat);
  std::cout << "longitudinal: " << (lon.safe ? "safe" : "VIOLATION") << "\n";
  if (!lon.safe)
    std::cout << "  first at step " << lon.first->step << " pair ("
              << lon.first->i << "," << lon.first->j << ") " << lon.first->what
              << " = " << lon.first->value << "\n";
  std::cout << "lateral: " << (lat.safe ? "safe" : "VIOLATION") << "\n";
  if (!lat.safe)
    std::cout << "  first at step " << lat.first->step << " pair ("
              << lat.first->i << "," << lat.first->j << ") " << lat.first->what
              << "\n";
  return (lon.safe && lat.safe) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-vehicle lane-change planning via mixed-integer games"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out", trace_path, replan = "every-step";
  std::vector<std::string> disabled;
  int round = 0;
  bool dump_milp = false;

  CLI::App* sim = app.add_subcommand("simulate", "run a scenario and emit traces");
  sim->add_option("scenario", scenario)->required();
  sim->add_option("--out", out_dir);
  sim->add_option("--disable-rule", disabled)
      ->check(CLI::IsMember({"free-space", "lateral"}));
  sim->add_option("--replan", replan)
      ->check(CLI::IsMember({"every-step", "per-window"}));

  CLI::App* once = app.add_subcommand("solve-once", "solve a single planning round");
  once->add_option("scenario", scenario)->required();
  once->add_option("--round", round);
  once->add_flag("--dump-milp", dump_milp);
  once->add_option("--out", out_dir);
  once->add_option("--disable-rule", disabled)
      ->check(CLI::IsMember({"free-space", "lateral"}));

  CLI::App* chk = app.add_subcommand("check", "run the safety monitors on a trace");
  chk->add_option("trace", trace_path)->required();
  chk->add_option("--scenario", scenario)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(scenario, out_dir, disabled, replan);
    if (once->parsed())
      return run_solve_once(scenario, round, dump_milp, out_dir, disabled);
    if (chk->parsed()) return run_check(trace_path, scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
