#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lanegame/milp.hpp"
#include "lanegame/simplex.hpp"

namespace lanegame {

enum class BranchRule { MostFractional, FirstFractional };
enum class NodeOrder { DepthFirst, BestBound };

struct SolverConfig {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  long node_limit = 1000000;
  BranchRule branching = BranchRule::MostFractional;
  NodeOrder node_order = NodeOrder::DepthFirst;
  /// Branch on decision-layer integers (z, indicators, untagged) before the
  /// pattern auxiliaries; refines the rule above without changing it within a
  /// tier.
  bool priority_tiers = true;
  /// Keep per-node bounds for the relaxation/incumbent assertions in tests.
  bool keep_node_log = false;
};

struct LpResult {
  LpStatus status = LpStatus::NumericalError;
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
};

enum class MilpStatus { Optimal, Infeasible, NodeLimit, Unbounded, NumericalError };

struct MilpNodeInfo {
  long node = 0;
  double lp_bound = 0.0;
  double incumbent = 0.0;  // +inf when none yet
  bool has_incumbent = false;
};

struct MilpResult {
  MilpStatus status = MilpStatus::NumericalError;
  std::vector<double> x;       // incumbent (ints exactly integral)
  double objective = 0.0;
  long nodes = 0;
  bool has_solution = false;   // an incumbent is attached
  std::vector<MilpNodeInfo> node_log;
};

/// Solves the LP relaxation (integrality dropped).
LpResult solve_lp(const MilpInstance& inst, const SolverConfig& cfg = {});

/// Exact branch-and-bound. `incumbent` optionally seeds the search with a
/// known feasible point (it is audited first); the returned objective is the
/// true mixed-integer optimum up to the configured tolerances either way.
MilpResult solve_milp(const MilpInstance& inst, const SolverConfig& cfg = {},
                      std::optional<std::span<const double>> incumbent = {});

}  // namespace lanegame
