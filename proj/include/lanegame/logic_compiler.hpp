#pragma once

#include <array>
#include <span>
#include <vector>

#include "lanegame/milp.hpp"
#include "lanegame/mld_model.hpp"

namespace lanegame {

// ---------------------------------------------------------------------------
// Indicator-constraint patterns. Each takes the variable boxes of `inst` to
// derive the bounds M = max f, m = min f, and returns rows in the canonical
// `lhs <= rhs` orientation. eps is the strict-inequality tolerance.

/// [delta = 1] <=> [f(x) >= c]:  (c-m)d <= f-m,  (M-c+eps)d >= f-c+eps.
std::array<Constraint, 2> s_geq(const MilpInstance& inst, int delta,
                                const LinearExpr& f, double c, double eps);

/// [delta = 1] <=> [f(x) <= c]:  (M-c)d <= M-f,  (c+eps-m)d >= eps+c-f.
std::array<Constraint, 2> s_leq(const MilpInstance& inst, int delta,
                                const LinearExpr& f, double c, double eps);

/// [delta = 1] <=> [sigma = 1] AND [gamma = 1]. All three must be binary vars.
std::array<Constraint, 3> s_and(const MilpInstance& inst, int delta, int sigma,
                                int gamma);

/// [delta = 1] <=> [sigma = 1] OR [gamma = 1]. All three must be binary vars.
std::array<Constraint, 3> s_or(const MilpInstance& inst, int delta, int sigma,
                               int gamma);

/// [delta = 0] => [g = 0], [delta = 1] => [g = f(x)]:
///   m*d <= g <= M*d,  -M(1-d) <= g-f <= -m(1-d).
std::array<Constraint, 4> s_product(const MilpInstance& inst, int g,
                                    const LinearExpr& f, int delta);

// ---------------------------------------------------------------------------

/// A neighbor's published decisions over the horizon (index 0 holds step 1).
struct NeighborPlan {
  int id = 0;
  VehicleState state;        // the neighbor's state at time 0
  std::vector<double> v;     // planned speeds, size T
  std::vector<int> z;        // planned lanes, size T
  std::vector<int> a_l;      // planned left indicators, size T
  std::vector<int> a_r;      // planned right indicators, size T
};

/// Which coupling rules to compile. Counts match the formulas only when all
/// rules are enabled; disabling a rule drops its rows but keeps all variables.
struct RuleSet {
  bool free_space = true;
  bool lateral = true;
};

/// Per-vehicle MILP together with the symbol layout and the compile inputs.
struct CompiledPlanProblem {
  MilpInstance instance;
  int T = 0;
  std::vector<int> neighbor_ids;  // ascending; slot order of auxiliaries
  int n_own = 0;    // 1 + 4T
  int n_aux = 0;    // 21 * T * |N|
  int c_total = 0;  // emitted rows

  VehicleParams params;
  VehicleState state;
  WorldParams world;
  std::vector<NeighborPlan> neighbors;  // in slot order
  RuleSet rules;

  int num_neighbors() const { return static_cast<int>(neighbor_ids.size()); }
  int q_var() const { return 0; }
  int v_var(int t) const { return 1 + 4 * (t - 1); }
  int z_var(int t) const { return 2 + 4 * (t - 1); }
  int al_var(int t) const { return 3 + 4 * (t - 1); }
  int ar_var(int t) const { return 4 + 4 * (t - 1); }
  /// slot in [0, |N|), t in [1, T], any auxiliary Sym.
  int aux_var(Sym s, int slot, int t) const;
  /// Full lookup across own and auxiliary symbols (slot ignored for own).
  int var_of(Sym s, int slot, int t) const;
};

/// Builds the per-vehicle MILP from the paper's constraint systems:
/// epigraph rows, speed/lane windows, indicator exclusivity, and per-neighbor
/// safety-distance, free-space and lane-swap blocks through the S-patterns.
CompiledPlanProblem compile_vehicle_milp(const VehicleParams& params,
                                         const VehicleState& state,
                                         const WorldParams& world,
                                         const std::vector<NeighborPlan>& neighbors,
                                         RuleSet rules = {});

/// The auxiliary variables are functions of the decisions; this computes the
/// unique consistent full assignment for given decisions (q minimal). Throws
/// CompileError if a guarded quantity lands inside an eps band.
std::vector<double> consistent_assignment(const CompiledPlanProblem& cpp,
                                          std::span<const double> v,
                                          std::span<const int> z,
                                          std::span<const int> a_l,
                                          std::span<const int> a_r);

}  // namespace lanegame
