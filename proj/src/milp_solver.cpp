#include "lanegame/milp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace lanegame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneTol = 1e-9;

int var_tier(const VarInfo& v) {
  switch (v.sym) {
    case Sym::Z:
    case Sym::AL:
    case Sym::AR:
    case Sym::None:
      return 0;
    default:
      return 1;
  }
}

struct Search {
  const MilpInstance& inst;
  const SolverConfig& cfg;
  Simplex sx;
  std::vector<int> int_vars;
  std::vector<int> tier;  // parallel to int_vars

  bool has_incumbent = false;
  double best_obj = kInf;
  std::vector<double> best_x;
  long nodes = 0;
  bool limit_hit = false;
  bool numerical = false;
  std::vector<MilpNodeInfo> log;

  Search(const MilpInstance& i, const SolverConfig& c)
      : inst(i), cfg(c), sx(i, c.feas_tol) {
    for (int j = 0; j < i.num_vars(); ++j)
      if (i.vars[j].is_integral()) {
        int_vars.push_back(j);
        tier.push_back(var_tier(i.vars[j]));
      }
  }

  int pick_branch_var(std::span<const double> x) const {
    int best = -1;
    int best_tier = 1 << 20;
    double best_score = 0.0;  // distance to the nearest integer, in (tol, 0.5]
    for (size_t idx = 0; idx < int_vars.size(); ++idx) {
      const int j = int_vars[idx];
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f <= cfg.int_tol) continue;
      const int tr = cfg.priority_tiers ? tier[idx] : 0;
      if (best >= 0) {
        if (tr > best_tier) continue;
        if (tr == best_tier) {
          if (cfg.branching == BranchRule::FirstFractional) continue;
          if (f <= best_score + 1e-12) continue;  // ties keep the lowest index
        }
      }
      best = j;
      best_tier = tr;
      best_score = f;
    }
    return best;
  }

  // Fixes the integers to the rounded relaxation values and re-solves, so an
  // accepted incumbent carries exactly integral coordinates.
  void try_incumbent(std::span<const double> xrel) {
    std::vector<std::pair<int, Interval>> saved;
    saved.reserve(int_vars.size());
    for (int j : int_vars) {
      saved.push_back({j, sx.var_bounds(j)});
      const double r = std::round(xrel[j]);
      sx.set_bounds(j, r, r);
    }
    LpSummary s = sx.solve();
    if (s.status == LpStatus::Optimal && s.objective < best_obj - kPruneTol) {
      best_obj = s.objective;
      best_x.assign(sx.values().begin(), sx.values().end());
      for (int j : int_vars) best_x[j] = std::round(best_x[j]);
      has_incumbent = true;
    }
    for (const auto& [j, b] : saved) sx.set_bounds(j, b.lo, b.hi);
  }

  // Depth-first recursion; bounds are applied/undone around the recursion.
  void dfs() {
    if (limit_hit || numerical) return;
    if (++nodes > cfg.node_limit) {
      limit_hit = true;
      return;
    }
    LpSummary s = sx.solve();
    if (s.status == LpStatus::Infeasible) return;
    if (s.status == LpStatus::Unbounded) {
      numerical = true;  // finite boxes everywhere in supported instances
      return;
    }
    if (s.status != LpStatus::Optimal) {
      numerical = true;
      return;
    }
    if (cfg.keep_node_log)
      log.push_back({nodes, s.objective, best_obj, has_incumbent});
    if (has_incumbent && s.objective >= best_obj - kPruneTol) return;

    const int v = pick_branch_var(sx.values());
    if (v < 0) {
      try_incumbent(sx.values());
      return;
    }
    const double val = sx.values()[v];
    const double fl = std::floor(val);
    const Interval b = sx.var_bounds(v);
    const bool down_first = (val - fl) <= 0.5;

    auto child = [&](bool down) {
      const double lo = down ? b.lo : std::max(b.lo, fl + 1.0);
      const double hi = down ? std::min(b.hi, fl) : b.hi;
      if (lo > hi) return;  // empty child box
      sx.set_bounds(v, lo, hi);
      dfs();
      sx.set_bounds(v, b.lo, b.hi);
    };
    child(down_first);
    child(!down_first);
  }

  // Best-bound node pool; each node re-applies its bound path from the root.
  struct PoolNode {
    double bound;
    long seq;
    std::vector<std::pair<int, Interval>> path;
    std::vector<double> xrel;
  };

  void best_bound_search() {
    struct Cmp {
      bool operator()(const PoolNode& a, const PoolNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.seq > b.seq;
      }
    };
    std::priority_queue<PoolNode, std::vector<PoolNode>, Cmp> pool;
    std::vector<Interval> root_bounds;
    for (int j : int_vars) root_bounds.push_back(sx.var_bounds(j));
    auto reset_root = [&]() {
      for (size_t i = 0; i < int_vars.size(); ++i)
        sx.set_bounds(int_vars[i], root_bounds[i].lo, root_bounds[i].hi);
    };

    long seq = 0;
    auto expand = [&](const std::vector<std::pair<int, Interval>>& path) {
      if (limit_hit || numerical) return;
      if (++nodes > cfg.node_limit) {
        limit_hit = true;
        return;
      }
      reset_root();
      for (const auto& [j, b] : path) sx.set_bounds(j, b.lo, b.hi);
      LpSummary s = sx.solve();
      if (s.status == LpStatus::Infeasible) return;
      if (s.status != LpStatus::Optimal) {
        numerical = true;
        return;
      }
      if (cfg.keep_node_log)
        log.push_back({nodes, s.objective, best_obj, has_incumbent});
      if (has_incumbent && s.objective >= best_obj - kPruneTol) return;
      const int v = pick_branch_var(sx.values());
      if (v < 0) {
        try_incumbent(sx.values());
        return;
      }
      const double val = sx.values()[v];
      const double fl = std::floor(val);
      const Interval b = sx.var_bounds(v);
      PoolNode down{s.objective, ++seq, path, {}};
      down.path.push_back({v, {b.lo, std::min(b.hi, fl)}});
      PoolNode up{s.objective, ++seq, path, {}};
      up.path.push_back({v, {std::max(b.lo, fl + 1.0), b.hi}});
      if ((val - fl) <= 0.5) {
        pool.push(std::move(down));
        pool.push(std::move(up));
      } else {
        pool.push(std::move(up));
        pool.push(std::move(down));
      }
    };

    expand({});
    while (!pool.empty() && !limit_hit && !numerical) {
      PoolNode top = pool.top();
      pool.pop();
      if (has_incumbent && top.bound >= best_obj - kPruneTol) continue;
      expand(top.path);
    }
  }
};

}  // namespace

LpResult solve_lp(const MilpInstance& inst, const SolverConfig& cfg) {
  Simplex sx(inst, cfg.feas_tol);
  LpSummary s = sx.solve();
  LpResult out;
  out.status = s.status;
  out.objective = s.objective;
  out.iterations = s.iterations;
  out.x.assign(sx.values().begin(), sx.values().end());
  return out;
}

MilpResult solve_milp(const MilpInstance& inst, const SolverConfig& cfg,
                      std::optional<std::span<const double>> incumbent) {
  MilpResult out;
  Search search(inst, cfg);

  if (incumbent && static_cast<int>(incumbent->size()) == inst.num_vars()) {
    const double viol = inst.max_violation(*incumbent);
    const double ivol = inst.integrality_violation(*incumbent);
    if (viol <= 10 * cfg.feas_tol && ivol <= cfg.int_tol) {
      search.best_obj = inst.objective_value(*incumbent);
      search.best_x.assign(incumbent->begin(), incumbent->end());
      for (int j : search.int_vars) search.best_x[j] = std::round(search.best_x[j]);
      search.has_incumbent = true;
    }
  }

  // root LP decides unboundedness before any branching
  {
    LpSummary root = search.sx.solve();
    if (root.status == LpStatus::Unbounded) {
      out.status = MilpStatus::Unbounded;
      return out;
    }
    if (root.status == LpStatus::NumericalError ||
        root.status == LpStatus::IterationLimit) {
      out.status = MilpStatus::NumericalError;
      return out;
    }
  }

  if (cfg.node_order == NodeOrder::DepthFirst)
    search.dfs();
  else
    search.best_bound_search();

  out.nodes = search.nodes;
  out.node_log = std::move(search.log);
  if (search.numerical) {
    out.status = MilpStatus::NumericalError;
    return out;
  }
  if (search.limit_hit) {
    out.status = MilpStatus::NodeLimit;
    if (search.has_incumbent) {
      out.x = std::move(search.best_x);
      out.objective = search.best_obj;
      out.has_solution = true;
    }
    return out;
  }
  if (search.has_incumbent) {
    out.status = MilpStatus::Optimal;
    out.x = std::move(search.best_x);
    out.objective = search.best_obj;
    out.has_solution = true;
  } else {
    out.status = MilpStatus::Infeasible;
  }
  return out;
}

}  // namespace lanegame
