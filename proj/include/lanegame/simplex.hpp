#pragma once

#include <span>
#include <vector>

#include "lanegame/milp.hpp"

namespace lanegame {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalError };

struct LpSummary {
  LpStatus status = LpStatus::NumericalError;
  double objective = 0.0;
  long iterations = 0;
};

/// Bounded-variable primal simplex with a composite phase 1 on the form
///   min c'x  s.t.  A x <= b,  lb <= x <= ub.
/// A slack is attached to every row; the basis is represented by the set of
/// basic structural columns S and the set of rows R whose slack is nonbasic,
/// so every solve only inverts the |S| x |S| core block A[R, S]. Pivots update
/// the explicit core inverse in O(k^2); the factorization is rebuilt
/// periodically and whenever a pivot looks unstable.
///
/// Deterministic: Dantzig pricing with lowest-index tie-breaking, switching to
/// Bland's rule after a stall. Bound changes keep the basis warm.
class Simplex {
 public:
  explicit Simplex(const MilpInstance& inst, double feas_tol = 1e-7);

  void set_bounds(int var, double lo, double hi);
  Interval var_bounds(int var) const { return {lb_[var], ub_[var]}; }

  LpSummary solve();

  double objective() const;
  std::span<const double> values() const { return {value_.data(), static_cast<size_t>(n_)}; }
  long total_iterations() const { return total_iters_; }

 private:
  enum class St : unsigned char { Lower, Upper, Basic, FreeNB };

  bool refactor();
  void reset_to_slack_basis();
  void recompute_values();
  double infeasibility() const;
  // w_S over core positions and w_sl over rows for B^-1 * (column of var e)
  void ftran(int e, std::vector<double>& wS, std::vector<double>& wSl) const;
  // y = B^-T c_B for the current phase costs
  void btran(bool phase1, std::vector<double>& y) const;
  double reduced_cost(int j, const std::vector<double>& y, bool phase1) const;

  int pick_entering(const std::vector<double>& y, bool phase1, bool bland,
                    int* dir_out) const;

  struct Ratio {
    double t = 0.0;
    int leaving = -1;   // variable index; -1 = bound flip
    bool to_upper = false;  // bound the leaving variable lands on
    bool unbounded = false;
  };
  Ratio ratio_test(int e, int dir, bool phase1, bool bland,
                   const std::vector<double>& wS,
                   const std::vector<double>& wSl) const;

  void apply_step(int e, int dir, const Ratio& r, const std::vector<double>& wS,
                  const std::vector<double>& wSl);
  bool pivot_basis(int e, int l, const std::vector<double>& wS,
                   const std::vector<double>& wSl);

  double& cinv(int q, int p) { return Cinv_[static_cast<size_t>(q) * k_ + p]; }
  double cinv(int q, int p) const { return Cinv_[static_cast<size_t>(q) * k_ + p]; }

  int n_ = 0, m_ = 0;
  double feas_tol_;
  std::vector<double> cost_;
  double cost_const_ = 0.0;
  std::vector<double> lb_, ub_;   // size n+m
  std::vector<double> rhs_;
  std::vector<std::vector<std::pair<int, double>>> rowA_;  // (col, coef)
  std::vector<std::vector<std::pair<int, double>>> colA_;  // (row, coef)

  std::vector<St> st_;
  std::vector<double> value_;
  std::vector<int> S_, R_;
  std::vector<int> posS_, posR_;
  std::vector<double> Cinv_;
  int k_ = 0;

  long total_iters_ = 0;
  int pivots_since_refactor_ = 0;
  bool values_dirty_ = true;

  // scratch buffers
  mutable std::vector<double> buf_y_, buf_wS_, buf_wSl_, buf_res_;
};

}  // namespace lanegame
