#include "lanegame/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lanegame {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr double kRatioTol = 1e-9;
constexpr int kRefactorEvery = 256;
}  // namespace

Simplex::Simplex(const MilpInstance& inst, double feas_tol)
    : n_(inst.num_vars()), m_(inst.num_rows()), feas_tol_(feas_tol) {
  cost_.assign(n_, 0.0);
  for (const auto& [v, c] : inst.objective.terms) cost_[v] = c;
  cost_const_ = inst.objective.constant;

  lb_.resize(n_ + m_);
  ub_.resize(n_ + m_);
  for (int j = 0; j < n_; ++j) {
    lb_[j] = inst.vars[j].lb;
    ub_[j] = inst.vars[j].ub;
  }
  for (int r = 0; r < m_; ++r) {
    lb_[n_ + r] = 0.0;
    ub_[n_ + r] = kInf;
  }

  rhs_.resize(m_);
  rowA_.resize(m_);
  colA_.resize(n_);
  for (int r = 0; r < m_; ++r) {
    const Constraint& c = inst.rows[r];
    rhs_[r] = c.rhs - c.lhs.constant;
    for (const auto& [v, coef] : c.lhs.terms) {
      rowA_[r].push_back({v, coef});
      colA_[v].push_back({r, coef});
    }
  }

  st_.resize(n_ + m_);
  value_.assign(n_ + m_, 0.0);
  posS_.assign(n_, -1);
  posR_.assign(m_, -1);
  reset_to_slack_basis();
}

void Simplex::reset_to_slack_basis() {
  S_.clear();
  R_.clear();
  std::fill(posS_.begin(), posS_.end(), -1);
  std::fill(posR_.begin(), posR_.end(), -1);
  Cinv_.clear();
  k_ = 0;
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lb_[j]))
      st_[j] = St::Lower;
    else if (std::isfinite(ub_[j]))
      st_[j] = St::Upper;
    else
      st_[j] = St::FreeNB;
  }
  for (int r = 0; r < m_; ++r) st_[n_ + r] = St::Basic;
  values_dirty_ = true;
  pivots_since_refactor_ = 0;
}

void Simplex::set_bounds(int var, double lo, double hi) {
  lb_[var] = lo;
  ub_[var] = hi;
  if (st_[var] != St::Basic) {
    double v = value_[var];
    if (st_[var] == St::FreeNB && (std::isfinite(lo) || std::isfinite(hi)))
      st_[var] = std::isfinite(lo) ? St::Lower : St::Upper;
    if (st_[var] == St::Lower) v = lo;
    if (st_[var] == St::Upper) v = hi;
    if (std::isfinite(lo) && v < lo) { v = lo; st_[var] = St::Lower; }
    if (std::isfinite(hi) && v > hi) { v = hi; st_[var] = St::Upper; }
    value_[var] = v;
  }
  values_dirty_ = true;
}

bool Simplex::refactor() {
  const int k = k_;
  if (k == 0) {
    Cinv_.clear();
    pivots_since_refactor_ = 0;
    return true;
  }
  // Gauss-Jordan on [A[R,S] | I]
  std::vector<double> M(static_cast<size_t>(k) * 2 * k, 0.0);
  auto at = [&](int r, int c) -> double& {
    return M[static_cast<size_t>(r) * 2 * k + c];
  };
  double scale = 1.0;
  for (int p = 0; p < k; ++p) {
    for (const auto& [j, coef] : rowA_[R_[p]]) {
      int q = posS_[j];
      if (q >= 0) {
        at(p, q) = coef;
        scale = std::max(scale, std::abs(coef));
      }
    }
    at(p, k + p) = 1.0;
  }
  const double sing_tol = 1e-11 * scale;
  for (int col = 0; col < k; ++col) {
    int piv = -1;
    double best = sing_tol;
    for (int r = col; r < k; ++r)
      if (std::abs(at(r, col)) > best) { best = std::abs(at(r, col)); piv = r; }
    if (piv < 0) return false;
    if (piv != col)
      for (int c = 0; c < 2 * k; ++c) std::swap(at(piv, c), at(col, c));
    const double inv = 1.0 / at(col, col);
    for (int c = 0; c < 2 * k; ++c) at(col, c) *= inv;
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < 2 * k; ++c) at(r, c) -= f * at(col, c);
    }
  }
  // after full elimination row q of the right half is the q-th row of
  // (A[R,S])^{-1}: x_S[q] = sum_p at(q, k+p) rhs[p]
  double worst = 0.0;
  Cinv_.assign(static_cast<size_t>(k) * k, 0.0);
  for (int q = 0; q < k; ++q)
    for (int p = 0; p < k; ++p) {
      cinv(q, p) = at(q, k + p);
      worst = std::max(worst, std::abs(at(q, k + p)));
    }
  pivots_since_refactor_ = 0;
  if (worst * scale > 1e13) return false;  // basis too ill-conditioned to trust
  return true;
}

void Simplex::recompute_values() {
  buf_res_.assign(m_, 0.0);
  for (int r = 0; r < m_; ++r) buf_res_[r] = rhs_[r];
  for (int j = 0; j < n_; ++j) {
    if (st_[j] == St::Basic) continue;
    double v = 0.0;
    if (st_[j] == St::Lower) v = lb_[j];
    else if (st_[j] == St::Upper) v = ub_[j];
    value_[j] = v;
    if (v != 0.0)
      for (const auto& [r, coef] : colA_[j]) buf_res_[r] -= coef * v;
  }
  for (int q = 0; q < k_; ++q) {
    double acc = 0.0;
    for (int p = 0; p < k_; ++p) acc += cinv(q, p) * buf_res_[R_[p]];
    value_[S_[q]] = acc;
  }
  for (int r = 0; r < m_; ++r) {
    if (posR_[r] >= 0) {
      value_[n_ + r] = 0.0;
      continue;
    }
    double acc = buf_res_[r];
    for (const auto& [j, coef] : rowA_[r]) {
      int q = posS_[j];
      if (q >= 0) acc -= coef * value_[j];
    }
    value_[n_ + r] = acc;
  }
  values_dirty_ = false;
}

double Simplex::infeasibility() const {
  double phi = 0.0;
  for (int q = 0; q < k_; ++q) {
    int j = S_[q];
    phi += std::max(0.0, lb_[j] - value_[j]) + std::max(0.0, value_[j] - ub_[j]);
  }
  for (int r = 0; r < m_; ++r) {
    if (posR_[r] >= 0) continue;
    int j = n_ + r;
    phi += std::max(0.0, lb_[j] - value_[j]) + std::max(0.0, value_[j] - ub_[j]);
  }
  // crossed boxes (possible after branching) make the problem infeasible
  // regardless of the basis
  for (int j = 0; j < n_; ++j)
    if (lb_[j] > ub_[j]) phi += lb_[j] - ub_[j];
  return phi;
}

void Simplex::ftran(int e, std::vector<double>& wS, std::vector<double>& wSl) const {
  wS.assign(k_, 0.0);
  wSl.assign(m_, 0.0);
  buf_res_.assign(k_, 0.0);
  if (e < n_) {
    for (const auto& [r, coef] : colA_[e]) {
      int p = posR_[r];
      if (p >= 0) buf_res_[p] = coef;
    }
  } else {
    int p = posR_[e - n_];
    if (p >= 0) buf_res_[p] = 1.0;
  }
  for (int q = 0; q < k_; ++q) {
    double acc = 0.0;
    for (int p = 0; p < k_; ++p) acc += cinv(q, p) * buf_res_[p];
    wS[q] = acc;
  }
  if (e < n_) {
    for (const auto& [r, coef] : colA_[e])
      if (posR_[r] < 0) wSl[r] = coef;
  } else if (posR_[e - n_] < 0) {
    wSl[e - n_] = 1.0;
  }
  for (int q = 0; q < k_; ++q) {
    const double w = wS[q];
    if (w == 0.0) continue;
    for (const auto& [r, coef] : colA_[S_[q]])
      if (posR_[r] < 0) wSl[r] -= coef * w;
  }
}

void Simplex::btran(bool phase1, std::vector<double>& y) const {
  y.assign(m_, 0.0);
  auto phase_cost = [&](int j) -> double {
    if (phase1) {
      if (value_[j] < lb_[j] - feas_tol_) return -1.0;
      if (value_[j] > ub_[j] + feas_tol_) return 1.0;
      return 0.0;
    }
    return j < n_ ? cost_[j] : 0.0;
  };
  for (int r = 0; r < m_; ++r)
    if (posR_[r] < 0) y[r] = phase_cost(n_ + r);
  buf_res_.assign(k_, 0.0);
  for (int q = 0; q < k_; ++q) {
    int j = S_[q];
    double acc = phase_cost(j);
    for (const auto& [r, coef] : colA_[j])
      if (posR_[r] < 0) acc -= coef * y[r];
    buf_res_[q] = acc;
  }
  for (int p = 0; p < k_; ++p) {
    double acc = 0.0;
    for (int q = 0; q < k_; ++q) acc += buf_res_[q] * cinv(q, p);
    y[R_[p]] = acc;
  }
}

double Simplex::reduced_cost(int j, const std::vector<double>& y, bool phase1) const {
  double d = phase1 ? 0.0 : (j < n_ ? cost_[j] : 0.0);
  if (j < n_) {
    for (const auto& [r, coef] : colA_[j]) d -= coef * y[r];
  } else {
    d -= y[j - n_];
  }
  return d;
}

int Simplex::pick_entering(const std::vector<double>& y, bool phase1, bool bland,
                           int* dir_out) const {
  int best = -1, best_dir = 0;
  double best_score = kDualTol;
  for (int j = 0; j < n_ + m_; ++j) {
    const St s = st_[j];
    if (s == St::Basic) continue;
    if (lb_[j] == ub_[j]) continue;
    const double d = reduced_cost(j, y, phase1);
    int dir = 0;
    if (s == St::Lower && d < -kDualTol) dir = 1;
    else if (s == St::Upper && d > kDualTol) dir = -1;
    else if (s == St::FreeNB && std::abs(d) > kDualTol) dir = d < 0 ? 1 : -1;
    if (dir == 0) continue;
    if (bland) {
      *dir_out = dir;
      return j;
    }
    const double score = std::abs(d);
    if (score > best_score + 1e-15) {
      best_score = score;
      best = j;
      best_dir = dir;
    }
  }
  *dir_out = best_dir;
  return best;
}

Simplex::Ratio Simplex::ratio_test(int e, int dir, bool /*phase1*/, bool bland,
                                   const std::vector<double>& wS,
                                   const std::vector<double>& wSl) const {
  // Two-pass Harris test: pass 1 finds the step allowed when every blocking
  // bound is relaxed by the feasibility tolerance, pass 2 picks the largest
  // pivot among the candidates whose exact breakpoint fits that step. Small
  // overshoots stay within feas_tol and are cleaned up by later refactors.
  Ratio out;
  struct Cand {
    int j;
    double t_exact;
    double t_relaxed;
    double w_abs;
    bool to_upper;
  };
  std::vector<Cand> cands;
  cands.reserve(32);

  auto consider = [&](int j, double w) {
    if (std::abs(w) < kPivotTol) return;
    const double rho = dir * w;  // x_j changes at rate -rho
    const double x = value_[j];
    double bound;
    bool hits_upper;
    if (rho > 0) {
      if (x > ub_[j] + feas_tol_) {
        bound = ub_[j];  // infeasible above, blocks at its upper bound
        hits_upper = true;
      } else if (x < lb_[j] - feas_tol_) {
        return;  // drifts further below; accounted in the phase-1 gradient
      } else if (std::isfinite(lb_[j])) {
        bound = lb_[j];
        hits_upper = false;
      } else {
        return;
      }
      cands.push_back({j, std::max(0.0, (x - bound) / rho),
                       (x - (bound - feas_tol_)) / rho, std::abs(w), hits_upper});
    } else {
      if (x < lb_[j] - feas_tol_) {
        bound = lb_[j];
        hits_upper = false;
      } else if (x > ub_[j] + feas_tol_) {
        return;
      } else if (std::isfinite(ub_[j])) {
        bound = ub_[j];
        hits_upper = true;
      } else {
        return;
      }
      cands.push_back({j, std::max(0.0, (bound - x) / (-rho)),
                       ((bound + feas_tol_) - x) / (-rho), std::abs(w),
                       hits_upper});
    }
  };

  for (int q = 0; q < k_; ++q) consider(S_[q], wS[q]);
  for (int r = 0; r < m_; ++r)
    if (posR_[r] < 0) consider(n_ + r, wSl[r]);

  double span = kInf;
  if (std::isfinite(lb_[e]) && std::isfinite(ub_[e])) span = ub_[e] - lb_[e];

  if (cands.empty()) {
    if (span == kInf) {
      out.unbounded = true;
      return out;
    }
    out.t = span;
    out.leaving = -1;
    return out;
  }

  double t_max = span;
  for (const Cand& c : cands) t_max = std::min(t_max, c.t_relaxed);

  int best = -1;
  for (size_t i = 0; i < cands.size(); ++i) {
    const Cand& c = cands[i];
    if (c.t_exact > t_max + kRatioTol) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const Cand& b = cands[best];
    const bool wins = bland ? (c.j < b.j)
                            : (c.w_abs > b.w_abs * (1 + 1e-9) ||
                               (c.w_abs >= b.w_abs * (1 - 1e-9) && c.j < b.j));
    if (wins) best = static_cast<int>(i);
  }
  if (best < 0) {
    // every breakpoint exceeds the entering span: bound flip
    out.t = span;
    out.leaving = -1;
    return out;
  }
  const Cand& c = cands[best];
  if (span <= c.t_exact) {
    out.t = span;
    out.leaving = -1;
    return out;
  }
  out.t = c.t_exact;
  out.leaving = c.j;
  out.to_upper = c.to_upper;
  return out;
}

bool Simplex::pivot_basis(int e, int l, const std::vector<double>& wS,
                          const std::vector<double>& wSl) {
  const bool e_struct = e < n_;
  const bool l_struct = l < n_;
  const int k = k_;

  if (e_struct && !l_struct) {
    // grow: the leaving slack's row joins the core, e joins S
    const int r_new = l - n_;
    const double sigma = wSl[r_new];
    if (std::abs(sigma) < kPivotTol) return false;
    std::vector<double> w2(k, 0.0);
    for (const auto& [j, coef] : rowA_[r_new]) {
      int q = posS_[j];
      if (q < 0) continue;
      for (int p = 0; p < k; ++p) w2[p] += coef * cinv(q, p);
    }
    std::vector<double> nc(static_cast<size_t>(k + 1) * (k + 1));
    auto nat = [&](int q, int p) -> double& {
      return nc[static_cast<size_t>(q) * (k + 1) + p];
    };
    for (int q = 0; q < k; ++q)
      for (int p = 0; p < k; ++p) nat(q, p) = cinv(q, p) + wS[q] * w2[p] / sigma;
    for (int q = 0; q < k; ++q) nat(q, k) = -wS[q] / sigma;
    for (int p = 0; p < k; ++p) nat(k, p) = -w2[p] / sigma;
    nat(k, k) = 1.0 / sigma;
    Cinv_ = std::move(nc);
    posS_[e] = k;
    posR_[r_new] = k;
    S_.push_back(e);
    R_.push_back(r_new);
    ++k_;
    return true;
  }

  if (e_struct && l_struct) {
    // replace the core column of l by the column of e
    const int pc = posS_[l];
    const double piv = wS[pc];
    if (std::abs(piv) < kPivotTol) return false;
    std::vector<double> oldrow(k);
    for (int p = 0; p < k; ++p) oldrow[p] = cinv(pc, p);
    for (int p = 0; p < k; ++p) cinv(pc, p) = oldrow[p] / piv;
    for (int q = 0; q < k; ++q) {
      if (q == pc) continue;
      const double f = wS[q] / piv;
      if (f == 0.0) continue;
      for (int p = 0; p < k; ++p) cinv(q, p) -= f * oldrow[p];
    }
    posS_[l] = -1;
    posS_[e] = pc;
    S_[pc] = e;
    return true;
  }

  if (!e_struct && l_struct) {
    // shrink: entering slack covers its row again, l leaves S
    const int pr = posR_[e - n_];
    const int pc = posS_[l];
    const double piv = cinv(pc, pr);
    if (std::abs(piv) < kPivotTol) return false;
    std::vector<double> nc(static_cast<size_t>(k - 1) * (k - 1));
    int qi = 0;
    for (int q = 0; q < k; ++q) {
      if (q == pc) continue;
      int pi = 0;
      for (int p = 0; p < k; ++p) {
        if (p == pr) continue;
        nc[static_cast<size_t>(qi) * (k - 1) + pi] =
            cinv(q, p) - cinv(q, pr) * cinv(pc, p) / piv;
        ++pi;
      }
      ++qi;
    }
    Cinv_ = std::move(nc);
    posS_[l] = -1;
    posR_[e - n_] = -1;
    S_.erase(S_.begin() + pc);
    R_.erase(R_.begin() + pr);
    --k_;
    for (int q = 0; q < k_; ++q) posS_[S_[q]] = q;
    for (int p = 0; p < k_; ++p) posR_[R_[p]] = p;
    return true;
  }

  // slack enters, slack leaves: replace core row
  {
    const int pr = posR_[e - n_];
    const int r_new = l - n_;
    std::vector<double> u(k, 0.0);
    for (const auto& [j, coef] : rowA_[r_new]) {
      int q = posS_[j];
      if (q < 0) continue;
      for (int p = 0; p < k; ++p) u[p] += coef * cinv(q, p);
    }
    const double piv = u[pr];
    if (std::abs(piv) < kPivotTol) return false;
    std::vector<double> oldcol(k);
    for (int q = 0; q < k; ++q) oldcol[q] = cinv(q, pr);
    for (int q = 0; q < k; ++q) cinv(q, pr) = oldcol[q] / piv;
    for (int p = 0; p < k; ++p) {
      if (p == pr) continue;
      const double f = u[p] / piv;
      if (f == 0.0) continue;
      for (int q = 0; q < k; ++q) cinv(q, p) -= f * oldcol[q];
    }
    posR_[e - n_] = -1;
    posR_[r_new] = pr;
    R_[pr] = r_new;
    return true;
  }
}

void Simplex::apply_step(int e, int dir, const Ratio& r,
                         const std::vector<double>& wS,
                         const std::vector<double>& wSl) {
  const double t = r.t;
  if (t != 0.0) {
    for (int q = 0; q < k_; ++q) value_[S_[q]] -= dir * t * wS[q];
    for (int rr = 0; rr < m_; ++rr)
      if (posR_[rr] < 0) value_[n_ + rr] -= dir * t * wSl[rr];
    value_[e] += dir * t;
  }
  if (r.leaving < 0) {
    st_[e] = dir > 0 ? St::Upper : St::Lower;
    value_[e] = dir > 0 ? ub_[e] : lb_[e];
    return;
  }
  const int l = r.leaving;
  value_[l] = r.to_upper ? ub_[l] : lb_[l];
  st_[l] = r.to_upper ? St::Upper : St::Lower;
  st_[e] = St::Basic;
  if (!pivot_basis(e, l, wS, wSl)) {
    if (!refactor() || !pivot_basis(e, l, wS, wSl)) {
      reset_to_slack_basis();
      refactor();
      recompute_values();
      return;
    }
  }
  if (++pivots_since_refactor_ >= kRefactorEvery) {
    if (!refactor()) {
      reset_to_slack_basis();
      refactor();
    }
    recompute_values();
  }
}

double Simplex::objective() const {
  double obj = cost_const_;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * value_[j];
  return obj;
}

LpSummary Simplex::solve() {
  LpSummary out;
  if (values_dirty_) recompute_values();

  const long iter_limit = 50000 + 20L * (n_ + m_);
  long iters = 0;
  bool bland = false;
  long stall = 0;
  double last_measure = kInf;
  int cur_phase = 0;
  int audits = 0;

  while (true) {
    if (iters++ > iter_limit) {
      out.status = LpStatus::IterationLimit;
      out.objective = objective();
      out.iterations = iters;
      return out;
    }
    ++total_iters_;

    const double phi = infeasibility();
    const bool phase1 = phi > feas_tol_;
    const int ph = phase1 ? 1 : 2;
    if (ph != cur_phase) {
      cur_phase = ph;
      bland = false;
      stall = 0;
      last_measure = kInf;
    }
    const double measure = phase1 ? phi : objective();
    if (measure < last_measure - 1e-10) {
      last_measure = measure;
      stall = 0;
    } else if (++stall > 1000) {
      bland = true;
    }

    btran(phase1, buf_y_);
    int dir = 0;
    const int e = pick_entering(buf_y_, phase1, bland, &dir);
    if (e < 0) {
      if (audits < 2) {
        ++audits;
        if (!refactor()) {
          reset_to_slack_basis();
          refactor();
        }
        recompute_values();
        cur_phase = 0;
        continue;
      }
      const bool still_infeasible = infeasibility() > feas_tol_;
      out.status = still_infeasible ? LpStatus::Infeasible : LpStatus::Optimal;
      out.objective = objective();
      out.iterations = iters;
      return out;
    }

    ftran(e, buf_wS_, buf_wSl_);
    const Ratio r = ratio_test(e, dir, phase1, bland, buf_wS_, buf_wSl_);
    if (r.unbounded) {
      if (phase1) {
        out.status = LpStatus::NumericalError;
        out.objective = objective();
        out.iterations = iters;
        return out;
      }
      out.status = LpStatus::Unbounded;
      out.objective = objective();
      out.iterations = iters;
      return out;
    }
    apply_step(e, dir, r, buf_wS_, buf_wSl_);
    audits = 0;
  }
}

}  // namespace lanegame
