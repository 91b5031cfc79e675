#include "lanegame/logic_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lanegame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(const MilpInstance& inst, const LinearExpr& f,
                    const Interval& b, const char* where) {
  if (std::isfinite(b.lo) && std::isfinite(b.hi)) return;
  for (const auto& [v, c] : f.terms) {
    if (!std::isfinite(inst.vars[v].lb) || !std::isfinite(inst.vars[v].ub)) {
      throw CompileError(std::string(where) + ": unbounded variable x" +
                         std::to_string(v) + " in guarded expression");
    }
  }
  throw CompileError(std::string(where) + ": unbounded guarded expression");
}

void require_binary(const MilpInstance& inst, int var, const char* where) {
  if (var < 0 || var >= inst.num_vars() ||
      inst.vars[var].kind != VarKind::Binary)
    throw CompileError(std::string(where) + ": x" + std::to_string(var) +
                       " is not a binary variable");
}

}  // namespace

std::array<Constraint, 2> s_geq(const MilpInstance& inst, int delta,
                                const LinearExpr& f, double c, double eps) {
  require_binary(inst, delta, "s_geq");
  Interval b = inst.expr_bounds(f);
  require_finite(inst, f, b, "s_geq");
  const double m = b.lo, M = b.hi;
  // (c - m) delta <= f - m   ->   (c-m) delta - f <= -m
  Constraint r1;
  r1.lhs.add(delta, c - m);
  r1.lhs.add(f, -1.0);
  r1.rhs = -m - r1.lhs.constant;
  r1.lhs.constant = 0.0;
  // (M - c + eps) delta >= f - c + eps   ->   f - (M-c+eps) delta <= c - eps
  Constraint r2;
  r2.lhs.add(f);
  r2.lhs.add(delta, -(M - c + eps));
  r2.rhs = c - eps - r2.lhs.constant;
  r2.lhs.constant = 0.0;
  return {r1, r2};
}

std::array<Constraint, 2> s_leq(const MilpInstance& inst, int delta,
                                const LinearExpr& f, double c, double eps) {
  require_binary(inst, delta, "s_leq");
  Interval b = inst.expr_bounds(f);
  require_finite(inst, f, b, "s_leq");
  const double m = b.lo, M = b.hi;
  // (M - c) delta <= M - f   ->   (M-c) delta + f <= M
  Constraint r1;
  r1.lhs.add(delta, M - c);
  r1.lhs.add(f);
  r1.rhs = M - r1.lhs.constant;
  r1.lhs.constant = 0.0;
  // (c + eps - m) delta >= eps + c - f   ->   -f - (c+eps-m) delta <= -(c+eps)
  Constraint r2;
  r2.lhs.add(f, -1.0);
  r2.lhs.add(delta, -(c + eps - m));
  r2.rhs = -(c + eps) - r2.lhs.constant;
  r2.lhs.constant = 0.0;
  return {r1, r2};
}

namespace {

// AND/OR rows over expressions; public wrappers validate variable arguments.
std::array<Constraint, 3> and_rows(int delta, const LinearExpr& sigma,
                                   const LinearExpr& gamma) {
  Constraint r1, r2, r3;
  r1.lhs.add(delta, 1.0);
  r1.lhs.add(sigma, -1.0);
  r1.rhs = -r1.lhs.constant;
  r1.lhs.constant = 0.0;
  r2.lhs.add(delta, 1.0);
  r2.lhs.add(gamma, -1.0);
  r2.rhs = -r2.lhs.constant;
  r2.lhs.constant = 0.0;
  r3.lhs.add(sigma);
  r3.lhs.add(gamma);
  r3.lhs.add(delta, -1.0);
  r3.rhs = 1.0 - r3.lhs.constant;
  r3.lhs.constant = 0.0;
  return {r1, r2, r3};
}

std::array<Constraint, 3> or_rows(int delta, const LinearExpr& sigma,
                                  const LinearExpr& gamma) {
  Constraint r1, r2, r3;
  r1.lhs.add(sigma);
  r1.lhs.add(delta, -1.0);
  r1.rhs = -r1.lhs.constant;
  r1.lhs.constant = 0.0;
  r2.lhs.add(gamma);
  r2.lhs.add(delta, -1.0);
  r2.rhs = -r2.lhs.constant;
  r2.lhs.constant = 0.0;
  r3.lhs.add(delta, 1.0);
  r3.lhs.add(sigma, -1.0);
  r3.lhs.add(gamma, -1.0);
  r3.rhs = -r3.lhs.constant;
  r3.lhs.constant = 0.0;
  return {r1, r2, r3};
}

}  // namespace

std::array<Constraint, 3> s_and(const MilpInstance& inst, int delta, int sigma,
                                int gamma) {
  require_binary(inst, delta, "s_and");
  require_binary(inst, sigma, "s_and");
  require_binary(inst, gamma, "s_and");
  return and_rows(delta, var_expr(sigma), var_expr(gamma));
}

std::array<Constraint, 3> s_or(const MilpInstance& inst, int delta, int sigma,
                               int gamma) {
  require_binary(inst, delta, "s_or");
  require_binary(inst, sigma, "s_or");
  require_binary(inst, gamma, "s_or");
  return or_rows(delta, var_expr(sigma), var_expr(gamma));
}

std::array<Constraint, 4> s_product(const MilpInstance& inst, int g,
                                    const LinearExpr& f, int delta) {
  require_binary(inst, delta, "s_product");
  Interval b = inst.expr_bounds(f);
  require_finite(inst, f, b, "s_product");
  const double m = b.lo, M = b.hi;
  Constraint r1, r2, r3, r4;
  // m delta - g <= 0
  r1.lhs.add(delta, m);
  r1.lhs.add(g, -1.0);
  r1.rhs = 0.0;
  // g - M delta <= 0
  r2.lhs.add(g, 1.0);
  r2.lhs.add(delta, -M);
  r2.rhs = 0.0;
  // f - g + M delta <= M
  r3.lhs.add(f);
  r3.lhs.add(g, -1.0);
  r3.lhs.add(delta, M);
  r3.rhs = M - r3.lhs.constant;
  r3.lhs.constant = 0.0;
  // g - f - m delta <= -m
  r4.lhs.add(g, 1.0);
  r4.lhs.add(f, -1.0);
  r4.lhs.add(delta, -m);
  r4.rhs = -m - r4.lhs.constant;
  r4.lhs.constant = 0.0;
  return {r1, r2, r3, r4};
}

// ---------------------------------------------------------------------------

namespace {

// Offsets of the 21 per-(neighbor, step) auxiliaries.
constexpr Sym kAuxOrder[21] = {
    Sym::Eta,  Sym::Theta, Sym::Alpha, Sym::Beta, Sym::Xi,
    Sym::Kappa, Sym::Lambda, Sym::Gamma, Sym::Delta, Sym::Mu,
    Sym::Nu,   Sym::Zeta,  Sym::Phi,   Sym::Psi,
    Sym::F,    Sym::G,     Sym::Hh,    Sym::K,     Sym::Mm,
    Sym::P,    Sym::S};

int aux_offset(Sym s) {
  for (int k = 0; k < 21; ++k)
    if (kAuxOrder[k] == s) return k;
  return -1;
}

bool fixed_one(const MilpInstance& inst, int var) {
  return inst.vars[var].lb > 0.5;
}
bool fixed_zero(const MilpInstance& inst, int var) {
  return inst.vars[var].ub < 0.5;
}

/// Truth value of a (possibly constant) binary expression over the boxes:
/// 1, 0, or -1 when undetermined.
int expr_truth(const MilpInstance& inst, const LinearExpr& e) {
  Interval b = inst.expr_bounds(e);
  if (b.lo > 0.5) return 1;
  if (b.hi < 0.5) return 0;
  return -1;
}

class Builder {
 public:
  Builder(const VehicleParams& params, const VehicleState& state,
          const WorldParams& world, std::vector<NeighborPlan> neighbors,
          RuleSet rules)
      : p_(params), s_(state), w_(world), nbrs_(std::move(neighbors)),
        rules_(rules) {}

  CompiledPlanProblem build();

 private:
  void validate() const;
  void create_vars();
  void emit_own_rows();
  void emit_aux_block(int slot, int t);

  // Affine expressions of the model quantities over instance variables.
  LinearExpr v_own(int t) const;   // t in 0..T
  LinearExpr z_own(int t) const;
  LinearExpr al_own(int t) const;
  LinearExpr dist(int slot, int t) const;   // d_{i,j}(t), t in 0..T
  LinearExpr lane_diff(int slot, int t) const;
  LinearExpr safety_dist(int t) const;      // d0 + h * v_i(t)
  double neighbor_v(int slot, int t) const; // t in 0..T
  double neighbor_z(int slot, int t) const;
  double neighbor_ar(int slot, int t) const;

  void fix_binary(int var, int value) {
    cpp_.instance.vars[var].lb = value;
    cpp_.instance.vars[var].ub = value;
  }
  // Propagates box fixes after an iff-pattern for `delta` guarding f {>=,<=} c.
  void settle_geq(int delta, const LinearExpr& f, double c, const char* what);
  void settle_leq(int delta, const LinearExpr& f, double c, const char* what);
  void settle_and(int delta, const LinearExpr& sigma, const LinearExpr& gamma);
  void settle_or(int delta, const LinearExpr& sigma, const LinearExpr& gamma);
  // Tightens the product variable's box from its controlling binary.
  void settle_product(int g, const LinearExpr& f, int delta);

  const VehicleParams& p_;
  const VehicleState& s_;
  const WorldParams& w_;
  std::vector<NeighborPlan> nbrs_;
  RuleSet rules_;
  CompiledPlanProblem cpp_;
};

LinearExpr Builder::v_own(int t) const {
  if (t == 0) return LinearExpr(s_.v);
  return var_expr(cpp_.v_var(t));
}

LinearExpr Builder::z_own(int t) const {
  if (t == 0) return LinearExpr(static_cast<double>(s_.z));
  return var_expr(cpp_.z_var(t));
}

LinearExpr Builder::al_own(int t) const {
  if (t == 0) return LinearExpr(static_cast<double>(s_.a_l));
  return var_expr(cpp_.al_var(t));
}

double Builder::neighbor_v(int slot, int t) const {
  return t == 0 ? nbrs_[slot].state.v : nbrs_[slot].v[t - 1];
}
double Builder::neighbor_z(int slot, int t) const {
  return t == 0 ? nbrs_[slot].state.z : nbrs_[slot].z[t - 1];
}
double Builder::neighbor_ar(int slot, int t) const {
  return t == 0 ? nbrs_[slot].state.a_r : nbrs_[slot].a_r[t - 1];
}

LinearExpr Builder::dist(int slot, int t) const {
  // d(t) = d(0) + tau * sum_{s=0}^{t-1} (v_j(s) - v_i(s))
  LinearExpr d(nbrs_[slot].state.pos - s_.pos);
  for (int u = 0; u < t; ++u) {
    d.constant += w_.tau * neighbor_v(slot, u);
    d.add(v_own(u), -w_.tau);
  }
  return d;
}

LinearExpr Builder::lane_diff(int slot, int t) const {
  LinearExpr l(neighbor_z(slot, t));
  l.add(z_own(t), -1.0);
  return l;
}

LinearExpr Builder::safety_dist(int t) const {
  LinearExpr e(p_.d0);
  e.add(v_own(t), p_.h);
  return e;
}

void Builder::validate() const {
  if (w_.T < 1) throw CompileError("compile: horizon T must be >= 1");
  if (w_.L < 1) throw CompileError("compile: lane count L must be >= 1");
  if (w_.tau <= 0) throw CompileError("compile: tau must be positive");
  if (p_.v_max <= 0 || p_.delta <= 0 || p_.r <= 0 || p_.d0 <= 0 || p_.h < 0)
    throw CompileError("compile: invalid vehicle parameters for id " +
                       std::to_string(p_.id));
  if (s_.v < 0 || s_.v > p_.v_max)
    throw CompileError("compile: initial speed outside [0, v_max] for id " +
                       std::to_string(p_.id));
  if (s_.z < 1 || s_.z > w_.L)
    throw CompileError("compile: initial lane outside {1..L} for id " +
                       std::to_string(p_.id));
  if (s_.a_l + s_.a_r > 1 || s_.a_l < 0 || s_.a_r < 0)
    throw CompileError("compile: invalid indicator state for id " +
                       std::to_string(p_.id));
  if (static_cast<int>(p_.v_ref.size()) < w_.T ||
      static_cast<int>(p_.z_ref.size()) < w_.T)
    throw CompileError("compile: reference profiles shorter than horizon for id " +
                       std::to_string(p_.id));
  for (int t = 0; t < w_.T; ++t) {
    if (p_.v_ref[t] < 0 || p_.v_ref[t] > p_.v_max)
      throw CompileError("compile: v_ref outside [0, v_max] for id " +
                         std::to_string(p_.id));
    if (p_.z_ref[t] < 1 || p_.z_ref[t] > w_.L)
      throw CompileError("compile: z_ref outside {1..L} for id " +
                         std::to_string(p_.id));
  }
  for (const auto& nb : nbrs_) {
    if (static_cast<int>(nb.v.size()) != w_.T ||
        static_cast<int>(nb.z.size()) != w_.T ||
        static_cast<int>(nb.a_l.size()) != w_.T ||
        static_cast<int>(nb.a_r.size()) != w_.T)
      throw CompileError("compile: missing or short neighbor plan for id " +
                         std::to_string(nb.id));
  }
}

void Builder::create_vars() {
  MilpInstance& inst = cpp_.instance;
  const int T = w_.T;

  // Reachable speed and lane boxes per step; the step-1 lane box is pinned by
  // the indicator state.
  std::vector<Interval> vbox(T + 1);
  std::vector<LaneInterval> zbox(T + 1);
  vbox[0] = {s_.v, s_.v};
  zbox[0] = {s_.z, s_.z};
  for (int t = 1; t <= T; ++t) {
    vbox[t] = {std::max(0.0, vbox[t - 1].lo - p_.delta),
               std::min(p_.v_max, vbox[t - 1].hi + p_.delta)};
    if (t == 1)
      zbox[1] = lane_window(s_.z, s_.a_l, s_.a_r, w_.L);
    else
      zbox[t] = {std::max(1, zbox[t - 1].lo - 1),
                 std::min(w_.L, zbox[t - 1].hi + 1)};
  }

  double q_up = 0.0;
  for (int t = 1; t <= T; ++t) {
    q_up = std::max(q_up, std::max(std::abs(vbox[t].lo - p_.v_ref[t - 1]),
                                   std::abs(vbox[t].hi - p_.v_ref[t - 1])));
    q_up = std::max(q_up,
                    p_.r * std::max(std::abs(double(zbox[t].lo - p_.z_ref[t - 1])),
                                    std::abs(double(zbox[t].hi - p_.z_ref[t - 1]))));
  }

  inst.add_var(VarKind::Continuous, 0.0, q_up, Sym::Q);
  for (int t = 1; t <= T; ++t) {
    inst.add_var(VarKind::Continuous, vbox[t].lo, vbox[t].hi, Sym::V, -1, t);
    inst.add_var(VarKind::Integer, zbox[t].lo, zbox[t].hi, Sym::Z, -1, t);
    inst.add_var(VarKind::Binary, 0.0, 1.0, Sym::AL, -1, t);
    inst.add_var(VarKind::Binary, 0.0, 1.0, Sym::AR, -1, t);
  }
  cpp_.n_own = 1 + 4 * T;

  for (int slot = 0; slot < static_cast<int>(nbrs_.size()); ++slot) {
    for (int t = 1; t <= T; ++t) {
      for (Sym sym : kAuxOrder) {
        switch (sym) {
          case Sym::F:
          case Sym::Hh: {
            Interval b = inst.expr_bounds(dist(slot, t));
            inst.add_var(VarKind::Continuous, std::min(b.lo, 0.0),
                         std::max(b.hi, 0.0), sym, slot, t);
            break;
          }
          case Sym::G: {
            Interval b = inst.expr_bounds(safety_dist(t));
            inst.add_var(VarKind::Continuous, std::min(b.lo, 0.0),
                         std::max(b.hi, 0.0), sym, slot, t);
            break;
          }
          case Sym::K:
          case Sym::Mm:
            inst.add_var(VarKind::Continuous, 0.0, vbox[t].hi, sym, slot, t);
            break;
          case Sym::P:
            inst.add_var(VarKind::Continuous, 0.0, zbox[t - 1].hi, sym, slot, t);
            break;
          case Sym::S:
            inst.add_var(VarKind::Continuous, 0.0, zbox[t].hi, sym, slot, t);
            break;
          default:
            inst.add_var(VarKind::Binary, 0.0, 1.0, sym, slot, t);
        }
      }
    }
  }
  cpp_.n_aux = 21 * T * static_cast<int>(nbrs_.size());
}

void Builder::emit_own_rows() {
  MilpInstance& inst = cpp_.instance;
  const int T = w_.T;
  const int q = cpp_.q_var();
  for (int t = 1; t <= T; ++t) {
    const double vd = p_.v_ref[t - 1];
    const double zd = p_.z_ref[t - 1];
    // |v(t) - vd| <= q
    inst.add_row(var_expr(cpp_.v_var(t)).add(q, -1.0), vd);
    inst.add_row(var_expr(cpp_.v_var(t), -1.0).add(q, -1.0), -vd);
    // r |z(t) - zd| <= q
    inst.add_row(var_expr(cpp_.z_var(t), p_.r).add(q, -1.0), p_.r * zd);
    inst.add_row(var_expr(cpp_.z_var(t), -p_.r).add(q, -1.0), -p_.r * zd);
    // |v(t) - v(t-1)| <= delta
    {
      LinearExpr up = v_own(t);
      up.add(v_own(t - 1), -1.0);
      double rhs = p_.delta - up.constant;
      up.constant = 0.0;
      inst.add_row(up, rhs);
      LinearExpr dn = v_own(t - 1);
      dn.add(v_own(t), -1.0);
      rhs = p_.delta - dn.constant;
      dn.constant = 0.0;
      inst.add_row(dn, rhs);
    }
    // z(t) - z(t-1) <= a_l(t-1), z(t-1) - z(t) <= a_r(t-1)
    {
      LinearExpr up = z_own(t);
      up.add(z_own(t - 1), -1.0);
      if (t == 1) {
        double rhs = s_.a_l - up.constant;
        up.constant = 0.0;
        inst.add_row(up, rhs);
      } else {
        up.add(cpp_.al_var(t - 1), -1.0);
        double rhs = -up.constant;
        up.constant = 0.0;
        inst.add_row(up, rhs);
      }
      LinearExpr dn = z_own(t - 1);
      dn.add(z_own(t), -1.0);
      if (t == 1) {
        double rhs = s_.a_r - dn.constant;
        dn.constant = 0.0;
        inst.add_row(dn, rhs);
      } else {
        dn.add(cpp_.ar_var(t - 1), -1.0);
        double rhs = -dn.constant;
        dn.constant = 0.0;
        inst.add_row(dn, rhs);
      }
    }
    // a_l(t) + a_r(t) <= 1
    inst.add_row(var_expr(cpp_.al_var(t)).add(cpp_.ar_var(t), 1.0), 1.0);
  }
}

void Builder::settle_geq(int delta, const LinearExpr& f, double c,
                         const char* what) {
  MilpInstance& inst = cpp_.instance;
  Interval b = inst.expr_bounds(f);
  if (b.lo >= c) {
    fix_binary(delta, 1);
  } else if (b.hi < c) {
    if (b.lo == b.hi && b.hi > c - w_.eps_strict)
      throw CompileError(std::string("compile: constant guard for ") + what +
                         " falls inside the eps band");
    fix_binary(delta, 0);
  }
}

void Builder::settle_leq(int delta, const LinearExpr& f, double c,
                         const char* what) {
  MilpInstance& inst = cpp_.instance;
  Interval b = inst.expr_bounds(f);
  if (b.hi <= c) {
    fix_binary(delta, 1);
  } else if (b.lo > c) {
    if (b.lo == b.hi && b.lo < c + w_.eps_strict)
      throw CompileError(std::string("compile: constant guard for ") + what +
                         " falls inside the eps band");
    fix_binary(delta, 0);
  }
}

void Builder::settle_and(int delta, const LinearExpr& sigma,
                         const LinearExpr& gamma) {
  int ts = expr_truth(cpp_.instance, sigma);
  int tg = expr_truth(cpp_.instance, gamma);
  if (ts == 0 || tg == 0)
    fix_binary(delta, 0);
  else if (ts == 1 && tg == 1)
    fix_binary(delta, 1);
}

void Builder::settle_or(int delta, const LinearExpr& sigma,
                        const LinearExpr& gamma) {
  int ts = expr_truth(cpp_.instance, sigma);
  int tg = expr_truth(cpp_.instance, gamma);
  if (ts == 1 || tg == 1)
    fix_binary(delta, 1);
  else if (ts == 0 && tg == 0)
    fix_binary(delta, 0);
}

void Builder::settle_product(int g, const LinearExpr& f, int delta) {
  MilpInstance& inst = cpp_.instance;
  if (fixed_zero(inst, delta)) {
    inst.vars[g].lb = 0.0;
    inst.vars[g].ub = 0.0;
  } else if (fixed_one(inst, delta)) {
    Interval b = inst.expr_bounds(f);
    inst.vars[g].lb = b.lo;
    inst.vars[g].ub = b.hi;
  }
}

void Builder::emit_aux_block(int slot, int t) {
  MilpInstance& inst = cpp_.instance;
  const double eps = w_.eps_strict;
  const double tau = w_.tau;
  auto add = [&](const auto& rows_arr) {
    for (const auto& r : rows_arr) inst.add_row(r.lhs, r.rhs);
  };

  const int eta = cpp_.aux_var(Sym::Eta, slot, t);
  const int theta = cpp_.aux_var(Sym::Theta, slot, t);
  const int alpha = cpp_.aux_var(Sym::Alpha, slot, t);
  const int beta = cpp_.aux_var(Sym::Beta, slot, t);
  const int xi = cpp_.aux_var(Sym::Xi, slot, t);
  const int kap = cpp_.aux_var(Sym::Kappa, slot, t);
  const int lam = cpp_.aux_var(Sym::Lambda, slot, t);
  const int gam = cpp_.aux_var(Sym::Gamma, slot, t);
  const int del = cpp_.aux_var(Sym::Delta, slot, t);
  const int mu = cpp_.aux_var(Sym::Mu, slot, t);
  const int nu = cpp_.aux_var(Sym::Nu, slot, t);
  const int zet = cpp_.aux_var(Sym::Zeta, slot, t);
  const int phi = cpp_.aux_var(Sym::Phi, slot, t);
  const int psi = cpp_.aux_var(Sym::Psi, slot, t);
  const int f = cpp_.aux_var(Sym::F, slot, t);
  const int g = cpp_.aux_var(Sym::G, slot, t);
  const int h = cpp_.aux_var(Sym::Hh, slot, t);
  const int k = cpp_.aux_var(Sym::K, slot, t);
  const int m = cpp_.aux_var(Sym::Mm, slot, t);
  const int p = cpp_.aux_var(Sym::P, slot, t);
  const int s = cpp_.aux_var(Sym::S, slot, t);

  const LinearExpr l_t = lane_diff(slot, t);
  const LinearExpr l_prev = lane_diff(slot, t - 1);
  const LinearExpr d_t = dist(slot, t);
  const LinearExpr d_prev = dist(slot, t - 1);
  const LinearExpr ds_t = safety_dist(t);
  const LinearExpr v_t = v_own(t);

  // [alpha=1] <=> [l(t)=0], split over eta (<=0) and theta (>=0)
  add(s_leq(inst, eta, l_t, 0.0, eps));
  settle_leq(eta, l_t, 0.0, "eta");
  add(s_geq(inst, theta, l_t, 0.0, eps));
  settle_geq(theta, l_t, 0.0, "theta");
  add(and_rows(alpha, var_expr(eta), var_expr(theta)));
  settle_and(alpha, var_expr(eta), var_expr(theta));

  // [beta=1] <=> [d(t) >= 0]
  add(s_geq(inst, beta, d_t, 0.0, eps));
  settle_geq(beta, d_t, 0.0, "beta");

  // [gamma=1] <=> [l(t-1)=1], via kappa (<=1) and lambda (>=1)
  add(s_leq(inst, kap, l_prev, 1.0, eps));
  settle_leq(kap, l_prev, 1.0, "kappa");
  add(s_geq(inst, lam, l_prev, 1.0, eps));
  settle_geq(lam, l_prev, 1.0, "lambda");
  add(and_rows(gam, var_expr(kap), var_expr(lam)));
  settle_and(gam, var_expr(kap), var_expr(lam));

  // [delta=1] <=> own left indicator and neighbor right indicator at t-1
  const LinearExpr al_prev = al_own(t - 1);
  const LinearExpr ar_nb(neighbor_ar(slot, t - 1));
  add(and_rows(del, al_prev, ar_nb));
  settle_and(del, al_prev, ar_nb);

  // [zeta=1] <=> [d(t-1) <= d_hat] OR [d(t-1) >= -d_hat]
  add(s_leq(inst, mu, d_prev, w_.d_hat, eps));
  settle_leq(mu, d_prev, w_.d_hat, "mu");
  add(s_geq(inst, nu, d_prev, -w_.d_hat, eps));
  settle_geq(nu, d_prev, -w_.d_hat, "nu");
  add(or_rows(zet, var_expr(mu), var_expr(nu)));
  settle_or(zet, var_expr(mu), var_expr(nu));

  // xi = alpha AND beta
  add(and_rows(xi, var_expr(alpha), var_expr(beta)));
  settle_and(xi, var_expr(alpha), var_expr(beta));

  // products f = xi d, g = alpha ds, h = alpha d
  add(s_product(inst, f, d_t, xi));
  settle_product(f, d_t, xi);
  add(s_product(inst, g, ds_t, alpha));
  settle_product(g, ds_t, alpha);
  add(s_product(inst, h, d_t, alpha));
  settle_product(h, d_t, alpha);

  // linearized safety distance: -2f + g + h <= 0
  {
    LinearExpr row;
    row.add(f, -2.0);
    row.add(g, 1.0);
    row.add(h, 1.0);
    inst.add_row(row, 0.0);
  }

  if (rules_.free_space) {
    // products k = xi v, m = alpha v
    add(s_product(inst, k, v_t, xi));
    settle_product(k, v_t, xi);
    add(s_product(inst, m, v_t, alpha));
    settle_product(m, v_t, alpha);
    // 2 tau (2k - m) - 2f + g + h + 2 tau (alpha - 2 xi) v_j(t) <= 0
    LinearExpr row;
    const double vj = neighbor_v(slot, t);
    row.add(k, 4.0 * tau);
    row.add(m, -2.0 * tau);
    row.add(f, -2.0);
    row.add(g, 1.0);
    row.add(h, 1.0);
    row.add(alpha, 2.0 * tau * vj);
    row.add(xi, -4.0 * tau * vj);
    inst.add_row(row, 0.0);
  }

  if (rules_.lateral) {
    // phi = gamma AND delta, psi = zeta AND phi
    add(and_rows(phi, var_expr(gam), var_expr(del)));
    settle_and(phi, var_expr(gam), var_expr(del));
    add(and_rows(psi, var_expr(zet), var_expr(phi)));
    settle_and(psi, var_expr(zet), var_expr(phi));
    // p = psi z(t-1), s = psi z(t); lane kept when psi = 1
    add(s_product(inst, p, z_own(t - 1), psi));
    settle_product(p, z_own(t - 1), psi);
    add(s_product(inst, s, z_own(t), psi));
    settle_product(s, z_own(t), psi);
    LinearExpr fr1;
    fr1.add(s, -1.0);
    fr1.add(p, 1.0);
    inst.add_row(fr1, 0.0);
    LinearExpr fr2;
    fr2.add(s, 1.0);
    fr2.add(p, -1.0);
    inst.add_row(fr2, 0.0);
  }
}

CompiledPlanProblem Builder::build() {
  validate();
  std::sort(nbrs_.begin(), nbrs_.end(),
            [](const NeighborPlan& a, const NeighborPlan& b) { return a.id < b.id; });
  cpp_.T = w_.T;
  cpp_.params = p_;
  cpp_.state = s_;
  cpp_.world = w_;
  cpp_.rules = rules_;
  cpp_.neighbors = nbrs_;
  for (const auto& nb : nbrs_) cpp_.neighbor_ids.push_back(nb.id);

  create_vars();
  cpp_.instance.objective = var_expr(cpp_.q_var());
  emit_own_rows();
  for (int slot = 0; slot < static_cast<int>(nbrs_.size()); ++slot)
    for (int t = 1; t <= w_.T; ++t) emit_aux_block(slot, t);

  cpp_.c_total = cpp_.instance.num_rows();
  const int n_expected = 1 + w_.T * (21 * static_cast<int>(nbrs_.size()) + 4);
  if (cpp_.instance.num_vars() != n_expected)
    throw std::logic_error("compiled variable count mismatch");
  if (rules_.free_space && rules_.lateral) {
    const int c_expected = w_.T * (67 * static_cast<int>(nbrs_.size()) + 9);
    if (cpp_.c_total != c_expected)
      throw std::logic_error("compiled constraint count mismatch");
  }
  return std::move(cpp_);
}

}  // namespace

int CompiledPlanProblem::aux_var(Sym s, int slot, int t) const {
  const int off = aux_offset(s);
  if (off < 0 || slot < 0 || slot >= num_neighbors() || t < 1 || t > T)
    throw std::out_of_range("aux_var: bad symbol/slot/step");
  return n_own + (slot * T + (t - 1)) * 21 + off;
}

int CompiledPlanProblem::var_of(Sym s, int slot, int t) const {
  switch (s) {
    case Sym::Q: return q_var();
    case Sym::V: return v_var(t);
    case Sym::Z: return z_var(t);
    case Sym::AL: return al_var(t);
    case Sym::AR: return ar_var(t);
    default: return aux_var(s, slot, t);
  }
}

CompiledPlanProblem compile_vehicle_milp(const VehicleParams& params,
                                         const VehicleState& state,
                                         const WorldParams& world,
                                         const std::vector<NeighborPlan>& neighbors,
                                         RuleSet rules) {
  Builder b(params, state, world, neighbors, rules);
  return b.build();
}

std::vector<double> consistent_assignment(const CompiledPlanProblem& cpp,
                                          std::span<const double> v,
                                          std::span<const int> z,
                                          std::span<const int> a_l,
                                          std::span<const int> a_r) {
  const int T = cpp.T;
  if (static_cast<int>(v.size()) != T || static_cast<int>(z.size()) != T ||
      static_cast<int>(a_l.size()) != T || static_cast<int>(a_r.size()) != T)
    throw CompileError("consistent_assignment: decision sizes != T");
  const WorldParams& w = cpp.world;
  const VehicleParams& p = cpp.params;
  std::vector<double> x(cpp.instance.num_vars(), 0.0);

  auto vi = [&](int t) { return t == 0 ? cpp.state.v : v[t - 1]; };
  auto zi = [&](int t) { return t == 0 ? cpp.state.z : z[t - 1]; };
  auto ali = [&](int t) { return t == 0 ? cpp.state.a_l : a_l[t - 1]; };

  double q = 0.0;
  for (int t = 1; t <= T; ++t) {
    q = std::max(q, std::abs(v[t - 1] - p.v_ref[t - 1]));
    q = std::max(q, p.r * std::abs(double(z[t - 1] - p.z_ref[t - 1])));
    x[cpp.v_var(t)] = v[t - 1];
    x[cpp.z_var(t)] = z[t - 1];
    x[cpp.al_var(t)] = a_l[t - 1];
    x[cpp.ar_var(t)] = a_r[t - 1];
  }
  x[cpp.q_var()] = q;

  const double eps = w.eps_strict;
  auto truth_geq = [&](double val, double c, const char* what) -> int {
    if (val >= c) return 1;
    if (val <= c - eps) return 0;
    throw CompileError(std::string("consistent_assignment: ") + what +
                       " inside eps band");
  };
  auto truth_leq = [&](double val, double c, const char* what) -> int {
    if (val <= c) return 1;
    if (val >= c + eps) return 0;
    throw CompileError(std::string("consistent_assignment: ") + what +
                       " inside eps band");
  };

  for (int slot = 0; slot < cpp.num_neighbors(); ++slot) {
    const NeighborPlan& nb = cpp.neighbors[slot];
    auto vj = [&](int t) { return t == 0 ? nb.state.v : nb.v[t - 1]; };
    auto zj = [&](int t) { return t == 0 ? nb.state.z : nb.z[t - 1]; };
    auto arj = [&](int t) { return t == 0 ? nb.state.a_r : nb.a_r[t - 1]; };
    std::vector<double> d(T + 1);
    d[0] = nb.state.pos - cpp.state.pos;
    for (int t = 1; t <= T; ++t)
      d[t] = d[t - 1] + w.tau * (vj(t - 1) - vi(t - 1));

    for (int t = 1; t <= T; ++t) {
      const double lt = zj(t) - zi(t);
      const double lprev = zj(t - 1) - zi(t - 1);
      const int eta = truth_leq(lt, 0.0, "eta");
      const int theta = truth_geq(lt, 0.0, "theta");
      const int alpha = eta & theta;
      const int beta = truth_geq(d[t], 0.0, "beta");
      const int xi = alpha & beta;
      const int kap = truth_leq(lprev, 1.0, "kappa");
      const int lam = truth_geq(lprev, 1.0, "lambda");
      const int gam = kap & lam;
      const int del = (ali(t - 1) != 0 && arj(t - 1) != 0) ? 1 : 0;
      const int mu = truth_leq(d[t - 1], w.d_hat, "mu");
      const int nu = truth_geq(d[t - 1], -w.d_hat, "nu");
      const int zet = mu | nu;
      const int phi = gam & del;
      const int psi = zet & phi;
      const double ds = p.d0 + p.h * vi(t);

      x[cpp.aux_var(Sym::Eta, slot, t)] = eta;
      x[cpp.aux_var(Sym::Theta, slot, t)] = theta;
      x[cpp.aux_var(Sym::Alpha, slot, t)] = alpha;
      x[cpp.aux_var(Sym::Beta, slot, t)] = beta;
      x[cpp.aux_var(Sym::Xi, slot, t)] = xi;
      x[cpp.aux_var(Sym::Kappa, slot, t)] = kap;
      x[cpp.aux_var(Sym::Lambda, slot, t)] = lam;
      x[cpp.aux_var(Sym::Gamma, slot, t)] = gam;
      x[cpp.aux_var(Sym::Delta, slot, t)] = del;
      x[cpp.aux_var(Sym::Mu, slot, t)] = mu;
      x[cpp.aux_var(Sym::Nu, slot, t)] = nu;
      x[cpp.aux_var(Sym::Zeta, slot, t)] = zet;
      x[cpp.aux_var(Sym::Phi, slot, t)] = phi;
      x[cpp.aux_var(Sym::Psi, slot, t)] = psi;
      x[cpp.aux_var(Sym::F, slot, t)] = xi * d[t];
      x[cpp.aux_var(Sym::G, slot, t)] = alpha * ds;
      x[cpp.aux_var(Sym::Hh, slot, t)] = alpha * d[t];
      x[cpp.aux_var(Sym::K, slot, t)] = xi * vi(t);
      x[cpp.aux_var(Sym::Mm, slot, t)] = alpha * vi(t);
      x[cpp.aux_var(Sym::P, slot, t)] = psi * zi(t - 1);
      x[cpp.aux_var(Sym::S, slot, t)] = psi * zi(t);
    }
  }
  return x;
}

}  // namespace lanegame
