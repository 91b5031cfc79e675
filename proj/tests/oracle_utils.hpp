#pragma once

// Test-only oracles, kept independent of the branch-and-bound search path:
// LP optima by exhaustive vertex enumeration, MILP optima by exhaustive
// integer enumeration with an LP on the continuous remainder.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "lanegame/milp.hpp"
#include "lanegame/simplex.hpp"

namespace lanegame::testing {

inline bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> b,
                        std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  x.assign(n, 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 1e-9;
    for (int r = col; r < n; ++r)
      if (std::abs(A[r][col]) > best) {
        best = std::abs(A[r][col]);
        piv = r;
      }
    if (piv < 0) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    const double inv = 1.0 / A[col][col];
    for (int c = col; c < n; ++c) A[col][c] *= inv;
    b[col] *= inv;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A[r][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  x = b;
  return true;
}

/// Exhaustive vertex enumeration for a box-bounded LP: every vertex is the
/// intersection of n active constraints drawn from rows and bounds.
inline std::optional<double> lp_vertex_oracle(const MilpInstance& inst,
                                              double feas_tol = 1e-7) {
  const int n = inst.num_vars();
  // constraint list: (coeffs, rhs) meaning a.x <= rhs
  std::vector<std::pair<std::vector<double>, double>> cons;
  for (const auto& row : inst.rows) {
    std::vector<double> a(n, 0.0);
    for (const auto& [v, c] : row.lhs.terms) a[v] = c;
    cons.push_back({a, row.rhs - row.lhs.constant});
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> up(n, 0.0), dn(n, 0.0);
    up[j] = 1.0;
    dn[j] = -1.0;
    cons.push_back({up, inst.vars[j].ub});
    cons.push_back({dn, -inst.vars[j].lb});
  }
  const int total = static_cast<int>(cons.size());

  std::optional<double> best;
  std::vector<int> pick(n);
  std::vector<double> x;
  auto feasible = [&](const std::vector<double>& pt) {
    for (const auto& [a, rhs] : cons) {
      double lhs = 0;
      for (int j = 0; j < n; ++j) lhs += a[j] * pt[j];
      if (lhs > rhs + feas_tol) return false;
    }
    return true;
  };

  // iterate over all n-combinations of constraints
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  while (true) {
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (int i : idx) {
      A.push_back(cons[i].first);
      b.push_back(cons[i].second);
    }
    if (solve_dense(A, b, x) && feasible(x)) {
      const double obj = inst.objective.eval(x);
      if (!best || obj < *best) best = obj;
    }
    // next combination
    int i = n - 1;
    while (i >= 0 && idx[i] == total - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

struct EnumMilp {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
};

/// Brute force over all integer assignments; the continuous remainder is
/// optimized by the simplex with the integers pinned.
inline EnumMilp milp_enum_oracle(const MilpInstance& inst, double feas_tol = 1e-7) {
  std::vector<int> ints;
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.vars[j].is_integral()) ints.push_back(j);

  EnumMilp out;
  Simplex sx(inst, feas_tol);
  std::vector<long> lo(ints.size()), hi(ints.size()), cur(ints.size());
  for (size_t i = 0; i < ints.size(); ++i) {
    lo[i] = static_cast<long>(std::ceil(inst.vars[ints[i]].lb - 1e-9));
    hi[i] = static_cast<long>(std::floor(inst.vars[ints[i]].ub + 1e-9));
    if (lo[i] > hi[i]) return out;  // empty integer box
    cur[i] = lo[i];
  }

  while (true) {
    for (size_t i = 0; i < ints.size(); ++i)
      sx.set_bounds(ints[i], static_cast<double>(cur[i]), static_cast<double>(cur[i]));
    LpSummary s = sx.solve();
    if (s.status == LpStatus::Optimal) {
      out.feasible = true;
      out.objective = std::min(out.objective, s.objective);
    }
    size_t i = 0;
    for (; i < ints.size(); ++i) {
      if (cur[i] < hi[i]) {
        ++cur[i];
        break;
      }
      cur[i] = lo[i];
    }
    if (i == ints.size()) break;
  }
  return out;
}

}  // namespace lanegame::testing
