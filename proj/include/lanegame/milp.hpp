#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lanegame/mld_model.hpp"

namespace lanegame {

class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VarKind { Continuous, Binary, Integer };

/// Role of a variable inside a compiled plan problem. Hand-built instances
/// use Sym::None.
enum class Sym {
  None,
  Q, V, Z, AL, AR,
  // per-neighbor auxiliaries, binary group
  Eta, Theta, Alpha, Beta, Xi, Kappa, Lambda, Gamma, Delta, Mu, Nu, Zeta, Phi, Psi,
  // per-neighbor auxiliaries, continuous group
  F, G, Hh, K, Mm, P, S,
};

const char* sym_name(Sym s);

/// Sparse affine expression sum(coef * x[var]) + constant.
struct LinearExpr {
  std::vector<std::pair<int, double>> terms;  // sorted by var, unique
  double constant = 0.0;

  LinearExpr() = default;
  explicit LinearExpr(double c) : constant(c) {}

  LinearExpr& add(int var, double coef);
  LinearExpr& add(const LinearExpr& other, double scale = 1.0);
  double eval(std::span<const double> x) const;
  double coef(int var) const;
};

LinearExpr var_expr(int var, double coef = 1.0);

struct VarInfo {
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = 0.0;
  Sym sym = Sym::None;
  int neighbor = -1;  // neighbor slot for per-pair auxiliaries
  int step = 0;       // time step t
  bool is_integral() const { return kind != VarKind::Continuous; }
};

/// One row: lhs <= rhs.
struct Constraint {
  LinearExpr lhs;
  double rhs = 0.0;
};

struct MilpInstance {
  LinearExpr objective;  // minimized
  std::vector<Constraint> rows;
  std::vector<VarInfo> vars;

  int add_var(VarKind kind, double lb, double ub, Sym sym = Sym::None,
              int neighbor = -1, int step = 0);
  void add_row(LinearExpr lhs, double rhs);

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  /// Interval of an expression over the declared variable boxes.
  Interval expr_bounds(const LinearExpr& e) const;

  /// Max violation of rows and bounds at x (0 when feasible).
  double max_violation(std::span<const double> x) const;
  /// Max distance of integral variables from the nearest integer.
  double integrality_violation(std::span<const double> x) const;

  double objective_value(std::span<const double> x) const { return objective.eval(x); }
};

/// Plain-text LP-style interchange format (see README for the layout).
void write_lp_format(const MilpInstance& inst, std::ostream& os);
void write_lp_file(const MilpInstance& inst, const std::string& path);
MilpInstance read_lp_format(std::istream& is);
MilpInstance read_lp_file(const std::string& path);

}  // namespace lanegame
