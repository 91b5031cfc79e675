#include "lanegame/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace lanegame {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
}  // namespace

const char* sym_name(Sym s) {
  switch (s) {
    case Sym::None: return "x";
    case Sym::Q: return "q";
    case Sym::V: return "v";
    case Sym::Z: return "z";
    case Sym::AL: return "a_l";
    case Sym::AR: return "a_r";
    case Sym::Eta: return "eta";
    case Sym::Theta: return "theta";
    case Sym::Alpha: return "alpha";
    case Sym::Beta: return "beta";
    case Sym::Xi: return "xi";
    case Sym::Kappa: return "kappa";
    case Sym::Lambda: return "lambda";
    case Sym::Gamma: return "gamma";
    case Sym::Delta: return "delta";
    case Sym::Mu: return "mu";
    case Sym::Nu: return "nu";
    case Sym::Zeta: return "zeta";
    case Sym::Phi: return "phi";
    case Sym::Psi: return "psi";
    case Sym::F: return "f";
    case Sym::G: return "g";
    case Sym::Hh: return "h";
    case Sym::K: return "k";
    case Sym::Mm: return "m";
    case Sym::P: return "p";
    case Sym::S: return "s";
  }
  return "x";
}

LinearExpr& LinearExpr::add(int var, double coef) {
  if (coef == 0.0) return *this;
  auto it = std::lower_bound(terms.begin(), terms.end(), var,
                             [](const auto& t, int v) { return t.first < v; });
  if (it != terms.end() && it->first == var) {
    it->second += coef;
    if (it->second == 0.0) terms.erase(it);
  } else {
    terms.insert(it, {var, coef});
  }
  return *this;
}

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale) {
  for (const auto& [v, c] : other.terms) add(v, c * scale);
  constant += other.constant * scale;
  return *this;
}

double LinearExpr::eval(std::span<const double> x) const {
  double s = constant;
  for (const auto& [v, c] : terms) s += c * x[v];
  return s;
}

double LinearExpr::coef(int var) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), var,
                             [](const auto& t, int v) { return t.first < v; });
  return (it != terms.end() && it->first == var) ? it->second : 0.0;
}

LinearExpr var_expr(int var, double coef) {
  LinearExpr e;
  e.add(var, coef);
  return e;
}

int MilpInstance::add_var(VarKind kind, double lb, double ub, Sym sym,
                          int neighbor, int step) {
  vars.push_back({kind, lb, ub, sym, neighbor, step});
  return static_cast<int>(vars.size()) - 1;
}

void MilpInstance::add_row(LinearExpr lhs, double rhs) {
  rows.push_back({std::move(lhs), rhs});
}

Interval MilpInstance::expr_bounds(const LinearExpr& e) const {
  double lo = e.constant, hi = e.constant;
  for (const auto& [v, c] : e.terms) {
    const VarInfo& info = vars[v];
    if (c > 0) {
      lo += c * info.lb;
      hi += c * info.ub;
    } else {
      lo += c * info.ub;
      hi += c * info.lb;
    }
  }
  return {lo, hi};
}

double MilpInstance::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (const auto& row : rows)
    worst = std::max(worst, row.lhs.eval(x) - row.rhs);
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, vars[j].lb - x[j]);
    worst = std::max(worst, x[j] - vars[j].ub);
  }
  return worst;
}

double MilpInstance::integrality_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j)
    if (vars[j].is_integral())
      worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  return worst;
}

// ---------------------------------------------------------------------------
// Interchange format. Layout:
//   \ comment lines
//   Minimize
//    obj: <terms> [+ <constant>]
//   Subject To
//    c<i>: <terms> <= <rhs>
//   Bounds
//    <lb> <= x<j> <= <ub>      (-inf / inf spelled out)
//   General     (integer variables, one name per line)
//   Binary
//   End
// Variables are named x<j> by index; symbol tags are emitted as comments.

namespace {

void write_terms(std::ostream& os, const LinearExpr& e, bool with_const) {
  bool first = true;
  for (const auto& [v, c] : e.terms) {
    if (first) {
      os << (c < 0 ? "- " : "");
      os << fmt_double(std::abs(c)) << " x" << v;
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ") << fmt_double(std::abs(c)) << " x" << v;
    }
  }
  if (first) os << "0 x0";
  if (with_const && e.constant != 0.0) {
    os << (e.constant < 0 ? " - " : " + ") << fmt_double(std::abs(e.constant));
  }
}

}  // namespace

void write_lp_format(const MilpInstance& inst, std::ostream& os) {
  os << "\\ lanegame milp interchange v1\n";
  for (int j = 0; j < inst.num_vars(); ++j) {
    const VarInfo& v = inst.vars[j];
    if (v.sym != Sym::None) {
      os << "\\ sym x" << j << " " << sym_name(v.sym) << " j" << v.neighbor
         << " t" << v.step << "\n";
    }
  }
  os << "Minimize\n obj: ";
  write_terms(os, inst.objective, true);
  os << "\nSubject To\n";
  for (int i = 0; i < inst.num_rows(); ++i) {
    // row constants are folded into the rhs on output
    const Constraint& c = inst.rows[i];
    os << " c" << i << ": ";
    LinearExpr lhs = c.lhs;
    double rhs = c.rhs - lhs.constant;
    lhs.constant = 0.0;
    write_terms(os, lhs, false);
    os << " <= " << fmt_double(rhs) << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < inst.num_vars(); ++j) {
    const VarInfo& v = inst.vars[j];
    os << " " << (std::isinf(v.lb) ? std::string("-inf") : fmt_double(v.lb))
       << " <= x" << j << " <= "
       << (std::isinf(v.ub) ? std::string("inf") : fmt_double(v.ub)) << "\n";
  }
  os << "General\n";
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.vars[j].kind == VarKind::Integer) os << " x" << j << "\n";
  os << "Binary\n";
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.vars[j].kind == VarKind::Binary) os << " x" << j << "\n";
  os << "End\n";
}

void write_lp_file(const MilpInstance& inst, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_lp_format(inst, os);
}

namespace {

struct Tok {
  std::vector<std::string> toks;
  size_t pos = 0;
  bool done() const { return pos >= toks.size(); }
  const std::string& peek() const { return toks[pos]; }
  std::string next() { return toks[pos++]; }
};

double parse_num(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{})
    throw std::runtime_error("bad number in lp file: " + s);
  return v;
}

int parse_var(const std::string& s) {
  if (s.empty() || s[0] != 'x')
    throw std::runtime_error("bad variable in lp file: " + s);
  return std::stoi(s.substr(1));
}

// Parses "<num> x<i> [+|- <num> x<i>]... [+|- <num>]" until a stop token.
LinearExpr parse_expr(Tok& tk, const std::string& stop) {
  LinearExpr e;
  double sign = 1.0;
  while (!tk.done() && tk.peek() != stop) {
    std::string t = tk.next();
    if (t == "+") { sign = 1.0; continue; }
    if (t == "-") { sign = -1.0; continue; }
    double coef = parse_num(t);
    if (!tk.done() && tk.peek()[0] == 'x' && tk.peek() != stop) {
      e.add(parse_var(tk.next()), sign * coef);
    } else {
      e.constant += sign * coef;
    }
    sign = 1.0;
  }
  return e;
}

}  // namespace

MilpInstance read_lp_format(std::istream& is) {
  MilpInstance inst;
  std::string line;
  enum Section { NONE, OBJ, ROWS, BOUNDS, GENERAL, BINARY } sec = NONE;
  int max_var = -1;
  std::vector<Constraint> rows;
  LinearExpr obj;
  std::map<int, std::pair<double, double>> bounds;
  std::vector<int> generals, binaries;

  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '\\') continue;
    std::istringstream ls(line);
    Tok tk;
    std::string w;
    while (ls >> w) tk.toks.push_back(w);
    if (tk.toks.empty()) continue;
    const std::string& head = tk.toks[0];
    if (head == "Minimize") { sec = OBJ; continue; }
    if (head == "Subject") { sec = ROWS; continue; }
    if (head == "Bounds") { sec = BOUNDS; continue; }
    if (head == "General") { sec = GENERAL; continue; }
    if (head == "Binary") { sec = BINARY; continue; }
    if (head == "End") break;

    switch (sec) {
      case OBJ: {
        tk.pos = 1;  // skip "obj:"
        obj = parse_expr(tk, "");
        break;
      }
      case ROWS: {
        tk.pos = 1;  // skip "c<i>:"
        LinearExpr lhs = parse_expr(tk, "<=");
        if (tk.done() || tk.next() != "<=")
          throw std::runtime_error("missing <= in lp row");
        double rhs = parse_num(tk.next());
        rows.push_back({std::move(lhs), rhs});
        break;
      }
      case BOUNDS: {
        double lb = parse_num(tk.next());
        if (tk.next() != "<=") throw std::runtime_error("bad bounds line");
        int var = parse_var(tk.next());
        if (tk.next() != "<=") throw std::runtime_error("bad bounds line");
        double ub = parse_num(tk.next());
        bounds[var] = {lb, ub};
        max_var = std::max(max_var, var);
        break;
      }
      case GENERAL: generals.push_back(parse_var(tk.next())); break;
      case BINARY: binaries.push_back(parse_var(tk.next())); break;
      case NONE: break;
    }
  }

  for (const auto& [v, c] : obj.terms) max_var = std::max(max_var, v);
  for (const auto& r : rows)
    for (const auto& [v, c] : r.lhs.terms) max_var = std::max(max_var, v);

  inst.vars.resize(max_var + 1);
  for (int j = 0; j <= max_var; ++j) {
    inst.vars[j] = {VarKind::Continuous, -kInf, kInf, Sym::None, -1, 0};
    auto it = bounds.find(j);
    if (it != bounds.end()) {
      inst.vars[j].lb = it->second.first;
      inst.vars[j].ub = it->second.second;
    }
  }
  for (int j : generals) inst.vars[j].kind = VarKind::Integer;
  for (int j : binaries) inst.vars[j].kind = VarKind::Binary;
  inst.objective = std::move(obj);
  inst.rows = std::move(rows);
  return inst;
}

MilpInstance read_lp_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return read_lp_format(is);
}

}  // namespace lanegame
