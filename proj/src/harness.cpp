#include "lanegame/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lanegame {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> positions_of(const std::vector<VehicleState>& states) {
  std::vector<double> p;
  p.reserve(states.size());
  for (const auto& s : states) p.push_back(s.pos);
  return p;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario parse error: ") + e.what());
  }
  Scenario sc;
  try {
    const auto& w = doc.at("world");
    sc.world.L = w.at("L").get<int>();
    sc.world.T = w.at("T").get<int>();
    sc.world.tau = w.at("tau").get<double>();
    sc.world.d_bar = w.at("d_bar").get<double>();
    sc.world.d_hat = w.at("d_hat").get<double>();
    sc.world.eps_game = w.at("eps_game").get<double>();
    sc.world.eps_strict = w.at("eps_strict").get<double>();

    for (const auto& v : doc.at("vehicles")) {
      VehicleParams p;
      VehicleState s;
      p.id = v.at("id").get<int>();
      s.pos = v.at("pos").get<double>();
      s.v = v.at("v").get<double>();
      s.z = v.at("z").get<int>();
      s.a_l = v.value("a_l", 0);
      s.a_r = v.value("a_r", 0);
      p.v_max = v.at("v_max").get<double>();
      p.delta = v.at("delta").get<double>();
      p.r = v.at("r").get<double>();
      p.d0 = v.at("d0").get<double>();
      p.h = v.at("h").get<double>();
      p.v_ref = v.at("v_ref").get<std::vector<double>>();
      p.z_ref = v.at("z_ref").get<std::vector<int>>();
      sc.params.push_back(std::move(p));
      sc.states.push_back(s);
    }

    const auto& sim = doc.at("sim");
    sc.sim.steps = sim.at("steps").get<int>();
    sc.sim.seed = sim.value("seed", 0);
    const std::string order = sim.value("player_order", "round_robin");
    if (order == "round_robin")
      sc.sim.player_order = PlayerOrder::RoundRobin;
    else if (order == "random_perm")
      sc.sim.player_order = PlayerOrder::RandomPerm;
    else
      throw ParseError("scenario: unknown player_order '" + order + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario field error: ") + e.what());
  }
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str());
}

void validate_scenario(const Scenario& sc) {
  std::vector<std::string> errs;
  auto err = [&](const std::string& m) { errs.push_back(m); };

  const WorldParams& w = sc.world;
  if (w.L < 1) err("world.L must be >= 1");
  if (w.T < 1) err("world.T must be >= 1");
  if (w.tau <= 0) err("world.tau must be > 0");
  if (w.d_bar <= 0) err("world.d_bar must be > 0");
  if (w.d_hat <= 0) err("world.d_hat must be > 0");
  if (w.d_hat > w.d_bar) err("world.d_hat must be <= d_bar");
  if (w.eps_game <= 0) err("world.eps_game must be > 0");
  if (w.eps_strict <= 0) err("world.eps_strict must be > 0");
  if (sc.sim.steps < 0) err("sim.steps must be >= 0");

  if (sc.params.empty()) err("vehicle list is empty");
  for (size_t i = 0; i < sc.params.size(); ++i) {
    const VehicleParams& p = sc.params[i];
    const VehicleState& s = sc.states[i];
    const std::string tag = "vehicle " + std::to_string(p.id) + ": ";
    for (size_t j = 0; j < i; ++j)
      if (sc.params[j].id == p.id) err(tag + "duplicate id");
    if (p.v_max <= 0) err(tag + "v_max must be > 0");
    if (p.delta <= 0) err(tag + "delta must be > 0");
    if (p.r <= 0) err(tag + "r must be > 0");
    if (p.d0 <= 0) err(tag + "d0 must be > 0");
    if (p.h < 0) err(tag + "h must be >= 0");
    if (s.v < 0 || s.v > p.v_max) err(tag + "initial speed outside [0, v_max]");
    if (s.z < 1 || s.z > w.L) err(tag + "initial lane outside {1..L}");
    if (s.a_l < 0 || s.a_r < 0 || s.a_l + s.a_r > 1)
      err(tag + "indicators must be binary with a_l + a_r <= 1");
    if (static_cast<int>(p.v_ref.size()) < w.T)
      err(tag + "v_ref shorter than horizon");
    if (static_cast<int>(p.z_ref.size()) < w.T)
      err(tag + "z_ref shorter than horizon");
    for (double vr : p.v_ref)
      if (vr < 0 || vr > p.v_max) {
        err(tag + "v_ref entry outside [0, v_max]");
        break;
      }
    for (int zr : p.z_ref)
      if (zr < 1 || zr > w.L) {
        err(tag + "z_ref entry outside {1..L}");
        break;
      }
  }

  // initial longitudinal safety on shared lanes
  for (size_t i = 0; i < sc.params.size(); ++i) {
    for (size_t j = 0; j < sc.params.size(); ++j) {
      if (i == j) continue;
      if (sc.states[i].z != sc.states[j].z) continue;
      const double d = std::abs(sc.states[j].pos - sc.states[i].pos);
      const double ds =
          safety_distance(sc.states[i].v, sc.params[i].d0, sc.params[i].h);
      if (d < ds - 1e-9)
        err("pair (" + std::to_string(sc.params[i].id) + "," +
            std::to_string(sc.params[j].id) +
            "): initial same-lane gap below the safety distance");
    }
  }

  if (!errs.empty()) {
    std::string msg = "scenario validation failed:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ValidationError(msg);
  }
}

PlanRoundResult plan_round(const Scenario& sc,
                           const std::vector<VehicleState>& states,
                           const GameConfig& cfg) {
  PlanRoundResult out;
  out.neighborhoods = compute_neighborhoods(positions_of(states), sc.world.d_bar);
  out.game = gauss_southwell(sc.params, states, sc.world, out.neighborhoods, cfg);
  return out;
}

std::vector<VehicleState> step_world(const std::vector<VehicleState>& states,
                                     const std::vector<PlayerPlan>& plans,
                                     double tau, int step) {
  std::vector<VehicleState> next = states;
  for (size_t i = 0; i < states.size(); ++i) {
    const PlayerPlan& p = plans[i];
    const int s = step - 1;
    next[i].v = p.v[s];
    next[i].z = p.z[s];
    next[i].a_l = p.a_l[s];
    next[i].a_r = p.a_r[s];
    next[i].pos = states[i].pos + tau * p.v[s];
  }
  return next;
}

namespace {

struct TraceView {
  // rows indexed [time][vehicle position]
  std::vector<double> times;
  std::vector<std::vector<TraceRow>> at;
};

TraceView view_of(const Trace& tr) {
  TraceView v;
  for (const auto& row : tr.rows) {
    if (v.times.empty() || row.time > v.times.back() + 1e-12) {
      v.times.push_back(row.time);
      v.at.emplace_back();
    }
    v.at.back().push_back(row);
  }
  return v;
}

}  // namespace

SafetyVerdict check_longitudinal_safety(const Trace& trace,
                                        const std::vector<VehicleParams>& params,
                                        double tol) {
  SafetyVerdict out;
  const TraceView tv = view_of(trace);
  auto d0_of = [&](int id) {
    for (const auto& p : params)
      if (p.id == id) return std::pair<double, double>{p.d0, p.h};
    return std::pair<double, double>{0.0, 0.0};
  };
  for (size_t ti = 0; ti < tv.at.size(); ++ti) {
    const auto& now = tv.at[ti];
    for (size_t a = 0; a < now.size(); ++a) {
      for (size_t b = 0; b < now.size(); ++b) {
        if (a == b) continue;
        if (now[a].z != now[b].z) continue;
        const double d = now[b].pos - now[a].pos;
        const auto [d0, h] = d0_of(now[a].vehicle);
        const double ds = safety_distance(now[a].v, d0, h);
        if (std::abs(d) < ds - tol) {
          Violation viol{static_cast<int>(ti), now[a].vehicle, now[b].vehicle,
                         "gap", std::abs(d) - ds};
          out.all.push_back(viol);
          if (!out.first) out.first = viol;
          out.safe = false;
        }
        if (ti + 1 < tv.at.size()) {
          const auto& nxt = tv.at[ti + 1];
          if (nxt[a].z == nxt[b].z) {
            const double dn = nxt[b].pos - nxt[a].pos;
            const bool flip = (d > 1e-9 && dn < -1e-9) || (d < -1e-9 && dn > 1e-9);
            if (flip) {
              Violation viol{static_cast<int>(ti), now[a].vehicle,
                             now[b].vehicle, "overtake-through", d * dn};
              out.all.push_back(viol);
              if (!out.first) out.first = viol;
              out.safe = false;
            }
          }
        }
      }
    }
  }
  return out;
}

SafetyVerdict check_consecutive_lane_safety(const Trace& trace, double d_hat) {
  SafetyVerdict out;
  const TraceView tv = view_of(trace);
  for (size_t ti = 0; ti + 1 < tv.at.size(); ++ti) {
    const auto& now = tv.at[ti];
    const auto& nxt = tv.at[ti + 1];
    for (size_t a = 0; a < now.size(); ++a) {
      for (size_t b = a + 1; b < now.size(); ++b) {
        const double d = now[b].pos - now[a].pos;
        const int l = now[b].z - now[a].z;
        if (std::abs(d) > d_hat || std::abs(l) != 1) continue;
        if (nxt[a].z == now[b].z) {
          Violation viol{static_cast<int>(ti), now[a].vehicle, now[b].vehicle,
                         "lane-entry", static_cast<double>(nxt[a].z)};
          out.all.push_back(viol);
          if (!out.first) out.first = viol;
          out.safe = false;
        }
        if (nxt[b].z == now[a].z) {
          Violation viol{static_cast<int>(ti), now[b].vehicle, now[a].vehicle,
                         "lane-entry", static_cast<double>(nxt[b].z)};
          out.all.push_back(viol);
          if (!out.first) out.first = viol;
          out.safe = false;
        }
      }
    }
  }
  return out;
}

void emit_trace(const Trace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "t,vehicle,pos,v,z,a_l,a_r\n";
  for (const auto& r : trace.rows) {
    os << fmt_double(r.time) << ',' << r.vehicle << ',' << fmt_double(r.pos)
       << ',' << fmt_double(r.v) << ',' << r.z << ',' << r.a_l << ',' << r.a_r
       << '\n';
  }
}

void emit_game_meta(const Trace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "round,iterations,potential,wall_ms\n";
  char buf[160];
  for (const auto& r : trace.rounds) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.3f\n", r.round, r.iterations,
                  r.potential, r.wall_ms);
    os << buf;
  }
}

Trace parse_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open trace file: " + path);
  Trace tr;
  std::string line;
  if (!std::getline(is, line) || line != "t,vehicle,pos,v,z,a_l,a_r")
    throw ParseError("trace: bad or missing header");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    TraceRow r;
    std::istringstream ls(line);
    std::string field;
    auto next_num = [&](double& out_v) {
      if (!std::getline(ls, field, ','))
        throw ParseError("trace: truncated line " + std::to_string(lineno));
      auto res = std::from_chars(field.data(), field.data() + field.size(), out_v);
      if (res.ec != std::errc{})
        throw ParseError("trace: bad number on line " + std::to_string(lineno));
    };
    double tmp;
    next_num(tmp);
    r.time = tmp;
    next_num(tmp);
    r.vehicle = static_cast<int>(tmp);
    next_num(tmp);
    r.pos = tmp;
    next_num(tmp);
    r.v = tmp;
    next_num(tmp);
    r.z = static_cast<int>(tmp);
    next_num(tmp);
    r.a_l = static_cast<int>(tmp);
    next_num(tmp);
    r.a_r = static_cast<int>(tmp);
    tr.rows.push_back(r);
    if (std::find(tr.vehicle_ids.begin(), tr.vehicle_ids.end(), r.vehicle) ==
        tr.vehicle_ids.end())
      tr.vehicle_ids.push_back(r.vehicle);
  }
  // infer tau from the first two distinct timestamps
  for (size_t i = 1; i < tr.rows.size(); ++i) {
    if (tr.rows[i].time > tr.rows[0].time) {
      tr.tau = tr.rows[i].time - tr.rows[0].time;
      break;
    }
  }
  return tr;
}

SimResult simulate(const Scenario& sc, const SimOptions& opt) {
  using clock = std::chrono::steady_clock;
  SimResult out;
  out.trace.tau = sc.world.tau;
  for (const auto& p : sc.params) out.trace.vehicle_ids.push_back(p.id);

  GameConfig gcfg;
  gcfg.order = sc.sim.player_order;
  gcfg.seed = sc.sim.seed;
  gcfg.max_iterations = opt.max_gs_iterations;
  gcfg.rules = opt.rules;
  gcfg.solver = opt.solver;

  std::vector<VehicleState> states = sc.states;
  auto snapshot = [&](int step_idx) {
    for (size_t i = 0; i < states.size(); ++i) {
      out.trace.rows.push_back({step_idx * sc.world.tau, sc.params[i].id,
                                states[i].pos, states[i].v, states[i].z,
                                states[i].a_l, states[i].a_r});
    }
  };
  snapshot(0);

  int steps_done = 0;
  int round = 0;
  while (steps_done < sc.sim.steps) {
    const auto start = clock::now();
    PlanRoundResult pr = plan_round(sc, states, gcfg);
    const double wall =
        std::chrono::duration<double, std::milli>(clock::now() - start).count();
    out.round_logs.push_back(pr.game.log);
    out.trace.rounds.push_back(
        {round, pr.game.iterations, pr.game.state.potential, wall});
    if (!pr.game.converged) {
      out.converged = false;
      break;
    }
    const int apply = opt.replan == ReplanMode::EveryStep
                          ? 1
                          : std::min(sc.world.T, sc.sim.steps - steps_done);
    for (int s = 1; s <= apply; ++s) {
      states = step_world(states, pr.game.state.plans, sc.world.tau, s);
      ++steps_done;
      snapshot(steps_done);
    }
    ++round;
  }
  return out;
}

}  // namespace lanegame
