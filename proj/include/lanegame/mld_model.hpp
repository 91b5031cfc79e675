#pragma once

#include <vector>

namespace lanegame {

/// Physical limits and tracking references of one vehicle.
struct VehicleParams {
  int id = 0;
  double v_max = 0.0;  ///< max cruise speed [m/s]
  double delta = 0.0;  ///< max speed change per step [m/s]
  double r = 1.0;      ///< lane-deviation weight in the cost
  double d0 = 0.0;     ///< standstill safety gap [m]
  double h = 0.0;      ///< safety headway time [s]
  std::vector<double> v_ref;  ///< desired speed per step, size T
  std::vector<int> z_ref;     ///< desired lane per step, size T
};

/// Current longitudinal state, lane and indicator flags of one vehicle.
struct VehicleState {
  double pos = 0.0;
  double v = 0.0;
  int z = 1;
  int a_l = 0;
  int a_r = 0;
};

struct WorldParams {
  int L = 1;               ///< lane count
  int T = 1;               ///< prediction horizon, steps
  double tau = 1.0;        ///< step length [s]
  double d_bar = 0.0;      ///< interaction distance [m]
  double d_hat = 0.0;      ///< lateral-conflict distance [m]
  double eps_game = 1e-3;  ///< equilibrium tolerance
  double eps_strict = 1e-4;///< strict-inequality tolerance for indicator patterns
};

/// Relative geometry of an ordered pair (i, j); antisymmetric under swap.
struct PairGeometry {
  double d = 0.0;    ///< pos_j - pos_i
  int l = 0;         ///< z_j - z_i
  double v_rel = 0.0;///< v_j - v_i
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct LaneInterval {
  int lo = 0;
  int hi = 0;
};

/// Euler-forward update of the relative distance over one step.
double update_distance(double d, double v_i, double v_j, double tau);

/// Speed-dependent minimum gap d0 + h*v.
double safety_distance(double v, double d0, double h);

/// Reachable speed set for the next step: [0, v_max] ∩ [v - delta, v + delta].
Interval velocity_window(double v_now, const VehicleParams& p);

/// Reachable lane set for the next step given the indicator flags:
/// {1..L} ∩ [z - a_r, z + a_l]. Always contains z.
LaneInterval lane_window(int z_now, int a_l, int a_r, int L);

/// Index sets N_i = {j | |pos_j - pos_i| <= d_bar, j != i}, 0-based, sorted.
std::vector<std::vector<int>> compute_neighborhoods(
    const std::vector<double>& positions, double d_bar);

PairGeometry pair_geometry(const VehicleState& si, const VehicleState& sj);

}  // namespace lanegame
