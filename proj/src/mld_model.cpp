#include "lanegame/mld_model.hpp"

#include <algorithm>
#include <cmath>

namespace lanegame {

double update_distance(double d, double v_i, double v_j, double tau) {
  return d + tau * (v_j - v_i);
}

double safety_distance(double v, double d0, double h) {
  return d0 + h * v;
}

Interval velocity_window(double v_now, const VehicleParams& p) {
  return {std::max(0.0, v_now - p.delta), std::min(p.v_max, v_now + p.delta)};
}

LaneInterval lane_window(int z_now, int a_l, int a_r, int L) {
  return {std::max(1, z_now - a_r), std::min(L, z_now + a_l)};
}

std::vector<std::vector<int>> compute_neighborhoods(
    const std::vector<double>& positions, double d_bar) {
  const int n = static_cast<int>(positions.size());
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(positions[j] - positions[i]) <= d_bar) {
        nbrs[i].push_back(j);
        nbrs[j].push_back(i);
      }
    }
  }
  for (auto& v : nbrs) std::sort(v.begin(), v.end());
  return nbrs;
}

PairGeometry pair_geometry(const VehicleState& si, const VehicleState& sj) {
  return {sj.pos - si.pos, sj.z - si.z, sj.v - si.v};
}

}  // namespace lanegame
