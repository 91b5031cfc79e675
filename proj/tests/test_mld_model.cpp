#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lanegame/mld_model.hpp"

using namespace lanegame;

TEST_CASE("update_distance evaluates the Euler step") {
  CHECK(update_distance(10, 25, 20, 1) == doctest::Approx(5.0));
  CHECK(update_distance(10, 20, 20, 3) == doctest::Approx(10.0));
  CHECK(update_distance(-8, 10, 14, 0.5) == doctest::Approx(-6.0));
}

TEST_CASE("update_distance is antisymmetric under pair swap") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ud(-50, 50), uv(0, 36), ut(0.1, 5);
  for (int it = 0; it < 200; ++it) {
    const double d = ud(rng), vi = uv(rng), vj = uv(rng), tau = ut(rng);
    const double fwd = update_distance(d, vi, vj, tau);
    const double bwd = update_distance(-d, vj, vi, tau);
    CHECK(fwd == doctest::Approx(-bwd).epsilon(1e-12));
  }
}

TEST_CASE("safety_distance is affine and monotone") {
  CHECK(safety_distance(0, 5, 0) == doctest::Approx(5.0));
  CHECK(safety_distance(20, 5, 1) == doctest::Approx(25.0));
  CHECK(safety_distance(30, 5, 1) == doctest::Approx(35.0));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uv(0, 40), ud(0.5, 20), uh(0, 3);
  for (int it = 0; it < 200; ++it) {
    const double d0 = ud(rng), h = uh(rng);
    double v1 = uv(rng), v2 = uv(rng);
    if (v1 > v2) std::swap(v1, v2);
    CHECK(safety_distance(v1, d0, h) <= safety_distance(v2, d0, h) + 1e-12);
    CHECK(safety_distance(v1, d0, h) >= d0);
  }
}

TEST_CASE("velocity_window clamps to [0, v_max]") {
  VehicleParams p;
  p.v_max = 36;
  p.delta = 5;
  Interval w = velocity_window(10, p);
  CHECK(w.lo == doctest::Approx(5));
  CHECK(w.hi == doctest::Approx(15));
  w = velocity_window(2, p);
  CHECK(w.lo == doctest::Approx(0));
  CHECK(w.hi == doctest::Approx(7));
  w = velocity_window(34, p);
  CHECK(w.lo == doctest::Approx(29));
  CHECK(w.hi == doctest::Approx(36));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uv(0, 36);
  for (int it = 0; it < 200; ++it) {
    const double v = uv(rng);
    Interval win = velocity_window(v, p);
    CHECK(win.lo >= 0.0);
    CHECK(win.hi <= p.v_max);
    CHECK(win.lo <= win.hi);
    CHECK(std::abs(win.lo - v) <= p.delta + 1e-12);
    CHECK(std::abs(win.hi - v) <= p.delta + 1e-12);
  }
}

TEST_CASE("lane_window permits but never forces a change") {
  LaneInterval w = lane_window(2, 0, 0, 3);
  CHECK(w.lo == 2);
  CHECK(w.hi == 2);
  w = lane_window(2, 1, 0, 3);
  CHECK(w.lo == 2);
  CHECK(w.hi == 3);
  w = lane_window(3, 1, 0, 3);
  CHECK(w.lo == 3);
  CHECK(w.hi == 3);

  for (int L = 1; L <= 4; ++L)
    for (int z = 1; z <= L; ++z)
      for (int al = 0; al <= 1; ++al)
        for (int ar = 0; ar <= 1 - al; ++ar) {
          LaneInterval win = lane_window(z, al, ar, L);
          CHECK(win.lo <= z);
          CHECK(z <= win.hi);
          const int clamp_lo = std::max(0, 1 - (z - ar));
          const int clamp_hi = std::max(0, (z + al) - L);
          CHECK(win.hi - win.lo + 1 == 1 + al + ar - clamp_lo - clamp_hi);
        }
}

TEST_CASE("compute_neighborhoods matches the pairwise distance rule") {
  auto n1 = compute_neighborhoods({0, 50, 200}, 100);
  CHECK(n1[0] == std::vector<int>{1});
  CHECK(n1[1] == std::vector<int>{0});
  CHECK(n1[2].empty());

  auto n2 = compute_neighborhoods({0}, 100);
  CHECK(n2[0].empty());

  auto n3 = compute_neighborhoods({0, 100}, 100);  // boundary included
  CHECK(n3[0] == std::vector<int>{1});
  CHECK(n3[1] == std::vector<int>{0});
}

TEST_CASE("neighborhoods are symmetric and irreflexive") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> up(-500, 500);
  for (int it = 0; it < 50; ++it) {
    std::vector<double> pos;
    const int n = 2 + static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) pos.push_back(up(rng));
    auto nb = compute_neighborhoods(pos, 120);
    for (int i = 0; i < n; ++i) {
      for (int j : nb[i]) {
        CHECK(j != i);
        CHECK(std::find(nb[j].begin(), nb[j].end(), i) != nb[j].end());
      }
    }
  }
}

TEST_CASE("pair_geometry is antisymmetric") {
  VehicleState a{0, 20, 1, 0, 0}, b{35, 25, 2, 0, 0};
  PairGeometry ab = pair_geometry(a, b), ba = pair_geometry(b, a);
  CHECK(ab.d == doctest::Approx(-ba.d));
  CHECK(ab.l == -ba.l);
  CHECK(ab.v_rel == doctest::Approx(-ba.v_rel));
}
