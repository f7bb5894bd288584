#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "warp_harmonic/discrete_map.hpp"
#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/mesh.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/warp.hpp"

using namespace warp_harmonic;
constexpr double kPi = std::numbers::pi;

namespace {

DiscreteMap wobbly(MeshPtr m, double amp) {
  DiscreteMap u = perturb(init_degree(m, 1, 0.0), 11, amp, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) u.f[i] = 0.1 * m->vertices[i].x() + 0.05;
  return u;
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("identity at f = t0 has energy 4 pi psi(t0) up to the area deficit") {
  const MeshPtr m = build_icosphere(5);
  const WarpFunction w = make_tube_warp(0.3);
  for (double t0 : {0.0, 0.2}) {
    const DiscreteMap id(m, m->vertices, std::vector<double>(m->vertex_count(), t0));
    const EnergyBreakdown e = energy(id, w);
    CHECK(e.total_E == doctest::Approx(4 * kPi * w.value(t0)).epsilon(2e-3));
    CHECK(e.f_part == 0.0);
    CHECK(e.per_face.size() == m->face_count());
  }
}

TEST_CASE("constant maps have zero energy") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap c = DiscreteMap::constant(m, Vec3(1, 0, 0), 0.1);
  CHECK(energy(c, w).total_E == 0.0);
  CHECK(alpha_energy_value(c, w, 1.3) == 0.0);
}

TEST_CASE("degree-two map on the spectrum warp") {
  const MeshPtr m = build_icosphere(6);
  const WarpFunction w = make_spectrum_warp();
  const DiscreteMap u = init_degree(m, 2, 0.0);
  CHECK(energy(u, w).total_E == doctest::Approx(8 * kPi).epsilon(1.5e-2));
}

TEST_CASE("E_alpha at alpha = 1 equals E and increases with alpha") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = wobbly(m, 0.2);
  const EnergyBreakdown e = energy(u, w);
  CHECK(alpha_energy_value(u, w, 1.0) == doctest::Approx(e.total_E).epsilon(1e-13));
  double prev = e.total_E;
  for (double a : {1.01, 1.1, 1.5, 2.0}) {
    const double ea = alpha_energy_value(u, w, a);
    CHECK(ea > prev);
    prev = ea;
  }
  CHECK_THROWS_AS(alpha_energy(u, w, 0.9), ConfigError);
  CHECK_THROWS_AS(alpha_energy(u, w, 2.5), ConfigError);
}

TEST_CASE("energy rejects f outside the warp domain") {
  const MeshPtr m = build_icosphere(2);
  const WarpFunction w = make_tube_warp(0.3);
  DiscreteMap u = DiscreteMap::constant(m, Vec3(0, 0, 1), 0.0);
  u.f[5] = w.t_max() + 0.5;
  CHECK_THROWS_AS(energy(u, w), DomainError);
}

TEST_CASE("gradient matches finite differences") {
  const MeshPtr m = build_icosphere(2);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = wobbly(m, 0.3);
  for (double alpha : {1.0, 1.2}) {
    const EnergyGradient g = energy_gradient(u, w, alpha, false);
    CHECK(g.value == doctest::Approx(alpha_energy_value(u, w, alpha)).epsilon(1e-14));
    const double h = 1e-6;
    for (int i : {0, 17, 100}) {
      for (int c = 0; c < 3; ++c) {
        DiscreteMap p = u, q = u;
        p.v[i][c] += h;
        q.v[i][c] -= h;
        const double fd = (alpha_energy_value(p, w, alpha) - alpha_energy_value(q, w, alpha)) / (2 * h);
        CHECK(g.v[i][c] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
      DiscreteMap p = u, q = u;
      p.f[i] += h;
      q.f[i] -= h;
      const double fd = (alpha_energy_value(p, w, alpha) - alpha_energy_value(q, w, alpha)) / (2 * h);
      CHECK(g.f[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("projected gradient is tangent") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = wobbly(m, 0.3);
  const EnergyGradient g = energy_gradient(u, w, 1.1, true);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(g.v[i].dot(u.v[i])) < 1e-12);
}

TEST_CASE("harmonic maps have small residual, perturbed ones do not") {
  const WarpFunction w = make_spectrum_warp();
  double prev = 1e300;
  for (int L : {3, 4, 5}) {
    const MeshPtr m = build_icosphere(L);
    const Residual r = el_residual(init_degree(m, 1, 0.0), w);
    CHECK(r.norm_v < prev);
    CHECK(r.norm_f < 1e-12);
    prev = r.norm_v;
  }
  const MeshPtr m = build_icosphere(4);
  const Residual bad = el_residual(wobbly(m, 0.3), w);
  CHECK(bad.norm_v > 10 * prev);
}

TEST_CASE("f residual pairing equals its quadrature") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const FPairing p = f_residual_pairing(wobbly(m, 0.25), w);
  CHECK(p.pairing == doctest::Approx(p.integral).epsilon(1e-10));
}

TEST_CASE("conformal stretch of a bubble") {
  const MeshPtr m = build_icosphere(6);
  const double eps = 0.2;
  std::vector<Vec3> v(m->vertex_count());
  const StereoChart chart;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = inverse_stereographic(chart.to_chart(m->vertices[i]) / eps);
  }
  const DiscreteMap u(m, v, std::vector<double>(m->vertex_count(), 0.0));
  const std::vector<double> s = face_stretch(u);
  double smax = 0.0;
  for (double x : s) smax = std::max(smax, x);
  CHECK(smax == doctest::Approx(1.0 / eps).epsilon(0.05));
  // the identity is an isometry
  const DiscreteMap id(m, m->vertices, std::vector<double>(m->vertex_count(), 0.0));
  for (double x : face_stretch(id)) CHECK(x == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("energy density integrates to twice the energy") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = wobbly(m, 0.2);
  const std::vector<double> d = face_energy_density(u, w);
  double s = 0.0;
  for (std::size_t f = 0; f < d.size(); ++f) s += d[f] * m->face_area[f];
  CHECK(0.5 * s == doctest::Approx(energy(u, w).total_E).epsilon(1e-12));
}

}  // TEST_SUITE
