#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracle_values.hpp"
#include "warp_harmonic/bubbles.hpp"
#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/mesh.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/warp.hpp"

using namespace warp_harmonic;
constexpr double kPi = std::numbers::pi;

namespace {

const MeshPtr& mesh6() {
  static const MeshPtr m = build_icosphere(6);
  return m;
}

}  // namespace

TEST_SUITE("bubbles") {

TEST_CASE("quanta of the tube warp") {
  const WarpFunction w = make_tube_warp(0.3);
  CHECK(neck_quantum(w) == doctest::Approx(oracle::kQuantumR03).epsilon(1e-14));
  CHECK(min_quantum(w) == doctest::Approx(oracle::kQuantumR03).epsilon(1e-6));
  CHECK(min_quantum(w) <= neck_quantum(w));
}

TEST_CASE("epsilon policy validation") {
  const WarpFunction w = make_tube_warp(0.3);
  EpsilonPolicy p;
  CHECK_NOTHROW(p.validate(w));
  p.eps0 = 2.0;  // above the quantum 1.902
  CHECK_THROWS_AS(p.validate(w), ConfigError);
  p.eps0 = 1.0;
  p.min_radius = 1.0;
  CHECK_THROWS_AS(p.validate(w), ConfigError);
}

TEST_CASE("the identity does not concentrate at a small radius") {
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap id(mesh6(), mesh6()->vertices, std::vector<double>(mesh6()->vertex_count(), 0.0));
  EpsilonPolicy p;
  p.min_radius = 0.3;
  // ball energy psi(0) * 0.2806 is far below eps0 / 2
  CHECK(detect_concentration(id, w, p).empty());
}

TEST_CASE("a single bubble is found at its center with the right scale") {
  const WarpFunction w = make_tube_warp(0.3);
  const Vec3 c = Vec3(0.2, 0.5, 0.8).normalized();
  const double lambda = 0.02;
  const DiscreteMap u = single_bubble_map(mesh6(), c, lambda);
  const auto pts = detect_concentration(u, w, EpsilonPolicy{});
  REQUIRE(pts.size() == 1);
  CHECK(geodesic_distance(pts[0].location, c) < 0.01);
  CHECK(pts[0].blowup_scale == doctest::Approx(lambda).epsilon(0.1));
  CHECK(pts[0].ball_energy > 0.5);
  for (std::size_t k = 1; k < pts[0].ball_energy_profile.size(); ++k) {
    CHECK(pts[0].ball_energy_profile[k].second >= pts[0].ball_energy_profile[k - 1].second);
  }
}

TEST_CASE("two bubbles are found at the poles") {
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = two_bubble_map(mesh6(), 0.02);
  CHECK(compute_degree(u).degree == 2);
  const auto pts = detect_concentration(u, w, EpsilonPolicy{});
  REQUIRE(pts.size() == 2);
  const double zz = pts[0].location.z() * pts[1].location.z();
  CHECK(zz == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("extracted bubble carries the D_R fraction of a quantum") {
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = single_bubble_map(mesh6(), Vec3(0, 0, 1), 0.02);
  const auto pts = detect_concentration(u, w, EpsilonPolicy{});
  REQUIRE(pts.size() == 1);
  const double q = neck_quantum(w);
  const ExtractedBubble b10 = extract_bubble(u, w, pts[0], 10.0);
  CHECK(b10.energy / q == doctest::Approx(oracle::kBubbleFracR10).epsilon(2e-2));
  const ExtractedBubble b20 = extract_bubble(u, w, pts[0], 20.0, 241);
  CHECK(b20.energy > b10.energy);
  CHECK(b20.energy / q == doctest::Approx(oracle::kBubbleFracR20).epsilon(2e-2));
  CHECK_THROWS_AS(extract_bubble(u, w, pts[0], 1.0 / pts[0].blowup_scale + 1.0), DomainError);
}

TEST_CASE("scale consistency: halving lambda halves the detected scale") {
  const WarpFunction w = make_tube_warp(0.3);
  const auto a = detect_concentration(single_bubble_map(mesh6(), Vec3(0, 0, 1), 0.04), w, {});
  const auto b = detect_concentration(single_bubble_map(mesh6(), Vec3(0, 0, 1), 0.02), w, {});
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(a[0].blowup_scale / b[0].blowup_scale == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("neck oscillation of constant and radial maps") {
  const MeshPtr m = build_icosphere(4);
  const FaceLocator loc(m);
  const DiscreteMap c = DiscreteMap::constant(m, Vec3(1, 0, 0), 0.1);
  const CircleOscillation o = neck_oscillation(c, loc, Vec3(0, 0, 1), 0.3, 64);
  CHECK(o.osc_v < 1e-12);
  CHECK(o.osc_f < 1e-12);
  CHECK(o.mean_f == doctest::Approx(0.1));
  CHECK_THROWS_AS(neck_oscillation(c, loc, Vec3(0, 0, 1), 1.5, 64), ConfigError);
  CHECK_THROWS_AS(neck_oscillation(c, loc, Vec3(0, 0, 1), 0.3, 16), ConfigError);
  CHECK_THROWS_AS(neck_profile(c, make_tube_warp(0.3), Vec3(0, 0, 1), 0.5, 0.4), ConfigError);
}

TEST_CASE("neck closed form matches the oracle and scales as 1 / G") {
  const WarpFunction w = make_tube_warp(0.3);
  CHECK(neck_energy_closed_form(w, 3, 0.2, 1.0) ==
        doctest::Approx(oracle::kNeckClosedFormW3A02).epsilon(1e-8));
  CHECK(neck_energy_closed_form(w, 3, 0.35, 2.0) ==
        doctest::Approx(oracle::kNeckClosedFormW3A035 / 2.0).epsilon(1e-8));
}

TEST_CASE("neck annulus energy of init_neck tracks the closed form") {
  const WarpFunction w = make_tube_warp(0.3);
  NeckParams p;
  p.delta0 = 0.8;
  p.R0 = 4.0;
  p.winds = 3;
  p.path = NeckPath::linear(0.2);
  p.eps0 = p.delta0 * std::exp(-1.5) / p.R0;
  const DiscreteMap u = init_neck(mesh6(), p);
  const double measured = chart_annulus_energy(u, w, Vec3(0, 0, 1), p.R0 * p.eps0, p.delta0);
  const double exact = neck_energy_closed_form(w, 3, 0.2, p.log_gap());
  CHECK(measured == doctest::Approx(exact).epsilon(0.1));
  const NeckProfile prof = neck_profile(u, w, Vec3(0, 0, 1), p.R0 * p.eps0, p.delta0, 96);
  CHECK(prof.along_osc_f > 0.8 * 0.2);
  CHECK(prof.circle_osc_max < 0.05);
  std::stringstream ss;
  prof.write_csv(ss);
  CHECK(ss.str().rfind("t,log_t,osc_v,osc_f,mean_f", 0) == 0);
}

TEST_CASE("decomposition of a single bubble closes") {
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap u = single_bubble_map(mesh6(), Vec3(0, 0, 1), 0.02);
  const BubbleDecomposition d = decompose(u, w, 1.0, EpsilonPolicy{});
  REQUIRE(d.bubbles.size() == 1);
  CHECK(d.bubbles[0].nearest_quantum == 1);
  CHECK(d.closure_error < 0.05);
  CHECK(d.base_energy + d.bubble_sum() + d.neck_sum() ==
        doctest::Approx(d.total_E).epsilon(0.05));
}

TEST_CASE("defect report on a constant family and input checks") {
  const WarpFunction w = make_tube_warp(0.3);
  const MeshPtr m = build_icosphere(3);
  std::vector<FamilyMember> fam = {{1.1, DiscreteMap::constant(m, Vec3(0, 0, 1), 0.0)},
                                   {1.05, DiscreteMap::constant(m, Vec3(0, 0, 1), 0.0)},
                                   {1.0, DiscreteMap::constant(m, Vec3(0, 0, 1), 0.0)}};
  const DefectReport r = energy_identity_defect(fam, w, EpsilonPolicy{});
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.defect == 0.0);
    CHECK(row.n_bubbles == 0);
  }
  CHECK(r.label == "constructed family");
  CHECK(r.identity_consistent);
  CHECK_FALSE(r.defect_bounded_away);
  std::vector<FamilyMember> one(fam.begin(), fam.begin() + 1);
  CHECK_THROWS_AS(energy_identity_defect(one, w, EpsilonPolicy{}), ConfigError);
  std::swap(fam[0], fam[2]);
  CHECK_THROWS_AS(energy_identity_defect(fam, w, EpsilonPolicy{}), ConfigError);
}

}  // TEST_SUITE
