#include <doctest.h>

#include <cmath>
#include <numbers>

#include "warp_harmonic/discrete_map.hpp"
#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/mesh.hpp"
#include "warp_harmonic/parallel.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/warp.hpp"

using namespace warp_harmonic;
constexpr double kPi = std::numbers::pi;

namespace {

void check_schedule(std::vector<double> alphas) { AlphaSchedule{std::move(alphas)}.validate(); }

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("init_degree produces the requested degree") {
  const MeshPtr m = build_icosphere(4);
  for (int d : {-2, -1, 0, 1, 2, 3}) {
    const DegreeResult r = compute_degree(init_degree(m, d, 0.0));
    CHECK(r.degree == d);
    CHECK_FALSE(r.ill_resolved);
  }
  std::vector<Vec3> anti(m->vertices.size());
  for (std::size_t i = 0; i < anti.size(); ++i) anti[i] = -m->vertices[i];
  CHECK(compute_degree(DiscreteMap(m, anti, std::vector<double>(anti.size(), 0.0))).degree == -1);
  CHECK_THROWS_AS(init_degree(m, 6, 0.0), ConfigError);
}

TEST_CASE("degree-one map at f = 0 is already critical") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const SolveReport r = minimize(init_degree(m, 1, 0.0), w, 1.0);
  CHECK(r.converged);
  CHECK(r.final_energy == doctest::Approx(r.initial_energy).epsilon(1e-6));
}

TEST_CASE("minimization decreases E_alpha monotonically and converges") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  DiscreteMap start = perturb(init_degree(m, 1, 0.0), 3, 0.2, 0.1);
  SolveOptions o;
  o.record_every = 1;
  const SolveReport r = minimize(start, w, 1.05, o);
  CHECK(r.converged);
  REQUIRE(r.iterates.size() >= 2);
  for (std::size_t k = 1; k < r.iterates.size(); ++k) {
    CHECK(r.iterates[k].energy_alpha <= r.iterates[k - 1].energy_alpha + 1e-12);
  }
  CHECK(r.final_energy < r.initial_energy);
  CHECK(r.final_grad_norm <= r.grad_tol);
  CHECK(compute_degree(r.final_map).degree == 1);
  // f is driven to the minimum of psi
  double fmax = 0.0;
  for (double f : r.final_map.f) fmax = std::max(fmax, std::abs(f));
  CHECK(fmax < 1e-3);
}

TEST_CASE("degree-zero start collapses to a constant") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap start = perturb(init_degree(m, 0, 0.0), 5, 0.3, 0.1);
  const SolveReport r = minimize(start, w, 1.1);
  CHECK(r.converged);
  CHECK(r.final_energy < 1e-4);
}

TEST_CASE("runs are bit-identical across thread counts") {
  const MeshPtr m = build_icosphere(4);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap start = perturb(init_degree(m, 1, 0.0), 9, 0.2, 0.05);
  SolveOptions o;
  o.max_iters = 30;
  const int saved = thread_count();
  set_thread_count(1);
  const SolveReport a = minimize(start, w, 1.1, o);
  set_thread_count(4);
  const SolveReport b = minimize(start, w, 1.1, o);
  set_thread_count(saved);
  CHECK(a.final_energy == b.final_energy);
  CHECK(a.final_map.v == b.final_map.v);
  CHECK(a.final_map.f == b.final_map.f);
}

TEST_CASE("nonlinear CG and lumped preconditioner reach the same energy") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const DiscreteMap start = perturb(init_degree(m, 1, 0.0), 4, 0.15, 0.05);
  SolveOptions o;
  const double e0 = minimize(start, w, 1.05, o).final_energy;
  o.method = DescentMethod::NonlinearCG;
  const double e1 = minimize(start, w, 1.05, o).final_energy;
  o.method = DescentMethod::ProjectedGradient;
  o.preconditioner = PreconditionerKind::Lumped;
  o.max_iters = 50000;
  const double e2 = minimize(start, w, 1.05, o).final_energy;
  CHECK(e1 == doctest::Approx(e0).epsilon(1e-5));
  CHECK(e2 == doctest::Approx(e0).epsilon(1e-5));
}

TEST_CASE("option and schedule validation") {
  SolveOptions o;
  CHECK_NOTHROW(o.validate());
  o.armijo_c = 1.5;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  CHECK_NOTHROW(check_schedule(std::vector<double>{1.1, 1.05, 1.0}));
  CHECK_THROWS_AS(check_schedule(std::vector<double>{}), ConfigError);
  CHECK_THROWS_AS(check_schedule(std::vector<double>{1.05, 1.1}), ConfigError);
  CHECK_THROWS_AS(check_schedule(std::vector<double>{1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(check_schedule(std::vector<double>{2.5}), ConfigError);
  const MeshPtr m = build_icosphere(2);
  CHECK_THROWS_AS(minimize(init_degree(m, 1, 0.0), make_tube_warp(0.3), 0.5), ConfigError);
}

TEST_CASE("alpha continuation warm starts every stage") {
  const MeshPtr m = build_icosphere(3);
  const WarpFunction w = make_tube_warp(0.3);
  const auto stages = alpha_continuation(perturb(init_degree(m, 1, 0.0), 2, 0.1, 0.05), w,
                                         AlphaSchedule{{1.1, 1.05, 1.0}});
  REQUIRE(stages.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(stages[k].converged);
  CHECK(stages[2].alpha == 1.0);
  CHECK(stages[2].final_energy == doctest::Approx(4 * kPi * w.value(0.0)).epsilon(3e-2));
}

TEST_CASE("neck initialization") {
  const MeshPtr m = build_icosphere(5);
  NeckParams p;
  p.eps0 = 0.01;
  p.winds = 2;
  p.path = NeckPath::linear(0.2);
  const DiscreteMap u = init_neck(m, p);
  double fmax = 0.0;
  for (double f : u.f) fmax = std::max(fmax, f);
  CHECK(fmax == doctest::Approx(0.2).epsilon(5e-2));
  CHECK(compute_degree(u).degree == 2);  // outer identity plus the inner bubble
  p.eps0 = 0.2;  // R0 eps0 = 0.8 > delta0
  CHECK_THROWS_AS(init_neck(m, p), ConfigError);
  CHECK(p.log_gap() < 0.0);
}

TEST_CASE("perturb is seeded and small") {
  const MeshPtr m = build_icosphere(2);
  const DiscreteMap u = init_degree(m, 1, 0.0);
  const DiscreteMap a = perturb(u, 7, 0.1, 0.05);
  const DiscreteMap b = perturb(u, 7, 0.1, 0.05);
  const DiscreteMap c = perturb(u, 8, 0.1, 0.05);
  CHECK(a.v == b.v);
  CHECK(a.f == b.f);
  CHECK(a.v != c.v);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(a.v[i].norm() == doctest::Approx(1.0));
    CHECK((a.v[i] - u.v[i]).norm() < 0.5);
  }
}

TEST_CASE("small alpha sweep in degree zero") {
  const MeshPtr m = build_icosphere(2);
  const WarpFunction w = make_tube_warp(0.3);
  SweepOptions o;
  o.n_restarts = 2;
  const auto rows = alpha_sweep(m, 0, w, {1.0, 1.1}, o);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.phi_hat < 1e-4);
    CHECK(r.restart_energies.size() == 3);
    CHECK(r.all_converged);
  }
}

}  // TEST_SUITE
