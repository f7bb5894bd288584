#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "warp_harmonic/discrete_map.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic {

enum class DescentMethod { ProjectedGradient, NonlinearCG };

/// Metric in which the gradient is taken: lumped L2 (dual areas) or H1 (stiffness + mass).
enum class PreconditionerKind { Lumped, Sobolev };

struct SolveOptions {
  int max_iters = 20000;
  double grad_tol = -1.0;  // <= 0 selects 1e-6 * (1 + E_alpha(initial))
  double armijo_c = 1e-4;
  double step_init = 1.0;
  double step_shrink = 0.5;
  std::uint64_t seed = 0;
  int record_every = 10;
  DescentMethod method = DescentMethod::ProjectedGradient;
  PreconditionerKind preconditioner = PreconditionerKind::Sobolev;
  double f_margin = 1e-6;
  double min_step = 1e-16;

  void validate() const;
  nlohmann::json to_json() const;
};

struct IterateRecord {
  int iter;
  double energy_alpha;
  double grad_norm;
  double max_grad;  // max over faces of |grad u| in the target metric
  int degree;
};

struct SolveReport {
  std::vector<IterateRecord> iterates;
  DiscreteMap final_map;
  bool converged = false;
  int iterations = 0;
  double alpha = 1.0;
  double initial_energy = 0.0;  // E_alpha(initial)
  double final_energy = 0.0;    // E_alpha(final)
  double final_dirichlet = 0.0;  // E(final)
  double final_grad_norm = 0.0;
  double grad_tol = 0.0;
  double wall_time = 0.0;
  bool clamped = false;  // some f value hit the domain margin
  bool degree_jump = false;  // compute_degree changed along the iterates
  std::vector<std::string> warnings;
  std::string message;

  nlohmann::json to_json() const;
};

/// Projected first-order descent on E_alpha with Armijo backtracking. The search
/// direction is the preconditioned gradient (H1 by default, mesh-independent iteration
/// counts); v is retracted to the sphere by normalization and f is clamped into the warp
/// domain. The stopping test uses the dual-area L2 norm of the projected gradient.
SolveReport minimize(const DiscreteMap& initial, const WarpFunction& warp, double alpha,
                     const SolveOptions& opts = {});

struct AlphaSchedule {
  std::vector<double> alphas;
  void validate() const;  // strictly decreasing, all > 1 except possibly the last == 1
};

/// Minimizes at alphas[0] from `initial` and warm-starts every later alpha.
std::vector<SolveReport> alpha_continuation(const DiscreteMap& initial, const WarpFunction& warp,
                                            const AlphaSchedule& schedule,
                                            const SolveOptions& opts = {});

/// v = S^{-1}(S(x)^d) (conjugated for d < 0), f = f0. |d| <= 5.
DiscreteMap init_degree(MeshPtr mesh, int d, double f0);

/// Curve t(s), s in [0, 1], with curve(0) = 0, used for the neck f-profile.
struct NeckPath {
  double amplitude = 0.0;
  std::function<double(double)> curve;

  static NeckPath zero();
  static NeckPath linear(double amplitude);  // s -> amplitude * s
  double operator()(double s) const { return curve ? curve(s) : 0.0; }
};

struct NeckParams {
  double delta0 = 0.5;
  double R0 = 4.0;
  double eps0 = 0.01;
  double cutoff_width = -1.0;  // R0^c; <= 0 selects R0 / 2
  NeckPath path = NeckPath::zero();
  int winds = 0;
  double base_scale = 1.0;  // kappa; small values keep the outer map close to conformal

  double inner_radius() const { return R0 * eps0; }
  double log_gap() const;
  void validate() const;
};

/// Three-zone neck map in the standard chart (north pole = 0):
///   |z| >= delta0:          v = S^{-1}(kappa lambda(|z|) z), f = 0
///   R0 eps0 < |z| < delta0: v = north pole, f = path traversed `winds` times back and forth
///                           in s = (log|z| - log R0 eps0) / (log delta0 - log R0 eps0)
///   |z| <= R0 eps0:         v = H S^{-1}(z / (nu(|z|/eps0) eps0)), f = 0
/// where H is the half-turn about the x axis, so the inner bubble ends at the north pole
/// and the annulus can carry v frozen. lambda, nu are C2 ramps.
DiscreteMap init_neck(MeshPtr mesh, const NeckParams& params);

struct DegreeResult {
  int degree = 0;
  double raw = 0.0;       // sum of signed image solid angles / 4 pi
  double distance = 0.0;  // |raw - degree|
  bool ill_resolved = false;  // distance > 0.2
};
DegreeResult compute_degree(const DiscreteMap& map);

struct SweepOptions {
  SolveOptions solve;
  int n_restarts = 5;
  double perturbation = 0.1;
  double f0 = 0.0;
};

struct SweepRow {
  double alpha;
  double phi_hat;       // best E_alpha over the restarts (an upper estimate of the infimum)
  int best_restart;     // -1 = unperturbed start
  std::vector<double> restart_energies;  // NaN for runs that left the degree class
  int rejected;         // runs whose final degree differs from the requested one
  bool all_converged;
};

/// For each alpha, minimizes E_alpha from init_degree(degree) and n_restarts seeded smooth
/// perturbations of it, keeping the best run that stays in the degree class. Restarts run
/// concurrently.
std::vector<SweepRow> alpha_sweep(MeshPtr mesh, int degree, const WarpFunction& warp,
                                  const std::vector<double>& alphas,
                                  const SweepOptions& opts = {});

/// Smooth seeded perturbation: v <- normalize(v + a (A v + b)), f <- f + a_f <c, x>.
DiscreteMap perturb(const DiscreteMap& map, std::uint64_t seed, double amplitude,
                    double f_amplitude = 0.0);

}  // namespace warp_harmonic
