#include "warp_harmonic/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <complex>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/parallel.hpp"

namespace warp_harmonic {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// max over faces of sqrt(|grad v|^2 + |grad f|^2)
double max_gradient(const DiscreteMap& map) {
  const auto stretch = face_stretch(map);
  double m = 0.0;
  for (double s : stretch) m = std::max(m, s);
  return std::sqrt(2.0) * m;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations so seeded runs agree across toolchains.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform_pm1(std::mt19937_64& rng) { return 2.0 * uniform01(rng) - 1.0; }

struct Clamp {
  double lo, hi;
  bool apply(double& f) const {
    if (f < lo) { f = lo; return true; }
    if (f > hi) { f = hi; return true; }
    return false;
  }
};

double dot(const EnergyGradient& g, const std::vector<Vec3>& dv, const std::vector<double>& df) {
  return parallel_sum(dv.size(), [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += g.v[i].dot(dv[i]) + g.f[i] * df[i];
    return s;
  });
}

// Applies P^{-1} to a gradient, P either the lumped mass matrix or the H1 matrix K + M
// (K the P1 stiffness matrix). The v part of the result is projected to the tangent planes.
class Preconditioner {
 public:
  Preconditioner(const TriMesh& mesh, PreconditionerKind kind) : mesh_(mesh), kind_(kind) {
    if (kind_ != PreconditionerKind::Sobolev) return;
    const std::size_t n = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.face_count() + n);
    for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
      const Face& F = mesh.faces[fi];
      const auto& g = mesh.grad_basis[fi];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          trip.emplace_back(F[a], F[b], mesh.face_area[fi] * g[a].dot(g[b]));
    }
    for (std::size_t i = 0; i < n; ++i) trip.emplace_back(i, i, mesh.vertex_dual_area[i]);
    Eigen::SparseMatrix<double> P(n, n);
    P.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(P);
    if (solver_.info() != Eigen::Success) throw InvariantError("H1 preconditioner factorization failed");
  }

  void apply(const DiscreteMap& x, const EnergyGradient& g, std::vector<Vec3>& zv,
             std::vector<double>& zf) const {
    const std::size_t n = mesh_.vertex_count();
    zv.resize(n);
    zf.resize(n);
    if (kind_ == PreconditionerKind::Lumped) {
      for (std::size_t i = 0; i < n; ++i) {
        const double m = 1.0 / mesh_.vertex_dual_area[i];
        zv[i] = m * g.v[i];
        zf[i] = m * g.f[i];
      }
      return;
    }
    Eigen::MatrixXd rhs(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      rhs.block<1, 3>(i, 0) = g.v[i].transpose();
      rhs(i, 3) = g.f[i];
    }
    const Eigen::MatrixXd sol = solver_.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 z = sol.block<1, 3>(i, 0).transpose();
      zv[i] = z - z.dot(x.v[i]) * x.v[i];
      zf[i] = sol(i, 3);
    }
  }

 private:
  const TriMesh& mesh_;
  PreconditionerKind kind_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

double dot_fields(const std::vector<Vec3>& av, const std::vector<double>& af,
                  const std::vector<Vec3>& bv, const std::vector<double>& bf) {
  return parallel_sum(av.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += av[i].dot(bv[i]) + af[i] * bf[i];
    return s;
  });
}

}  // namespace

void SolveOptions::validate() const {
  if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("armijo_c must lie in (0, 1)");
  if (!(step_init > 0.0)) throw ConfigError("step_init must be positive");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw ConfigError("step_shrink must lie in (0, 1)");
  if (record_every < 1) throw ConfigError("record_every must be positive");
  if (!(f_margin > 0.0)) throw ConfigError("f_margin must be positive");
  if (!(min_step > 0.0)) throw ConfigError("min_step must be positive");
}

nlohmann::json SolveOptions::to_json() const {
  return {{"max_iters", max_iters},
          {"grad_tol", grad_tol},
          {"armijo_c", armijo_c},
          {"step_init", step_init},
          {"step_shrink", step_shrink},
          {"seed", seed},
          {"record_every", record_every},
          {"method", method == DescentMethod::NonlinearCG ? "cg" : "gradient"},
          {"preconditioner", preconditioner == PreconditionerKind::Sobolev ? "h1" : "lumped"},
          {"f_margin", f_margin},
          {"min_step", min_step}};
}

nlohmann::json SolveReport::to_json() const {
  nlohmann::json it = nlohmann::json::array();
  for (const auto& r : iterates) {
    it.push_back({{"iter", r.iter},
                  {"energy_alpha", r.energy_alpha},
                  {"grad_norm", r.grad_norm},
                  {"max_grad", r.max_grad},
                  {"degree", r.degree}});
  }
  return {{"converged", converged},
          {"iterations", iterations},
          {"alpha", alpha},
          {"initial_energy_alpha", initial_energy},
          {"final_energy_alpha", final_energy},
          {"final_energy", final_dirichlet},
          {"final_grad_norm", final_grad_norm},
          {"grad_tol", grad_tol},
          {"wall_time", wall_time},
          {"clamped", clamped},
          {"degree_jump", degree_jump},
          {"warnings", warnings},
          {"message", message},
          {"iterates", it}};
}

SolveReport minimize(const DiscreteMap& initial, const WarpFunction& warp, double alpha,
                     const SolveOptions& opts) {
  opts.validate();
  if (!(alpha >= 1.0 && alpha <= 2.0)) {
    throw ConfigError("alpha must lie in [1, 2], got " + std::to_string(alpha));
  }
  if (!initial.mesh) throw ConfigError("initial map has no mesh");
  initial.validate(warp, 1e-8);
  const auto t0 = std::chrono::steady_clock::now();
  const TriMesh& mesh = *initial.mesh;
  const std::size_t n = mesh.vertex_count();
  const double h = mesh.max_edge_length();
  const Clamp clamp{warp.t_min() + opts.f_margin, warp.t_max() - opts.f_margin};

  SolveReport rep;
  rep.alpha = alpha;
  DiscreteMap x = initial;
  x.renormalize();
  for (auto& fi : x.f) rep.clamped |= clamp.apply(fi);

  EnergyGradient g = energy_gradient(x, warp, alpha);
  double E = g.value;
  rep.initial_energy = E;
  rep.grad_tol = opts.grad_tol > 0.0 ? opts.grad_tol : 1e-6 * (1.0 + E);
  const int degree0 = compute_degree(x).degree;
  bool jump_logged = false;
  double peak_grad = 0.0;  // running max of max|grad u| over recorded iterates

  auto record = [&](int iter, double gn) {
    const DegreeResult deg = compute_degree(x);
    const double mg = max_gradient(x);
    peak_grad = std::max(peak_grad, mg);
    rep.iterates.push_back({iter, E, gn, mg, deg.degree});
    if (deg.degree != degree0 && !jump_logged) {
      std::ostringstream msg;
      msg << "degree changed from " << degree0 << " to " << deg.degree << " at iteration " << iter
          << " (peak max|grad u|*h = " << peak_grad * h << ")";
      msg << (peak_grad * h > 1.0 ? ": possible discrete degree jump (under-resolution)"
                                  : ": degree change on a resolved map");
      rep.degree_jump = true;
      rep.warnings.push_back(msg.str());
      jump_logged = true;
    }
  };

  std::vector<Vec3> dv(n);
  std::vector<double> df(n);
  EnergyGradient g_prev;
  double gz_prev = 0.0;
  const Preconditioner precond(mesh, opts.preconditioner);
  std::vector<Vec3> zv;
  std::vector<double> zf;
  bool have_prev = false;
  double step = opts.step_init;
  int iter = 0;
  double gn = dual_norm(mesh, g.v, g.f);
  DiscreteMap trial = x;

  for (;; ++iter) {
    gn = dual_norm(mesh, g.v, g.f);
    const bool converged = gn < rep.grad_tol;
    if (iter % opts.record_every == 0 || converged || iter == opts.max_iters) record(iter, gn);
    if (converged) {
      rep.converged = true;
      rep.message = "converged";
      break;
    }
    if (iter >= opts.max_iters) {
      rep.message = "max_iters reached";
      break;
    }

    // search direction: -P^{-1} g, optionally with a Polak-Ribiere+ correction
    precond.apply(x, g, zv, zf);
    const double gz = dot_fields(g.v, g.f, zv, zf);
    double beta = 0.0;
    if (opts.method == DescentMethod::NonlinearCG && have_prev && gz_prev > 0.0) {
      const double cross = dot_fields(g_prev.v, g_prev.f, zv, zf);
      beta = std::max(0.0, (gz - cross) / gz_prev);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 d = -zv[i];
      double d_f = -zf[i];
      if (beta > 0.0) {
        // transport the previous direction to the current tangent plane
        d += beta * (dv[i] - dv[i].dot(x.v[i]) * x.v[i]);
        d_f += beta * df[i];
      }
      dv[i] = d;
      df[i] = d_f;
    }
    double slope = dot(g, dv, df);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) {
        dv[i] = -zv[i];
        df[i] = -zf[i];
      }
      slope = -gz;
    }

    // Armijo backtracking along the retraction s -> (normalize(v + s dv), clamp(f + s df))
    bool accepted = false;
    double E_new = E;
    bool clamped_step = false;
    double s = step;
    while (s >= opts.min_step) {
      clamped_step = false;
      for (std::size_t i = 0; i < n; ++i) {
        trial.v[i] = (x.v[i] + s * dv[i]).normalized();
        double fi = x.f[i] + s * df[i];
        clamped_step |= clamp.apply(fi);
        trial.f[i] = fi;
      }
      E_new = alpha_energy_value(trial, warp, alpha);
      if (std::isfinite(E_new) && E_new <= E + opts.armijo_c * s * slope && E_new < E) {
        accepted = true;
        break;
      }
      s *= opts.step_shrink;
    }
    if (!accepted) {
      rep.message = "line search failure: no descent at minimum step";
      record(iter, gn);
      break;
    }
    rep.clamped |= clamped_step;
    std::swap(x.v, trial.v);
    std::swap(x.f, trial.f);
    step = s / opts.step_shrink;
    g_prev = std::move(g);
    gz_prev = gz;
    have_prev = true;
    g = energy_gradient(x, warp, alpha);
    E = g.value;
  }

  if (rep.clamped) rep.warnings.push_back("f reached the warp domain margin and was clamped");
  rep.iterations = iter;
  rep.final_energy = E;
  rep.final_grad_norm = gn;
  rep.final_dirichlet = energy(x, warp).total_E;
  rep.final_map = std::move(x);
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void AlphaSchedule::validate() const {
  if (alphas.empty()) throw ConfigError("alpha schedule is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double a = alphas[i];
    if (!(a >= 1.0 && a <= 2.0)) throw ConfigError("schedule alphas must lie in [1, 2]");
    if (a == 1.0 && i + 1 != alphas.size()) {
      throw ConfigError("alpha = 1 may only appear last in the schedule");
    }
    if (i > 0 && !(a < alphas[i - 1])) throw ConfigError("alpha schedule must strictly decrease");
  }
}

std::vector<SolveReport> alpha_continuation(const DiscreteMap& initial, const WarpFunction& warp,
                                            const AlphaSchedule& schedule,
                                            const SolveOptions& opts) {
  schedule.validate();
  std::vector<SolveReport> out;
  out.reserve(schedule.alphas.size());
  const DiscreteMap* start = &initial;
  for (double a : schedule.alphas) {
    out.push_back(minimize(*start, warp, a, opts));
    start = &out.back().final_map;
  }
  return out;
}

DiscreteMap init_degree(MeshPtr mesh, int d, double f0) {
  if (!mesh) throw ConfigError("init_degree needs a mesh");
  if (std::abs(d) > 5) throw ConfigError("|degree| must be at most 5");
  const std::size_t n = mesh->vertex_count();
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = mesh->vertices[i];
    if (d == 0) {
      v[i] = Vec3(1, 0, 0);
      continue;
    }
    const int k = std::abs(d);
    if (p.z() >= 0.0) {
      std::complex<double> w(p.x() / (1.0 + p.z()), p.y() / (1.0 + p.z()));
      if (d < 0) w = std::conj(w);
      v[i] = inverse_stereographic(std::pow(w, k));
    } else {
      // 1 / S(p) = (x - i y) / (1 - z), finite on the southern hemisphere
      std::complex<double> q(p.x() / (1.0 - p.z()), -p.y() / (1.0 - p.z()));
      if (d < 0) q = std::conj(q);
      v[i] = inverse_stereographic_of_reciprocal(std::pow(q, k));
    }
  }
  return DiscreteMap(std::move(mesh), std::move(v), std::vector<double>(n, f0));
}

NeckPath NeckPath::zero() { return {0.0, [](double) { return 0.0; }}; }

NeckPath NeckPath::linear(double amplitude) {
  return {amplitude, [amplitude](double s) { return amplitude * s; }};
}

double NeckParams::log_gap() const { return std::log(delta0) - std::log(inner_radius()); }

void NeckParams::validate() const {
  if (!(eps0 > 0.0) || !(R0 > 0.0)) throw ConfigError("neck eps0 and R0 must be positive");
  if (!(delta0 < 1.0)) throw ConfigError("neck delta0 must be < 1");
  if (!(inner_radius() < delta0)) {
    throw ConfigError("neck zones overlap: R0*eps0 = " + std::to_string(inner_radius()) +
                      " must be < delta0 = " + std::to_string(delta0));
  }
  const double rc = cutoff_width > 0.0 ? cutoff_width : 0.5 * R0;
  if (!(rc <= R0)) throw ConfigError("neck cutoff width must not exceed R0");
  if (winds < 0) throw ConfigError("neck winds must be nonnegative");
  if (!(base_scale > 0.0)) throw ConfigError("neck base_scale must be positive");
}

DiscreteMap init_neck(MeshPtr mesh, const NeckParams& P) {
  if (!mesh) throw ConfigError("init_neck needs a mesh");
  P.validate();
  const double rc = P.cutoff_width > 0.0 ? P.cutoff_width : 0.5 * P.R0;
  const double r_in = P.inner_radius();
  const double gap = P.log_gap();
  const std::size_t n = mesh->vertex_count();
  std::vector<Vec3> v(n);
  std::vector<double> f(n, 0.0);
  const Vec3 north(0, 0, 1);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = mesh->vertices[i];
    const double denom = 1.0 + p.z();
    const double rz = denom > 0.0 ? std::sqrt(std::max(0.0, 1.0 - p.z()) / denom)
                                  : std::numeric_limits<double>::infinity();
    if (rz >= P.delta0) {
      if (rz >= 2.0 * P.delta0 && P.base_scale == 1.0) {
        v[i] = p;
      } else if (!std::isfinite(rz)) {
        v[i] = Vec3(0, 0, -1);
      } else {
        const double lam = P.base_scale * smoothstep((rz - P.delta0) / P.delta0);
        const std::complex<double> z(p.x() / denom, p.y() / denom);
        v[i] = inverse_stereographic(lam * z);
      }
    } else if (rz > r_in) {
      v[i] = north;
      if (P.winds > 0) {
        const double s = (std::log(rz) - std::log(r_in)) / gap;
        const double u = P.winds * s;
        const double frac = u - std::floor(u);
        const double tau = frac < 0.5 ? 2.0 * frac : 2.0 - 2.0 * frac;
        f[i] = P.path(tau);
      }
    } else {
      const double rho = rz / P.eps0;
      const double nu = 1.0 - smoothstep((rho - (P.R0 - rc)) / rc);
      const std::complex<double> z(p.x() / denom, p.y() / denom);
      Vec3 w;
      if (nu <= 0.0) {
        w = Vec3(0, 0, -1);
      } else if (rz <= nu * P.eps0) {
        w = inverse_stereographic(z / (nu * P.eps0));
      } else {
        w = inverse_stereographic_of_reciprocal(nu * P.eps0 / z);
      }
      v[i] = Vec3(w.x(), -w.y(), -w.z());  // half-turn about the x axis
    }
  }
  return DiscreteMap(std::move(mesh), std::move(v), std::move(f));
}

DegreeResult compute_degree(const DiscreteMap& map) {
  const TriMesh& mesh = *map.mesh;
  const double total = parallel_sum(mesh.face_count(), [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t fi = b; fi < e; ++fi) {
      const Face& F = mesh.faces[fi];
      const Vec3& a = map.v[F[0]];
      const Vec3& bb = map.v[F[1]];
      const Vec3& c = map.v[F[2]];
      // signed solid angle of the geodesic triangle (Van Oosterom-Strackee)
      s += 2.0 * std::atan2(a.dot(bb.cross(c)), 1.0 + a.dot(bb) + bb.dot(c) + c.dot(a));
    }
    return s;
  });
  DegreeResult r;
  r.raw = total / (4.0 * kPi);
  r.degree = static_cast<int>(std::lround(r.raw));
  r.distance = std::abs(r.raw - r.degree);
  r.ill_resolved = r.distance > 0.2;
  return r;
}

DiscreteMap perturb(const DiscreteMap& map, std::uint64_t seed, double amplitude,
                    double f_amplitude) {
  std::mt19937_64 rng(seed);
  Mat3 A;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) A(r, c) = uniform_pm1(rng);
  Vec3 b(uniform_pm1(rng), uniform_pm1(rng), uniform_pm1(rng));
  Vec3 cf(uniform_pm1(rng), uniform_pm1(rng), uniform_pm1(rng));
  DiscreteMap out = map;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.v[i] = (out.v[i] + amplitude * (A * out.v[i] + b)).normalized();
    out.f[i] += f_amplitude * cf.dot(map.mesh->vertices[i]);
  }
  return out;
}

std::vector<SweepRow> alpha_sweep(MeshPtr mesh, int degree, const WarpFunction& warp,
                                  const std::vector<double>& alphas, const SweepOptions& opts) {
  if (alphas.empty()) throw ConfigError("alpha list is empty");
  for (double a : alphas) {
    if (!(a >= 1.0 && a <= 1.3)) throw ConfigError("sweep alphas must lie in [1, 1.3]");
  }
  if (opts.n_restarts < 0) throw ConfigError("n_restarts must be nonnegative");
  if (!warp.in_domain(opts.f0, opts.solve.f_margin)) throw ConfigError("f0 outside the warp domain");
  const DiscreteMap base = init_degree(mesh, degree, opts.f0);
  const int starts = opts.n_restarts + 1;

  // one task per (alpha, start); each task owns its map and report
  const std::size_t n_tasks = alphas.size() * starts;
  std::vector<double> energies(n_tasks, 0.0);
  std::vector<char> converged(n_tasks, 0);
  auto run_task = [&](std::size_t t) {
    const std::size_t ai = t / starts;
    const int r = static_cast<int>(t % starts) - 1;
    DiscreteMap init =
        r < 0 ? base
              : perturb(base, opts.solve.seed * 1000003ULL + static_cast<std::uint64_t>(r) + 1,
                        opts.perturbation);
    const SolveReport rep = minimize(init, warp, alphas[ai], opts.solve);
    const bool in_class = compute_degree(rep.final_map).degree == degree;
    energies[t] = in_class ? rep.final_energy : std::numeric_limits<double>::quiet_NaN();
    converged[t] = rep.converged;
  };

  const int workers = std::min<int>(thread_count(), static_cast<int>(n_tasks));
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) run_task(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    SweepRow row;
    row.alpha = alphas[ai];
    row.all_converged = true;
    row.best_restart = -1;
    row.rejected = 0;
    row.phi_hat = std::numeric_limits<double>::infinity();
    for (int r = 0; r < starts; ++r) {
      const std::size_t t = ai * starts + r;
      row.restart_energies.push_back(energies[t]);
      row.all_converged &= converged[t] != 0;
      if (std::isnan(energies[t])) {
        ++row.rejected;
        continue;
      }
      if (energies[t] < row.phi_hat) {
        row.phi_hat = energies[t];
        row.best_restart = r - 1;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace warp_harmonic
