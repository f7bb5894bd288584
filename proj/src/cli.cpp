#include "warp_harmonic/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "warp_harmonic/bubbles.hpp"
#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/parallel.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/spectrum.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic::cli {

namespace fs = std::filesystem;

namespace {

struct OptionSpec {
  const char* key;
  const char* help;
};

const std::vector<OptionSpec> kCommon = {
    {"out", "base directory for run directories (default runs)"},
    {"tag", "suffix of the run directory name"},
    {"seed", "random seed (default 0)"},
    {"threads", "worker threads, 0 = auto (overrides WARP_HARMONIC_THREADS)"},
};

const std::map<std::string, std::vector<OptionSpec>> kCommands = {
    {"minimize",
     {{"warp", "warp spec, e.g. tube:r=0.3 or spectrum:beta=1"},
      {"level", "icosphere level (default 5)"},
      {"degree", "degree of the initial map (default 1)"},
      {"f0", "initial f value (default 0)"},
      {"alpha", "single alpha in [1, 2] (default 1.05)"},
      {"alphas", "comma list for alpha continuation, strictly decreasing"},
      {"init", "degree | neck (default degree)"},
      {"perturbation", "seeded smooth perturbation amplitude (default 0)"},
      {"max_iters", "iteration cap (default 20000)"},
      {"grad_tol", "stopping tolerance; <= 0 picks 1e-6 (1 + E_alpha)"},
      {"method", "pg | cg (default pg)"},
      {"preconditioner", "sobolev | lumped (default sobolev)"},
      {"record_every", "iterate recording stride (default 10)"},
      {"neck_eps0", "neck init: inner bubble scale (default 0.01)"},
      {"neck_R0", "neck init: inner zone radius in bubble units (default 4)"},
      {"neck_delta0", "neck init: outer radius (default 0.5)"},
      {"neck_winds", "neck init: path traversals (default 0)"},
      {"neck_amplitude", "neck init: linear path amplitude (default 0)"}}},
    {"sweep",
     {{"warp", "warp spec"},
      {"level", "icosphere level (default 5)"},
      {"degree", "degree class (default 1)"},
      {"f0", "initial f value (default 0)"},
      {"alphas", "comma list in [1, 1.3] (default 1,1.01,1.02,1.05,1.1)"},
      {"restarts", "perturbed restarts per alpha (default 5)"},
      {"perturbation", "restart perturbation amplitude (default 0.1)"},
      {"max_iters", "iteration cap per solve (default 20000)"},
      {"grad_tol", "stopping tolerance"}}},
    {"spectrum",
     {{"kmax", "number of roots (default 5)"},
      {"beta", "warp parameter beta (default 1)"},
      {"bits", "working precision in bits (default 512)"},
      {"harmonic_levels", "mesh levels for the harmonicity check at t_1, e.g. 4,5,6"},
      {"offset", "non-root comparison offset (default 0.05)"}}},
    {"bubbles",
     {{"family", "identity | winds | files (default winds)"},
      {"warp", "warp spec (default tube:r=0.3)"},
      {"level", "icosphere level (default 7)"},
      {"alphas", "alpha per member, nonincreasing"},
      {"eps", "identity family: inner bubble scales (default 0.04,0.03,0.02)"},
      {"winds", "winds family: path traversals (default 2,3,4)"},
      {"amplitude", "winds family: path amplitude (default 0.2)"},
      {"tau_quanta", "winds family: tau in units of 4 pi psi(0) (default 2.5)"},
      {"delta0", "neck outer radius (default 0.5)"},
      {"R0", "inner zone radius in bubble units (default 8)"},
      {"base_scale", "outer base map scale (default 0.15)"},
      {"maps", "files family: comma list of map CSV files"},
      {"eps0", "concentration threshold (default 1)"},
      {"min_radius", "detection ball radius (default 0.15)"},
      {"max_radius", "decomposition ball radius (default 0.9)"},
      {"R", "bubble patch radius (default R0)"},
      {"n_grid", "bubble patch grid (default 161)"},
      {"neck_samples", "radii per neck profile (default 32)"}}},
    {"ledger",
     {{"r", "tube radius"}, {"blend", "C2 | C4 (default C2)"}}},
};

std::string option_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

WarpFunction warp_of(const RunConfig& c, const std::string& fallback = "") {
  if (!c.has("warp") && fallback.empty()) {
    throw ConfigError("missing required config key 'warp' (e.g. --warp tube:r=0.3)");
  }
  return parse_warp_spec(c.get("warp", fallback));
}

MeshPtr mesh_of(const RunConfig& c, long fallback) {
  const long level = c.get_int("level", fallback);
  if (level < 0 || level > 8) throw ConfigError("level must lie in [0, 8]");
  return build_icosphere(static_cast<int>(level));
}

SolveOptions solve_options_of(const RunConfig& c) {
  SolveOptions o;
  o.max_iters = static_cast<int>(c.get_int("max_iters", o.max_iters));
  o.grad_tol = c.get_double("grad_tol", o.grad_tol);
  o.record_every = static_cast<int>(c.get_int("record_every", o.record_every));
  o.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  const std::string method = c.get("method", "pg");
  if (method == "pg") {
    o.method = DescentMethod::ProjectedGradient;
  } else if (method == "cg") {
    o.method = DescentMethod::NonlinearCG;
  } else {
    throw ConfigError("method must be pg or cg, got '" + method + "'");
  }
  const std::string pre = c.get("preconditioner", "sobolev");
  if (pre == "sobolev") {
    o.preconditioner = PreconditionerKind::Sobolev;
  } else if (pre == "lumped") {
    o.preconditioner = PreconditionerKind::Lumped;
  } else {
    throw ConfigError("preconditioner must be sobolev or lumped, got '" + pre + "'");
  }
  o.validate();
  return o;
}

fs::path new_run_dir(const RunConfig& c) {
  return create_run_directory(c.get("out", "runs"), c.get("tag", c.command()));
}

void write_map_csv(const fs::path& path, const DiscreteMap& map) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_mesh_csv(out, *map.mesh, map.v, map.f);
}

std::string fmt(double x, int prec = 8) {
  std::ostringstream s;
  s << std::setprecision(prec) << x;
  return s.str();
}

}  // namespace

// ---- minimize -------------------------------------------------------------------------------

int cmd_minimize(const RunConfig& c, std::ostream& out, fs::path& run_dir) {
  const WarpFunction warp = warp_of(c);
  std::vector<double> alphas = c.get_doubles("alphas", {c.get_double("alpha", 1.05)});
  AlphaSchedule schedule{alphas};
  schedule.validate();
  const SolveOptions opts = solve_options_of(c);
  const MeshPtr mesh = mesh_of(c, 5);

  const std::string init = c.get("init", "degree");
  DiscreteMap start;
  if (init == "degree") {
    start = init_degree(mesh, static_cast<int>(c.get_int("degree", 1)), c.get_double("f0", 0.0));
  } else if (init == "neck") {
    NeckParams p;
    p.eps0 = c.get_double("neck_eps0", p.eps0);
    p.R0 = c.get_double("neck_R0", p.R0);
    p.delta0 = c.get_double("neck_delta0", p.delta0);
    p.winds = static_cast<int>(c.get_int("neck_winds", 0));
    p.path = NeckPath::linear(c.get_double("neck_amplitude", 0.0));
    start = init_neck(mesh, p);
  } else {
    throw ConfigError("init must be degree or neck, got '" + init + "'");
  }
  const double amp = c.get_double("perturbation", 0.0);
  if (amp < 0.0) throw ConfigError("perturbation must be nonnegative");
  if (amp > 0.0) start = perturb(start, opts.seed, amp);
  start.validate(warp);

  const std::vector<SolveReport> reports = alpha_continuation(start, warp, schedule, opts);
  bool all_converged = true;
  for (const auto& r : reports) all_converged = all_converged && r.converged;
  const SolveReport& last = reports.back();

  run_dir = new_run_dir(c);
  nlohmann::json rep = last.to_json();
  rep.erase("iterates");
  rep["converged"] = all_converged;
  rep["degree"] = compute_degree(last.final_map).degree;
  rep["stages"] = nlohmann::json::array();
  for (const auto& r : reports) rep["stages"].push_back(r.to_json());
  rep["solver_options"] = opts.to_json();
  write_json(run_dir / "report.json", rep);
  write_json(run_dir / "manifest.json",
             make_manifest(c, {{"level", mesh->subdivision_level},
                               {"warp", warp.descriptor()},
                               {"alphas", alphas}}));
  write_map_csv(run_dir / "map.csv", last.final_map);
  {
    std::ofstream tr(run_dir / "energy_trace.csv");
    tr.precision(17);
    tr << "stage,alpha,iter,energy_alpha,grad_norm,max_grad,degree\n";
    for (std::size_t s = 0; s < reports.size(); ++s) {
      for (const auto& it : reports[s].iterates) {
        tr << s << ',' << reports[s].alpha << ',' << it.iter << ',' << it.energy_alpha << ','
           << it.grad_norm << ',' << it.max_grad << ',' << it.degree << '\n';
      }
    }
  }
  for (const auto& r : reports) {
    out << "alpha " << fmt(r.alpha) << ": " << (r.converged ? "converged" : "NOT converged")
        << " after " << r.iterations << " iterations, E_alpha = " << fmt(r.final_energy, 12)
        << ", E = " << fmt(r.final_dirichlet, 12) << ", |grad| = " << fmt(r.final_grad_norm, 3)
        << '\n';
    for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
  }
  out << "run directory: " << run_dir.string() << '\n';
  return all_converged ? kSuccess : kNonConvergence;
}

// ---- sweep ----------------------------------------------------------------------------------

int cmd_sweep(const RunConfig& c, std::ostream& out, fs::path& run_dir) {
  const WarpFunction warp = warp_of(c);
  SweepOptions so;
  so.solve = solve_options_of(c);
  so.n_restarts = static_cast<int>(c.get_int("restarts", so.n_restarts));
  so.perturbation = c.get_double("perturbation", so.perturbation);
  so.f0 = c.get_double("f0", 0.0);
  const std::vector<double> alphas = c.get_doubles("alphas", {1.0, 1.01, 1.02, 1.05, 1.1});
  const int degree = static_cast<int>(c.get_int("degree", 1));
  const MeshPtr mesh = mesh_of(c, 5);

  const std::vector<SweepRow> rows = alpha_sweep(mesh, degree, warp, alphas, so);
  bool all_found = true;
  run_dir = new_run_dir(c);
  nlohmann::json rj = nlohmann::json::array();
  std::ofstream csv(run_dir / "sweep.csv");
  csv.precision(17);
  csv << "alpha,phi_hat,best_restart,rejected,all_converged,restart_energies\n";
  for (const auto& r : rows) {
    all_found = all_found && std::isfinite(r.phi_hat);
    rj.push_back({{"alpha", r.alpha},
                  {"phi_hat", r.phi_hat},
                  {"best_restart", r.best_restart},
                  {"rejected", r.rejected},
                  {"all_converged", r.all_converged},
                  {"restart_energies", r.restart_energies}});
    csv << r.alpha << ',' << r.phi_hat << ',' << r.best_restart << ',' << r.rejected << ','
        << r.all_converged << ',';
    for (std::size_t k = 0; k < r.restart_energies.size(); ++k) {
      csv << (k ? ";" : "") << r.restart_energies[k];
    }
    csv << '\n';
    out << "alpha " << fmt(r.alpha) << ": phi_hat = " << fmt(r.phi_hat, 12) << " (best restart "
        << r.best_restart << ", rejected " << r.rejected << ")\n";
  }
  write_json(run_dir / "report.json",
             {{"degree", degree}, {"rows", rj}, {"solver_options", so.solve.to_json()}});
  write_json(run_dir / "manifest.json",
             make_manifest(c, {{"level", mesh->subdivision_level}, {"warp", warp.descriptor()}}));
  out << "run directory: " << run_dir.string() << '\n';
  return all_found ? kSuccess : kNonConvergence;
}

// ---- spectrum -------------------------------------------------------------------------------

int cmd_spectrum(const RunConfig& c, std::ostream& out, fs::path& run_dir) {
  const long kmax = c.get_int("kmax", 5);
  const double beta = c.get_double("beta", 1.0);
  const long bits = c.get_int("bits", 512);
  if (kmax < 1) throw ConfigError("kmax must be at least 1");
  const SpectrumTable table = accumulation_report(static_cast<int>(kmax), beta, bits);
  nlohmann::json rep = table.to_json();
  int code = kSuccess;
  const std::vector<long> levels = c.get_ints("harmonic_levels", {});
  if (!levels.empty()) {
    std::vector<int> lv(levels.begin(), levels.end());
    const HarmonicRootReport h = verify_harmonic_root(table.rows.front().root.approx, beta, lv,
                                                      c.get_double("offset", 0.05));
    rep["harmonic_root"] = h.to_json();
    if (!((h.refinement_ok || h.at_floor) && h.separation_ok)) code = kTheoremCheck;
  }
  run_dir = new_run_dir(c);
  write_json(run_dir / "report.json", rep);
  write_json(run_dir / "manifest.json", make_manifest(c, {{"warp", {{"kind", "spectrum"},
                                                                    {"beta", beta}}}}));
  {
    std::ofstream csv(run_dir / "spectrum.csv");
    table.write_csv(csv);
  }
  table.print(out);
  if (rep.contains("harmonic_root")) {
    const auto& h = rep["harmonic_root"];
    out << "harmonicity at t_1: at_floor=" << h["at_floor"] << " refinement_ok="
        << h["refinement_ok"] << " separation_ok=" << h["separation_ok"] << '\n';
  }
  out << "run directory: " << run_dir.string() << '\n';
  return code;
}

// ---- bubbles --------------------------------------------------------------------------------

int cmd_bubbles(const RunConfig& c, std::ostream& out, fs::path& run_dir) {
  const WarpFunction warp = warp_of(c, "tube:r=0.3");
  EpsilonPolicy pol;
  pol.eps0 = c.get_double("eps0", pol.eps0);
  pol.min_radius = c.get_double("min_radius", pol.min_radius);
  pol.max_radius = c.get_double("max_radius", pol.max_radius);
  pol.validate(warp);
  const double delta0 = c.get_double("delta0", 0.5);
  const double R0 = c.get_double("R0", 8.0);
  const double base_scale = c.get_double("base_scale", 0.15);
  DecomposeOptions dop;
  dop.R = c.get_double("R", R0);
  dop.n_grid = static_cast<int>(c.get_int("n_grid", dop.n_grid));
  dop.neck_samples = static_cast<int>(c.get_int("neck_samples", dop.neck_samples));

  const std::string family = c.get("family", "winds");
  std::vector<FamilyMember> fam;
  std::vector<PinnedMember> pinned;
  nlohmann::json fam_json = {{"kind", family}};
  if (family == "identity") {
    const auto eps = c.get_doubles("eps", {0.04, 0.03, 0.02});
    const auto alphas = c.get_doubles("alphas", {1.01, 1.003, 1.0005});
    if (eps.size() < 2) throw ConfigError("defect analysis needs a family of at least 2 maps");
    fam = identity_family(mesh_of(c, 7), eps, alphas, delta0, R0, base_scale);
    fam_json["eps"] = eps;
  } else if (family == "winds") {
    const auto w = c.get_ints("winds", {2, 3, 4});
    const auto alphas = c.get_doubles("alphas", {1.1, 1.01, 1.001});
    if (w.size() < 2) throw ConfigError("defect analysis needs a family of at least 2 maps");
    const double q = neck_quantum(warp);
    const double tau = c.get_double("tau_quanta", 2.5) * q;
    const double neck = tau - 2.0 * q;  // tau - 8 pi psi(0)
    std::vector<int> winds(w.begin(), w.end());
    fam = pinned_winds_family(mesh_of(c, 7), warp, winds, alphas, c.get_double("amplitude", 0.2),
                              neck, delta0, R0, base_scale, &pinned);
    fam_json["winds"] = winds;
    fam_json["pinned_neck_energy"] = neck;
    nlohmann::json pj = nlohmann::json::array();
    for (const auto& p : pinned) {
      pj.push_back({{"winds", p.winds},
                    {"log_gap", p.log_gap},
                    {"eps0", p.eps0},
                    {"annulus_energy", p.annulus_energy},
                    {"closed_form", p.closed_form}});
    }
    fam_json["pinned"] = pj;
  } else if (family == "files") {
    const auto files = c.get_strings("maps");
    const auto alphas = c.get_doubles("alphas", {});
    if (files.size() != alphas.size()) {
      throw ConfigError("files family needs one alpha per map file");
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      std::ifstream in(files[i]);
      if (!in) throw ConfigError("cannot read map file " + files[i]);
      MeshCsv m = read_mesh_csv(in);
      if (m.v.empty()) throw ConfigError("map file " + files[i] + " carries no map values");
      fam.push_back({alphas[i], DiscreteMap(make_mesh(std::move(m.vertices), std::move(m.faces)),
                                            std::move(m.v), std::move(m.f))});
    }
    fam_json["maps"] = files;
  } else {
    throw ConfigError("family must be identity, winds or files, got '" + family + "'");
  }
  const DefectReport rep = energy_identity_defect(fam, warp, pol, dop);

  run_dir = new_run_dir(c);
  write_json(run_dir / "report.json",
             {{"policy", pol.to_json()}, {"family", fam_json}, {"defect", rep.to_json()}});
  write_json(run_dir / "manifest.json",
             make_manifest(c, {{"level", fam.front().map.mesh->subdivision_level},
                               {"warp", warp.descriptor()}}));
  {
    std::ofstream csv(run_dir / "defect.csv");
    rep.write_csv(csv);
  }
  for (std::size_t m = 0; m < rep.decompositions.size(); ++m) {
    const auto& necks = rep.decompositions[m].neck_annuli;
    for (std::size_t j = 0; j < necks.size(); ++j) {
      if (necks[j].profile.samples.empty()) continue;
      std::ofstream csv(run_dir / ("annulus_" + std::to_string(m) + "_" + std::to_string(j) +
                                   ".csv"));
      necks[j].profile.write_csv(csv);
    }
  }
  out << "quantum 4 pi psi(0) = " << fmt(rep.quantum) << '\n';
  out << std::setw(10) << "alpha" << std::setw(14) << "E_alpha" << std::setw(12) << "base"
      << std::setw(12) << "bubbles" << std::setw(12) << "necks" << std::setw(12) << "defect"
      << std::setw(10) << "closure" << '\n';
  for (const auto& r : rep.rows) {
    out << std::setw(10) << fmt(r.alpha, 6) << std::setw(14) << fmt(r.energy_alpha, 8)
        << std::setw(12) << fmt(r.base, 6) << std::setw(12) << fmt(r.bubble_sum, 6)
        << std::setw(12) << fmt(r.neck_sum, 6) << std::setw(12) << fmt(r.defect, 6)
        << std::setw(10) << fmt(r.closure_error, 3) << '\n';
  }
  out << "tau / quantum = " << fmt(rep.tau_over_quantum, 6) << ", trend slope "
      << fmt(rep.trend_slope, 4) << '\n';
  out << "flags:";
  for (const auto& f : rep.flags) out << " [" << f << "]";
  out << "\nrun directory: " << run_dir.string() << '\n';
  return kSuccess;
}

// ---- ledger ---------------------------------------------------------------------------------

int cmd_ledger(const RunConfig& c, std::ostream& out, fs::path& run_dir) {
  const double r = c.get_double("r");
  const BlendOrder blend = parse_blend_order(c.get("blend", "C2"));
  if (!(r > 0.0)) throw ConfigError("tube radius r must be positive, got " + fmt(r));
  // psi(0) = r^2 exp(2 sigma(0)); evaluated from the blend directly so radii beyond the
  // admissible range still get a verdict instead of a construction error
  const double psi0 = r * r * std::exp(2.0 * tube_blend(0.0, blend).sigma);
  const LedgerReport rep = ledger(r, psi0);
  run_dir = new_run_dir(c);
  write_json(run_dir / "report.json", rep.to_json());
  write_json(run_dir / "manifest.json", make_manifest(c));
  out << "r = " << fmt(r) << ", psi(0) = " << fmt(psi0) << ", r_max = " << fmt(rep.r_max, 10)
      << '\n';
  out << "(a) 4 pi psi0 = " << fmt(rep.quantum) << " <= 16 pi r^2 = " << fmt(rep.quantum_bound)
      << ": " << std::boolalpha << rep.quantum_below_bound << '\n';
  out << "(b) 12 pi psi0 = " << fmt(rep.triple_quantum) << " < 48 pi r^2 = "
      << fmt(rep.tube_bound) << ": " << rep.triple_below_tube << '\n';
  out << "(c) 48 pi r^2 < pi (pi - 2r)^2 = " << fmt(rep.monotonicity_bound) << ": "
      << rep.tube_below_monotonicity << '\n';
  out << "(d) r < pi / (4 sqrt 3 + 2): " << rep.radius_admissible << '\n';
  out << "run directory: " << run_dir.string() << '\n';
  return rep.all_hold() ? kSuccess : kLedgerViolation;
}

// ---- report ---------------------------------------------------------------------------------

namespace {

void csv_to_dat(const fs::path& csv, const fs::path& dat) {
  std::ifstream in(csv);
  std::ofstream o(dat);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    o << (header ? "# " : "") << line << '\n';
    header = false;
  }
}

}  // namespace

int cmd_report(const RunConfig& c, std::ostream& out) {
  const fs::path dir = c.get("run_dir");
  if (!fs::is_directory(dir)) throw ConfigError("run directory " + dir.string() + " not found");
  if (!fs::exists(dir / "manifest.json") || !fs::exists(dir / "report.json")) {
    throw ConfigError("no manifest.json/report.json in " + dir.string() +
                      " (not a completed run directory)");
  }
  const nlohmann::json man = read_json(dir / "manifest.json");
  const nlohmann::json rep = read_json(dir / "report.json");
  const std::string cmd = man.value("command", "");
  std::ostringstream sum;
  sum << "command " << cmd << ", version " << man.value("version", "?") << ", config hash "
      << man.value("config_hash", "?") << '\n';
  std::vector<std::string> emitted;

  if (cmd == "minimize") {
    std::ofstream dat(dir / "energy_trace.dat");
    dat.precision(17);
    dat << "# stage alpha iter energy_alpha grad_norm max_grad degree\n";
    std::size_t s = 0;
    for (const auto& st : rep.at("stages")) {
      if (s) dat << "\n\n";
      for (const auto& it : st.at("iterates")) {
        dat << s << ' ' << st.at("alpha").get<double>() << ' ' << it.at("iter").get<int>() << ' '
            << it.at("energy_alpha").get<double>() << ' ' << it.at("grad_norm").get<double>()
            << ' ' << it.at("max_grad").get<double>() << ' ' << it.at("degree").get<int>()
            << '\n';
      }
      ++s;
    }
    emitted.push_back("energy_trace.dat");
    sum << "converged " << rep.value("converged", false) << ", final E_alpha "
        << fmt(rep.value("final_energy_alpha", 0.0), 12) << ", E "
        << fmt(rep.value("final_energy", 0.0), 12) << ", degree " << rep.value("degree", 0)
        << '\n';
  } else if (cmd == "sweep") {
    std::ofstream dat(dir / "phi_alpha.dat");
    dat.precision(17);
    dat << "# alpha phi_hat rejected\n";
    for (const auto& r : rep.at("rows")) {
      const double phi = r.at("phi_hat").is_number() ? r.at("phi_hat").get<double>() : NAN;
      dat << r.at("alpha").get<double>() << ' ' << phi << ' ' << r.at("rejected").get<int>()
          << '\n';
      sum << "alpha " << fmt(r.at("alpha").get<double>()) << " phi_hat " << fmt(phi, 12) << '\n';
    }
    emitted.push_back("phi_alpha.dat");
  } else if (cmd == "spectrum") {
    std::ofstream dat(dir / "gap_vs_k.dat");
    dat.precision(17);
    dat << "# k log10_gap t_k_k_pi\n";
    for (const auto& r : rep.at("rows")) {
      dat << r.at("k").get<int>() << ' ' << r.at("gap_log10").get<double>() << ' '
          << r.at("tk_k_pi").get<double>() << '\n';
    }
    emitted.push_back("gap_vs_k.dat");
    sum << rep.value("claim", "") << '\n';
  } else if (cmd == "bubbles") {
    const auto& d = rep.at("defect");
    std::ofstream dat(dir / "defect.dat");
    dat.precision(17);
    dat << "# member alpha energy_alpha base bubble_sum neck_sum defect\n";
    int m = 0;
    for (const auto& r : d.at("rows")) {
      dat << m++ << ' ' << r.at("alpha").get<double>() << ' '
          << r.at("energy_alpha").get<double>() << ' ' << r.at("base").get<double>() << ' '
          << r.at("bubble_sum").get<double>() << ' ' << r.at("neck_sum").get<double>() << ' '
          << r.at("defect").get<double>() << '\n';
    }
    emitted.push_back("defect.dat");
    std::vector<fs::path> annuli;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("annulus_", 0) == 0 && e.path().extension() == ".csv") {
        annuli.push_back(e.path());
      }
    }
    std::sort(annuli.begin(), annuli.end());
    for (const auto& a : annuli) {
      fs::path dat_path = a;
      dat_path.replace_extension(".dat");
      csv_to_dat(a, dat_path);
      emitted.push_back(dat_path.filename().string());
    }
    sum << "tau/quantum " << fmt(d.at("tau_over_quantum").get<double>(), 6) << ", flags:";
    for (const auto& f : d.at("flags")) sum << " [" << f.get<std::string>() << "]";
    sum << '\n';
  } else if (cmd == "ledger") {
    sum << "verdicts " << rep.at("verdicts").dump() << '\n';
  } else {
    throw ConfigError("manifest names an unknown command '" + cmd + "'");
  }
  for (const auto& e : emitted) sum << "wrote " << (dir / e).string() << '\n';
  write_text(dir / "summary.txt", sum.str());
  out << sum.str();
  return kSuccess;
}

// ---- dispatch -------------------------------------------------------------------------------

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err, fs::path* run_dir) {
  fs::path dir;
  int code = kFailure;
  try {
    const long threads = config.get_int("threads", -1);
    if (threads >= 0) set_thread_count(static_cast<int>(threads));
    const std::string& cmd = config.command();
    if (cmd == "minimize") {
      code = cmd_minimize(config, out, dir);
    } else if (cmd == "sweep") {
      code = cmd_sweep(config, out, dir);
    } else if (cmd == "spectrum") {
      code = cmd_spectrum(config, out, dir);
    } else if (cmd == "bubbles") {
      code = cmd_bubbles(config, out, dir);
    } else if (cmd == "ledger") {
      code = cmd_ledger(config, out, dir);
    } else if (cmd == "report") {
      code = cmd_report(config, out);
    } else {
      throw ConfigError("unknown command '" + cmd + "'");
    }
  } catch (const PrecisionError& e) {
    err << "precision error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const InvariantError& e) {
    err << "theorem check failed: " << e.what() << '\n';
    code = kTheoremCheck;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kFailure;
  }
  if (run_dir) *run_dir = dir;
  return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"warp-harmonic: alpha-harmonic maps into warped products S^2 x I"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_file;
    bool deterministic = false;
  };
  std::map<std::string, Sub> subs;
  auto add_keys = [](Sub& s, const std::vector<OptionSpec>& specs) {
    for (const auto& o : specs) {
      s.options[o.key] = s.app->add_option(option_name(o.key), s.values[o.key], o.help);
    }
  };
  const std::map<std::string, std::string> about = {
      {"minimize", "minimize E_alpha from a degree-d or neck initial map"},
      {"sweep", "estimate phi(alpha) over a list of alphas with seeded restarts"},
      {"spectrum", "critical points t_k of the spectrum warp and their energy gaps"},
      {"bubbles", "bubble/neck decomposition and energy-identity defect of a family"},
      {"ledger", "energy-quantization inequality chain for a tube radius"}};
  for (const auto& [name, specs] : kCommands) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, about.at(name));
    add_keys(s, specs);
    add_keys(s, kCommon);
    s.app->add_option("--config", s.config_file, "key=value config file; options override it");
    s.app->add_flag("--deterministic", s.deterministic, "single-threaded deterministic mode");
  }
  Sub& rep = subs["report"];
  rep.app = app.add_subcommand("report", "emit plot data and a summary for a run directory");
  rep.options["run_dir"] = rep.app->add_option("run_dir", rep.values["run_dir"], "run directory")
                               ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    RunConfig cfg(name);
    try {
      if (!s.config_file.empty()) {
        const RunConfig file = RunConfig::from_file(s.config_file);
        if (!file.command().empty() && file.command() != name) {
          throw ConfigError("config file is for command '" + file.command() + "', not '" + name +
                            "'");
        }
        cfg.merge(file);
        cfg.set_command(name);
      }
      for (const auto& [key, opt] : s.options) {
        if (opt->count() > 0) cfg.set(key, s.values[key]);
      }
      if (s.deterministic) cfg.set("threads", "1");
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kConfigError;
    }
    return dispatch(cfg, out, err);
  }
  return kConfigError;
}

}  // namespace warp_harmonic::cli
