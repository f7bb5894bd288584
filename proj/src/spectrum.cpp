#include "warp_harmonic/spectrum.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mpfloat.hpp"
#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/mesh.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic {

using detail::MpFloat;

namespace {

constexpr double kPi = std::numbers::pi;

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
}

// h(x) = 2 beta x sin x - cos x vanishes iff tan x = 1/(2 beta x), x = 1/t.
double h_double(double x, double beta) { return 2.0 * beta * x * std::sin(x) - std::cos(x); }

// Double-precision root on (k pi, k pi + pi/2) by bisection; seeds the MPFR refinement and
// sizes the precision budget.
double root_double(int k, double beta) {
  double lo = k * kPi, hi = k * kPi + 0.5 * kPi;
  double hlo = h_double(lo, beta);
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h_double(mid, beta);
    if ((hm < 0) == (hlo < 0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

long required_bits(double t, double beta) {
  check_beta(beta);
  if (!(t != 0.0) || !std::isfinite(t)) throw ConfigError("t must be finite and nonzero");
  return static_cast<long>(std::ceil(beta / (t * t) / std::numbers::ln2)) + 64;
}

double residual_bound_log10(long precision_bits) { return -0.2 * static_cast<double>(precision_bits); }

std::vector<CriticalPoint> critical_points(int k_max, long precision_bits, double beta) {
  check_beta(beta);
  if (k_max < 1 || k_max > 50) throw ConfigError("k_max must lie in [1, 50]");
  if (precision_bits < 64) throw ConfigError("precision_bits must be at least 64");
  const mpfr_prec_t work = precision_bits + 32;
  std::vector<CriticalPoint> out;
  for (int k = 1; k <= k_max; ++k) {
    const MpFloat pi = MpFloat::pi(work);
    MpFloat lo = pi * static_cast<double>(k);
    MpFloat hi = lo + pi * 0.5;
    const MpFloat two_beta(work, 2.0 * beta);
    auto h = [&](const MpFloat& x) { return two_beta * x * sin(x) - cos(x); };
    auto dh = [&](const MpFloat& x) {
      return (two_beta + MpFloat(work, 1.0)) * sin(x) + two_beta * x * cos(x);
    };
    const int s_lo = h(lo).sign();
    const int s_hi = h(hi).sign();
    if (s_lo == 0 || s_hi == 0 || s_lo == s_hi) {
      throw InvariantError("no sign change of tan x - 1/(2 beta x) on bracket k = " +
                           std::to_string(k));
    }
    MpFloat x(work, root_double(k, beta));
    if (!(x > lo && x < hi)) x = (lo + hi) * 0.5;
    // safeguarded Newton: fall back to bisection whenever the step leaves the bracket
    MpFloat tol(work);
    mpfr_set_ui_2exp(tol.get(), 1, -static_cast<mpfr_exp_t>(precision_bits + 16), MPFR_RNDN);
    tol = tol * hi;
    for (int it = 0; it < 4 * static_cast<int>(work); ++it) {
      const MpFloat hx = h(x);
      if (hx.sign() == 0) break;
      if (hx.sign() == s_lo) lo = x; else hi = x;
      MpFloat next = x - hx / dh(x);
      if (!(next > lo && next < hi)) next = (lo + hi) * 0.5;
      const MpFloat step = abs(next - x);
      x = next;
      if (step < tol) break;
    }
    // report at the requested precision
    MpFloat xr(precision_bits);
    mpfr_set(xr.get(), x.get(), MPFR_RNDN);
    const MpFloat t = reciprocal(xr);
    const MpFloat res = abs(tan(reciprocal(t)) - t / MpFloat(precision_bits, 2.0 * beta));

    CriticalPoint cp;
    cp.k = k;
    cp.beta = beta;
    cp.precision_bits = precision_bits;
    cp.value = t.to_string();
    cp.approx = t.to_double();
    cp.residual = res.sign() == 0 ? "0" : res.to_string(6);
    cp.residual_log10 = res.sign() == 0 ? -std::numeric_limits<double>::infinity() : res.log10_abs();
    // psi'(t) = e (2 beta/t^3 sin(1/t) - cos(1/t)/t^2), reported relative to its scale
    const MpFloat inv = reciprocal(t);
    const MpFloat inv2 = inv * inv;
    const MpFloat e = exp(-(inv2 * beta));
    const MpFloat dpsi = e * (inv2 * inv * (2.0 * beta) * sin(inv) - inv2 * cos(inv));
    const MpFloat scale = e * (inv2 * inv * (2.0 * beta) + inv2);
    const MpFloat rel = abs(dpsi / scale);
    cp.psi_prime_rel = rel.sign() == 0 ? -std::numeric_limits<double>::infinity() : rel.log10_abs();
    out.push_back(std::move(cp));
  }
  return out;
}

RootEnergy energy_of_root(const CriticalPoint& root, long precision_bits) {
  const long need = required_bits(root.approx, root.beta);
  if (precision_bits < need) {
    throw PrecisionError("psi(t_" + std::to_string(root.k) + ") needs at least " +
                             std::to_string(need) + " bits, got " + std::to_string(precision_bits),
                         need);
  }
  const MpFloat t(precision_bits, root.value);
  const MpFloat inv = reciprocal(t);
  const MpFloat e = exp(-(inv * inv * root.beta));
  const MpFloat s = sin(inv);
  const MpFloat dev = e * s;  // psi - 1, computed without cancellation
  const MpFloat one(precision_bits, 1.0);
  const MpFloat psi = one + dev;
  const MpFloat four_pi = MpFloat::pi(precision_bits) * 4.0;
  const MpFloat gap = abs(dev) * four_pi;
  RootEnergy r;
  r.psi = psi.to_string();
  r.energy = (psi * four_pi).to_string();
  r.gap = gap.to_string(20);
  r.gap_approx = gap.to_double();
  r.gap_log10 = gap.sign() == 0 ? -std::numeric_limits<double>::infinity() : gap.log10_abs();
  r.psi_sign = dev.sign();
  return r;
}

SpectrumTable accumulation_report(int k_max, double beta, long precision_bits) {
  check_beta(beta);
  if (k_max < 1 || k_max > 50) throw ConfigError("k_max must lie in [1, 50]");
  if (precision_bits < 64) throw ConfigError("precision_bits must be at least 64");
  // the smallest root needs the most bits; check before any high-precision work
  const double t_last = 1.0 / root_double(k_max, beta);
  const long need = required_bits(t_last, beta);
  if (precision_bits < need) {
    throw PrecisionError("k_max = " + std::to_string(k_max) + " needs at least " +
                             std::to_string(need) + " bits, got " + std::to_string(precision_bits),
                         need);
  }

  SpectrumTable table;
  table.beta = beta;
  table.precision_bits = precision_bits;
  const double bound = residual_bound_log10(precision_bits);
  for (auto& cp : critical_points(k_max, precision_bits, beta)) {
    SpectrumRow row;
    row.energy = energy_of_root(cp, precision_bits);
    row.tk_k_pi = cp.approx * cp.k * kPi;
    row.root = std::move(cp);
    table.rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!(r.root.residual_log10 < bound)) {
      throw InvariantError("residual of t_" + std::to_string(r.root.k) + " above 10^" +
                           std::to_string(bound));
    }
    if (r.energy.psi_sign == 0) {
      throw InvariantError("gap vanishes at t_" + std::to_string(r.root.k));
    }
    if (i > 0) {
      const auto& p = table.rows[i - 1];
      if (!(r.root.approx < p.root.approx)) throw InvariantError("t_k not strictly decreasing");
      if (!(r.energy.gap_log10 < p.energy.gap_log10)) {
        throw InvariantError("gap not strictly decreasing at k = " + std::to_string(r.root.k));
      }
    }
  }
  table.verified = true;
  std::ostringstream claim;
  claim << "4 pi is an accumulation point of the harmonic-sphere energies: verified at k_max = "
        << k_max << " (gaps positive, strictly decreasing to 10^"
        << std::fixed << std::setprecision(1) << table.rows.back().energy.gap_log10 << ")";
  table.claim = claim.str();
  return table;
}

nlohmann::json SpectrumTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"k", r.root.k},
                         {"t_k", r.root.value},
                         {"residual", r.root.residual},
                         {"psi_tk", r.energy.psi},
                         {"energy", r.energy.energy},
                         {"gap", r.energy.gap},
                         {"gap_log10", r.energy.gap_log10},
                         {"tk_k_pi", r.tk_k_pi}});
  }
  return {{"beta", beta},
          {"precision_bits", precision_bits},
          {"verified", verified},
          {"claim", claim},
          {"rows", rows_json}};
}

void SpectrumTable::write_csv(std::ostream& out) const {
  out << "k,t_k,residual,psi_tk,energy,gap\n";
  for (const auto& r : rows) {
    out << r.root.k << ',' << r.root.value << ',' << r.root.residual << ',' << r.energy.psi << ','
        << r.energy.energy << ',' << r.energy.gap << '\n';
  }
}

void SpectrumTable::print(std::ostream& out) const {
  out << "beta = " << beta << ", precision = " << precision_bits << " bits\n";
  out << std::setw(4) << "k" << std::setw(26) << "t_k" << std::setw(14) << "log10 resid"
      << std::setw(28) << "gap |4pi psi - 4pi|" << std::setw(12) << "t_k k pi" << '\n';
  for (const auto& r : rows) {
    std::ostringstream tk;
    tk << std::setprecision(20) << r.root.approx;
    out << std::setw(4) << r.root.k << std::setw(26) << tk.str() << std::setw(14)
        << std::fixed << std::setprecision(1) << r.root.residual_log10 << std::setw(28)
        << r.energy.gap.substr(0, 12) + r.energy.gap.substr(r.energy.gap.find('e'))
        << std::setw(12) << std::setprecision(6) << r.tk_k_pi << std::defaultfloat << '\n';
  }
  if (!claim.empty()) out << claim << '\n';
}

nlohmann::json HarmonicRootReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) {
    lv.push_back({{"level", l.level},
                  {"residual_f", l.residual_f},
                  {"residual_v", l.residual_v},
                  {"residual_f_offset", l.residual_f_offset},
                  {"energy", l.energy}});
  }
  return {{"t", t},          {"beta", beta},
          {"offset", offset}, {"levels", lv},
          {"ratios", ratios}, {"floor", floor},
          {"at_floor", at_floor}, {"refinement_ok", refinement_ok},
          {"separation_ok", separation_ok}};
}

HarmonicRootReport verify_harmonic_root(double t, double beta, const std::vector<int>& levels,
                                        double offset) {
  check_beta(beta);
  if (levels.empty()) throw ConfigError("verify_harmonic_root needs at least one mesh level");
  const WarpFunction warp = make_spectrum_warp(beta);
  if (!warp.in_domain(t) || !warp.in_domain(t + offset)) {
    throw ConfigError("root and comparison point must lie in the warp domain");
  }
  HarmonicRootReport rep;
  rep.t = t;
  rep.beta = beta;
  rep.offset = offset;

  // Rounding noise of psi'(t) in double: the two terms of psi' cancel at a root, and t
  // itself is rounded. The assembled f-residual is psi'(t) times a fixed load vector.
  const double eps = std::numeric_limits<double>::epsilon();
  const double e = std::exp(-beta / (t * t));
  const double term_scale = e * (2.0 * beta / std::abs(t * t * t) + 1.0 / (t * t));
  const double dt = 1e-6 * std::abs(t);
  const double d2 = std::abs(warp.derivative(t + dt) - warp.derivative(t - dt)) / (2.0 * dt);
  const double dpsi_noise = 16.0 * eps * term_scale + d2 * eps * std::abs(t);
  const double dpsi_offset = std::abs(warp.derivative(t + offset));

  double floor = 0.0;
  for (int level : levels) {
    const MeshPtr mesh = build_icosphere(level);
    DiscreteMap root_map = init_degree(mesh, 1, t);
    DiscreteMap off_map = init_degree(mesh, 1, t + offset);
    const Residual r0 = el_residual(root_map, warp);
    const Residual r1 = el_residual(off_map, warp);
    HarmonicRootLevel l;
    l.level = level;
    l.residual_f = r0.norm_f;
    l.residual_v = r0.norm_v;
    l.residual_f_offset = r1.norm_f;
    l.energy = energy(root_map, warp).total_E;
    rep.levels.push_back(l);
    if (dpsi_offset > 0.0) floor = std::max(floor, dpsi_noise * r1.norm_f / dpsi_offset);
  }
  rep.floor = floor;
  rep.at_floor = true;
  rep.separation_ok = true;
  for (const auto& l : rep.levels) {
    rep.at_floor &= l.residual_f <= floor;
    rep.separation_ok &= l.residual_f_offset >= 10.0 * l.residual_f;
  }
  rep.refinement_ok = rep.levels.size() > 1;
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    const double prev = rep.levels[i - 1].residual_f;
    const double ratio = prev > 0.0 ? rep.levels[i].residual_f / prev
                                    : std::numeric_limits<double>::quiet_NaN();
    rep.ratios.push_back(ratio);
    rep.refinement_ok &= ratio <= 0.5;
  }
  return rep;
}

}  // namespace warp_harmonic
