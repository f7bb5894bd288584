#include "warp_harmonic/warp.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "warp_harmonic/error.hpp"

namespace warp_harmonic {

namespace {

constexpr double kPi = std::numbers::pi;
const double kLog2 = std::log(2.0);

// Even blend profiles in s = a / log 2 matching sigma(a) = a to the stated order at s = 1.
constexpr std::array<double, 3> kQuarticCoeffs = {3.0 / 8.0, 3.0 / 4.0, -1.0 / 8.0};
constexpr std::array<double, 5> kOcticCoeffs = {35.0 / 128.0, 35.0 / 32.0, -35.0 / 64.0,
                                                 7.0 / 32.0, -5.0 / 128.0};

template <std::size_t N>
BlendSample even_poly(const std::array<double, N>& c, double s) {
  // g(s) = sum c_i s^{2i}
  double g = c[0], d1 = 0.0, d2 = 0.0;
  const double s2 = s * s;
  double pow_below = 1.0;  // s^{2i-2}
  for (std::size_t i = 1; i < N; ++i) {
    const double n = 2.0 * static_cast<double>(i);
    g += c[i] * pow_below * s2;
    d1 += c[i] * n * pow_below * s;
    d2 += c[i] * n * (n - 1.0) * pow_below;
    pow_below *= s2;
  }
  return {g, d1, d2};
}

constexpr double kSpectrumEdge = 0.5;
constexpr double kSpectrumWindow = 0.05;

double spectrum_core(double t, double beta) {
  if (t == 0.0) return 1.0;
  const double e = std::exp(-beta / (t * t));
  if (e == 0.0) return 1.0;
  return e * std::sin(1.0 / t) + 1.0;
}

double spectrum_core_derivative(double t, double beta) {
  if (t == 0.0) return 0.0;
  const double e = std::exp(-beta / (t * t));
  if (e == 0.0) return 0.0;
  const double inv = 1.0 / t;
  return e * (2.0 * beta * inv * inv * inv * std::sin(inv) - inv * inv * std::cos(inv));
}

// Quintic smoothstep: C2 transition 0 -> 1 on [0, 1].
double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smoothstep_derivative(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

double spectrum_value(double t, double beta) {
  const double a = std::abs(t);
  if (a <= kSpectrumEdge) return spectrum_core(t, beta);
  const double frozen = spectrum_core(std::copysign(kSpectrumEdge, t), beta);
  if (a >= kSpectrumEdge + kSpectrumWindow) return frozen;
  const double w = smoothstep((a - kSpectrumEdge) / kSpectrumWindow);
  return (1.0 - w) * spectrum_core(t, beta) + w * frozen;
}

double spectrum_derivative(double t, double beta) {
  const double a = std::abs(t);
  if (a <= kSpectrumEdge) return spectrum_core_derivative(t, beta);
  if (a >= kSpectrumEdge + kSpectrumWindow) return 0.0;
  const double frozen = spectrum_core(std::copysign(kSpectrumEdge, t), beta);
  const double s = (a - kSpectrumEdge) / kSpectrumWindow;
  const double w = smoothstep(s);
  // d/dt of |t| is sign(t)
  const double dw = smoothstep_derivative(s) / kSpectrumWindow * std::copysign(1.0, t);
  return (1.0 - w) * spectrum_core_derivative(t, beta) +
         dw * (frozen - spectrum_core(t, beta));
}

double tube_value(double t, const TubeParams& p) {
  const double a = std::abs(t);
  if (a >= kLog2) return std::exp(2.0 * a + 2.0 * std::log(p.r));
  return p.r * p.r * std::exp(2.0 * tube_blend(a, p.blend).sigma);
}

double tube_derivative(double t, const TubeParams& p) {
  const double a = std::abs(t);
  const double slope = (a >= kLog2) ? 1.0 : tube_blend(a, p.blend).d1;
  return 2.0 * slope * std::copysign(1.0, t) * tube_value(t, p);
}

// shortest text that round-trips
std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(BlendOrder order) { return order == BlendOrder::C2 ? "C2" : "C4"; }

BlendOrder parse_blend_order(const std::string& text) {
  if (text == "C2" || text == "c2") return BlendOrder::C2;
  if (text == "C4" || text == "c4") return BlendOrder::C4;
  throw ConfigError("blend_order must be C2 or C4, got '" + text + "'");
}

double tube_radius_max() { return kPi / (4.0 * std::sqrt(3.0) + 2.0); }

BlendSample tube_blend(double a, BlendOrder order) {
  const double s = a / kLog2;
  const BlendSample g =
      order == BlendOrder::C2 ? even_poly(kQuarticCoeffs, s) : even_poly(kOcticCoeffs, s);
  return {kLog2 * g.sigma, g.d1, g.d2 / kLog2};
}

WarpFunction::WarpFunction(Kind kind, double t_min, double t_max)
    : kind_(std::move(kind)), t_min_(t_min), t_max_(t_max) {
  if (!(t_min_ < t_max_)) throw ConfigError("warp domain must satisfy t_min < t_max");
}

double WarpFunction::value(double t) const {
  return std::visit(
      [t](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TubeParams>) return tube_value(t, p);
        else if constexpr (std::is_same_v<P, SpectrumParams>) return spectrum_value(t, p.beta);
        else return p.value(t);
      },
      kind_);
}

double WarpFunction::derivative(double t) const {
  return std::visit(
      [t](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TubeParams>) return tube_derivative(t, p);
        else if constexpr (std::is_same_v<P, SpectrumParams>)
          return spectrum_derivative(t, p.beta);
        else return p.derivative(t);
      },
      kind_);
}

nlohmann::json WarpFunction::descriptor() const {
  nlohmann::json j;
  std::visit(
      [&j](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TubeParams>) {
          j["kind"] = "tube";
          j["r"] = p.r;
          j["blend_order"] = to_string(p.blend);
        } else if constexpr (std::is_same_v<P, SpectrumParams>) {
          j["kind"] = "spectrum";
          j["beta"] = p.beta;
        } else {
          j["kind"] = "custom";
          j["label"] = p.label;
        }
      },
      kind_);
  j["domain"] = {t_min_, t_max_};
  return j;
}

std::string WarpFunction::label() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TubeParams>)
          return "tube:r=" + format_double(p.r) + ",blend=" + to_string(p.blend);
        else if constexpr (std::is_same_v<P, SpectrumParams>)
          return "spectrum:beta=" + format_double(p.beta);
        else return "custom:" + p.label;
      },
      kind_);
}

WarpFunction make_tube_warp(double r, BlendOrder blend) {
  if (!(r > 0.0) || !(r < tube_radius_max())) {
    throw ConfigError("tube radius r must lie in (0, " + format_double(tube_radius_max()) +
                      "), got " + format_double(r));
  }
  const double half_width = std::log(kPi / r);
  WarpFunction warp(TubeParams{r, blend}, -half_width, half_width);

  // psi' t > 0 on 0 < |t| < log 2; the blend is monotone by construction.
  constexpr int kChecks = 256;
  for (int i = 1; i < kChecks; ++i) {
    const double t = kLog2 * i / kChecks;
    if (!(warp.derivative(t) * t > 0.0) || !(warp.derivative(-t) * -t > 0.0)) {
      throw Error("tube blend violates the single-critical-point condition");
    }
  }
  return warp;
}

WarpFunction make_spectrum_warp(double beta) {
  if (!(beta > 0.0)) throw ConfigError("spectrum beta must be positive, got " + format_double(beta));
  return WarpFunction(SpectrumParams{beta}, -1.0, 1.0);
}

WarpFunction make_custom_warp(std::string label, std::function<double(double)> value,
                              std::function<double(double)> derivative, double t_min,
                              double t_max) {
  return WarpFunction(CustomParams{std::move(label), std::move(value), std::move(derivative)},
                      t_min, t_max);
}

WarpFunction warp_from_descriptor(const nlohmann::json& d) {
  if (!d.contains("kind")) throw ConfigError("warp descriptor missing field 'kind'");
  const std::string kind = d.at("kind").get<std::string>();
  if (kind == "tube") {
    if (!d.contains("r")) throw ConfigError("tube warp descriptor missing field 'r'");
    const BlendOrder blend =
        d.contains("blend_order") ? parse_blend_order(d.at("blend_order").get<std::string>())
                                  : BlendOrder::C2;
    return make_tube_warp(d.at("r").get<double>(), blend);
  }
  if (kind == "spectrum") {
    return make_spectrum_warp(d.contains("beta") ? d.at("beta").get<double>() : 1.0);
  }
  throw ConfigError("warp kind '" + kind + "' cannot be rebuilt from a descriptor");
}

WarpFunction parse_warp_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  nlohmann::json d;
  d["kind"] = kind;
  if (colon != std::string::npos) {
    std::stringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("warp parameter '" + item + "' lacks '='");
      const std::string key = item.substr(0, eq);
      const std::string val = item.substr(eq + 1);
      if (key == "blend" || key == "blend_order") {
        d["blend_order"] = val;
      } else {
        try {
          std::size_t used = 0;
          d[key] = std::stod(val, &used);
          if (used != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
          throw ConfigError("warp parameter '" + key + "' is not a number: '" + val + "'");
        }
      }
    }
  }
  if (kind != "tube" && kind != "spectrum") {
    throw ConfigError("unknown warp kind '" + kind + "' (expected tube or spectrum)");
  }
  return warp_from_descriptor(d);
}

nlohmann::json LedgerReport::to_json() const {
  return {{"r", r},
          {"psi0", psi0},
          {"r_max", r_max},
          {"quantum_4pi_psi0", quantum},
          {"bound_16pi_r2", quantum_bound},
          {"triple_12pi_psi0", triple_quantum},
          {"bound_48pi_r2", tube_bound},
          {"monotonicity_pi_pi_minus_2r_sq", monotonicity_bound},
          {"verdicts",
           {{"a_quantum_le_16pi_r2", quantum_below_bound},
            {"b_12pi_psi0_lt_48pi_r2", triple_below_tube},
            {"c_48pi_r2_lt_monotonicity", tube_below_monotonicity},
            {"d_r_lt_r_max", radius_admissible}}},
          {"all_hold", all_hold()}};
}

namespace {

// Strict / non-strict comparisons on quantities computed from double inputs. A margin
// inside the rounding band of the operands does not establish a strict inequality.
double tie_band(double lhs, double rhs) {
  return 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lhs), std::abs(rhs));
}
bool strictly_less(double lhs, double rhs) { return rhs - lhs > tie_band(lhs, rhs); }
bool less_or_equal(double lhs, double rhs) { return lhs - rhs <= tie_band(lhs, rhs); }

}  // namespace

LedgerReport ledger(double r, double psi0) {
  if (!(r > 0.0)) throw ConfigError("ledger: r must be positive, got " + format_double(r));
  if (!(psi0 > 0.0)) throw ConfigError("ledger: psi0 must be positive, got " + format_double(psi0));
  LedgerReport rep;
  rep.r = r;
  rep.psi0 = psi0;
  rep.r_max = tube_radius_max();
  rep.quantum = 4.0 * kPi * psi0;
  rep.quantum_bound = 16.0 * kPi * r * r;
  rep.triple_quantum = 12.0 * kPi * psi0;
  rep.tube_bound = 48.0 * kPi * r * r;
  rep.monotonicity_bound = kPi * (kPi - 2.0 * r) * (kPi - 2.0 * r);
  // pi cancels from (a)-(c); compare the reduced forms.
  rep.quantum_below_bound = less_or_equal(psi0, 4.0 * r * r);
  rep.triple_below_tube = strictly_less(psi0, 4.0 * r * r);
  // 48 r^2 < (pi - 2r)^2 with pi - 2r > 0  <=>  4 sqrt3 r < pi - 2r.
  rep.tube_below_monotonicity =
      (kPi - 2.0 * r > 0.0) && strictly_less(4.0 * std::sqrt(3.0) * r, kPi - 2.0 * r);
  rep.radius_admissible = strictly_less(r, rep.r_max);
  return rep;
}

std::vector<double> quantization_values(double psi0, int m_max) {
  if (!(psi0 > 0.0)) throw ConfigError("quantization_values: psi0 must be positive");
  if (m_max < 1) throw ConfigError("quantization_values: m_max must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m_max));
  for (int m = 1; m <= m_max; ++m) out.push_back(4.0 * m * kPi * psi0);
  return out;
}

}  // namespace warp_harmonic
