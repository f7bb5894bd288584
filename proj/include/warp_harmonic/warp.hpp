#pragma once

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace warp_harmonic {

enum class BlendOrder { C2, C4 };

std::string to_string(BlendOrder order);
BlendOrder parse_blend_order(const std::string& text);

/// Largest tube radius for which the quantization chain holds: pi / (4 sqrt(3) + 2).
double tube_radius_max();

struct TubeParams {
  double r = 0.0;
  BlendOrder blend = BlendOrder::C2;
};

struct SpectrumParams {
  double beta = 1.0;
};

struct CustomParams {
  std::string label;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// Warp profile psi of the target metric psi(t)(ds^2 + dt^2) on S^2 x (t_min, t_max).
///
/// Instances are immutable; value() and derivative() are pure and thread safe.
class WarpFunction {
 public:
  using Kind = std::variant<TubeParams, SpectrumParams, CustomParams>;

  WarpFunction(Kind kind, double t_min, double t_max);

  double value(double t) const;
  double derivative(double t) const;

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  bool in_domain(double t, double margin = 0.0) const {
    return t > t_min_ + margin && t < t_max_ - margin;
  }

  const Kind& kind() const { return kind_; }
  bool is_tube() const { return std::holds_alternative<TubeParams>(kind_); }
  bool is_spectrum() const { return std::holds_alternative<SpectrumParams>(kind_); }

  /// JSON descriptor {kind, r | beta, blend_order, domain}. Custom warps serialize
  /// their label only and cannot be rebuilt from it.
  nlohmann::json descriptor() const;

  /// Short human-readable form, e.g. "tube:r=0.3,blend=C2".
  std::string label() const;

 private:
  Kind kind_;
  double t_min_;
  double t_max_;
};

/// Tube warp: psi = r^2 exp(2 sigma(t)) with sigma(t) = |t| for |t| >= log 2 and an even
/// Hermite blend inside. Throws ConfigError unless 0 < r < tube_radius_max().
WarpFunction make_tube_warp(double r, BlendOrder blend = BlendOrder::C2);

/// Spectrum warp: psi = exp(-beta/t^2) sin(1/t) + 1 on |t| <= 1/2, frozen to its endpoint
/// value beyond a C2 window [0.5, 0.55]; domain (-1, 1).
WarpFunction make_spectrum_warp(double beta = 1.0);

WarpFunction make_custom_warp(std::string label, std::function<double(double)> value,
                              std::function<double(double)> derivative, double t_min,
                              double t_max);

WarpFunction warp_from_descriptor(const nlohmann::json& descriptor);

/// Parses "tube:r=0.3[,blend=C2]" or "spectrum[:beta=1]".
WarpFunction parse_warp_spec(const std::string& spec);

/// Closed-form blend profile sigma on [0, log 2] and its first two derivatives, exposed
/// for tests.
struct BlendSample {
  double sigma;
  double d1;
  double d2;
};
BlendSample tube_blend(double a, BlendOrder order);

struct LedgerReport {
  double r = 0.0;
  double psi0 = 0.0;
  double r_max = 0.0;
  double quantum = 0.0;           // 4 pi psi0
  double quantum_bound = 0.0;     // 16 pi r^2
  double triple_quantum = 0.0;    // 12 pi psi0
  double tube_bound = 0.0;        // 48 pi r^2
  double monotonicity_bound = 0.0;  // pi (pi - 2r)^2
  bool quantum_below_bound = false;      // (a) 4 pi psi0 <= 16 pi r^2
  bool triple_below_tube = false;        // (b) 12 pi psi0 < 48 pi r^2
  bool tube_below_monotonicity = false;  // (c) 48 pi r^2 < pi (pi - 2r)^2
  bool radius_admissible = false;        // (d) r < pi / (4 sqrt 3 + 2)

  bool all_hold() const {
    return quantum_below_bound && triple_below_tube && tube_below_monotonicity &&
           radius_admissible;
  }
  nlohmann::json to_json() const;
};

/// Evaluates the energy-quantization inequality chain for tube radius r and psi(0) = psi0.
/// Throws ConfigError unless r > 0 and psi0 > 0.
LedgerReport ledger(double r, double psi0);

/// [4 pi psi0, 8 pi psi0, ..., 4 m_max pi psi0].
std::vector<double> quantization_values(double psi0, int m_max);

}  // namespace warp_harmonic
