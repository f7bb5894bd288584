#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace warp_harmonic {

/// Bits needed so that exp(-beta/t^2) keeps 64 significant bits: ceil((beta/t^2)/ln 2) + 64.
long required_bits(double t, double beta = 1.0);

/// A critical point t_k of psi(t) = exp(-beta/t^2) sin(1/t) + 1, i.e. a root of
/// tan(1/t) = t/(2 beta) on the branch 1/t in (k pi, k pi + pi/2).
struct CriticalPoint {
  int k = 0;
  double beta = 1.0;
  long precision_bits = 0;
  std::string value;       // t_k, full-precision decimal
  double approx = 0.0;     // t_k rounded to double
  std::string residual;    // |tan(1/t_k) - t_k/(2 beta)|
  double residual_log10 = 0.0;
  double psi_prime_rel = 0.0;  // |psi'(t_k)| / (exp(-beta/t^2) (2 beta/t^3 + 1/t^2)), log10
};

/// Roots for k = 1..k_max by bracketed bisection + safeguarded Newton in arbitrary
/// precision. Requires 1 <= k_max <= 50 and precision_bits >= 64; throws InvariantError
/// on a bracket without sign change.
std::vector<CriticalPoint> critical_points(int k_max, long precision_bits, double beta = 1.0);

struct RootEnergy {
  std::string psi;     // psi(t_k)
  std::string energy;  // 4 pi psi(t_k)
  std::string gap;     // |4 pi psi(t_k) - 4 pi| = 4 pi exp(-beta/t^2) |sin(1/t)|
  double gap_approx = 0.0;  // may underflow to 0 in double; use gap_log10
  double gap_log10 = 0.0;
  int psi_sign = 0;    // sign of psi(t_k) - 1
};

/// Evaluates psi(t_k) at precision_bits. Throws PrecisionError naming the required bits
/// when precision_bits < required_bits(t_k, beta).
RootEnergy energy_of_root(const CriticalPoint& root, long precision_bits);

struct SpectrumRow {
  CriticalPoint root;
  RootEnergy energy;
  double tk_k_pi = 0.0;  // t_k * k * pi, tends to 1
};

struct SpectrumTable {
  double beta = 1.0;
  long precision_bits = 0;
  std::vector<SpectrumRow> rows;
  bool verified = false;  // gaps positive and strictly decreasing, residuals below bound
  std::string claim;

  nlohmann::json to_json() const;
  /// Decimal strings only; no binary floats in the file.
  void write_csv(std::ostream& out) const;
  /// Fixed-width human-readable table.
  void print(std::ostream& out) const;
};

/// Checks the precision budget up front (PrecisionError), computes every row and asserts
/// the accumulation invariants; any failure raises InvariantError.
SpectrumTable accumulation_report(int k_max, double beta, long precision_bits);

/// Residual bound 10^{-0.2 bits} of the table invariant, as log10.
double residual_bound_log10(long precision_bits);

struct HarmonicRootLevel {
  int level = 0;
  double residual_f = 0.0;         // el_residual f-norm at (identity, f = t)
  double residual_v = 0.0;
  double residual_f_offset = 0.0;  // same at f = t + offset (non-root comparison)
  double energy = 0.0;             // E(identity, f = t)
};

struct HarmonicRootReport {
  double t = 0.0;
  double beta = 1.0;
  double offset = 0.05;
  std::vector<HarmonicRootLevel> levels;
  std::vector<double> ratios;   // residual_f[l+1] / residual_f[l]
  double floor = 0.0;           // double-precision noise floor of residual_f
  bool at_floor = false;        // every residual_f is at or below the floor
  bool refinement_ok = false;   // every ratio <= 0.5
  bool separation_ok = false;   // offset residual >= 10x the root residual at every level

  nlohmann::json to_json() const;
};

/// Builds (identity, f = t) with the spectrum warp on each mesh level and evaluates the
/// Euler-Lagrange residuals, comparing against the non-root f = t + offset.
HarmonicRootReport verify_harmonic_root(double t, double beta, const std::vector<int>& levels,
                                        double offset = 0.05);

}  // namespace warp_harmonic
