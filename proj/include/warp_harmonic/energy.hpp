#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "warp_harmonic/discrete_map.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic {

struct FaceDensity {
  double grad_v_sq;  // |grad v|^2 on the face
  double grad_f_sq;  // |grad f|^2 on the face
  double psi;        // psi at the face mean of f
};

struct EnergyBreakdown {
  double total_E = 0.0;
  double total_E_alpha = 0.0;
  double alpha = 1.0;
  double v_part = 0.0;  // 1/2 int |grad v|^2 psi(f)
  double f_part = 0.0;  // 1/2 int |grad f|^2 psi(f)
  std::vector<FaceDensity> per_face;

  nlohmann::json to_json() const;
  void write_face_csv(std::ostream& out) const;
};

/// Dirichlet energy E = 1/2 sum_faces (|grad v|^2 + |grad f|^2) psi(mean f) area.
/// Throws DomainError naming the first vertex whose f lies outside the warp domain.
EnergyBreakdown energy(const DiscreteMap& map, const WarpFunction& warp);

/// E_alpha = 1/2 sum_faces ((1 + |grad u|^2)^alpha - 1) area, |grad u|^2 measured in the
/// target metric. alpha must lie in [1, 2].
EnergyBreakdown alpha_energy(const DiscreteMap& map, const WarpFunction& warp, double alpha);

/// Scalar E_alpha without the per-face breakdown.
double alpha_energy_value(const DiscreteMap& map, const WarpFunction& warp, double alpha);

struct EnergyGradient {
  double value = 0.0;       // E_alpha at the map
  std::vector<Vec3> v;      // dE/dv_i projected to the tangent plane at v_i
  std::vector<double> f;    // dE/df_i
};

/// Exact derivative of the discrete E_alpha with respect to the vertex values.
EnergyGradient energy_gradient(const DiscreteMap& map, const WarpFunction& warp, double alpha,
                               bool project = true);

struct Residual {
  std::vector<Vec3> v;
  std::vector<double> f;
  double norm_v = 0.0;
  double norm_f = 0.0;
};

/// Weak-form residuals of the harmonic map system in the (v, f) chart:
///   -div(psi(f) grad v) + psi(f)|grad v|^2 v = 0,
///   -div(psi(f) grad f) + 1/2 (|grad v|^2 + |grad f|^2) psi'(f) = 0,
/// tested against the P1 hat functions. The v residual is the tangential part of the
/// assembled first variation (the normal part is exactly the psi |grad v|^2 v term).
/// Norms are sqrt(sum_i |r_i|^2 / dual_area_i), the L2 norm of the pointwise residual.
Residual el_residual(const DiscreteMap& map, const WarpFunction& warp);

/// sqrt(sum_i |r_i|^2 / dual_area_i).
double dual_norm(const TriMesh& mesh, const std::vector<Vec3>& rv, const std::vector<double>& rf);

/// Per-face |grad u|^2 in the target metric, (|grad v|^2 + |grad f|^2) psi(mean f).
std::vector<double> face_energy_density(const DiscreteMap& map, const WarpFunction& warp);

/// Per-face conformal stretch sqrt((|grad v|^2 + |grad f|^2) / 2), measured against the
/// unwarped product metric ds^2 + dt^2. Equals 1/eps at the center of S^{-1}(z/eps).
std::vector<double> face_stretch(const DiscreteMap& map);

/// Pairing sum_i residual_f_i f_i and the quadrature of
/// int |grad f|^2 psi(f) + 1/2 int (|grad v|^2 + |grad f|^2) psi'(f) f.
struct FPairing {
  double pairing;
  double integral;
};
FPairing f_residual_pairing(const DiscreteMap& map, const WarpFunction& warp);

}  // namespace warp_harmonic
