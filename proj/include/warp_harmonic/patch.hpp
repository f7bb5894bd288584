#pragma once

#include <complex>
#include <vector>

#include "warp_harmonic/discrete_map.hpp"

namespace warp_harmonic {

class WarpFunction;

/// A map resampled on a square grid of chart coordinates covering the disk D_R.
///
/// Node (i, j) sits at z = -R + i*spacing + 1i*(-R + j*spacing) and represents the domain
/// point with stereographic coordinate scale * z in the chart centered at `center`.
/// Nodes within one ring outside D_R are sampled too so boundary cells are complete.
struct PlanarPatch {
  Vec3 center;
  double scale = 1.0;
  double radius = 1.0;
  int n_grid = 0;
  double spacing = 0.0;
  std::vector<Vec3> v;
  std::vector<double> f;
  std::vector<char> sampled;  // node carries values
  std::vector<char> inside;   // |z| <= R

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_grid + i; }
  std::complex<double> node(int i, int j) const {
    return {-radius + i * spacing, -radius + j * spacing};
  }
};

/// Resamples map at chart points center-chart(scale * z), z in D_R, by barycentric
/// interpolation on the containing face (v renormalized). Throws DomainError if
/// scale * R violates the chart guard (< 1) or a node cannot be located.
PlanarPatch resample_stereographic(const DiscreteMap& map, const Vec3& center, double scale,
                                   double R, int n_grid);

class FaceLocator;
PlanarPatch resample_stereographic(const DiscreteMap& map, const FaceLocator& locator,
                                   const Vec3& center, double scale, double R, int n_grid);

/// Dirichlet energy 1/2 int_{D_R} (|grad v|^2 + |grad f|^2) psi(f) of the patch, using
/// P1 elements on the grid cells whose centers lie in D_R. Conformal invariance makes
/// this the energy of the map on the corresponding domain disk.
double patch_energy(const PlanarPatch& patch, const WarpFunction& warp);

}  // namespace warp_harmonic
