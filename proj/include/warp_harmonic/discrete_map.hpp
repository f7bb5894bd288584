#pragma once

#include <vector>

#include "warp_harmonic/mesh.hpp"

namespace warp_harmonic {

class WarpFunction;

/// A map u = (v, f) into S^2 x I sampled at mesh vertices.
struct DiscreteMap {
  MeshPtr mesh;
  std::vector<Vec3> v;    // unit vectors, the S^2 factor
  std::vector<double> f;  // interval factor, in the warp domain

  DiscreteMap() = default;
  DiscreteMap(MeshPtr m, std::vector<Vec3> v_, std::vector<double> f_);

  /// Constant map (v0, f0) on the mesh.
  static DiscreteMap constant(MeshPtr m, const Vec3& v0, double f0);

  std::size_t size() const { return v.size(); }

  /// Throws DomainError when |v| deviates from 1 by more than tol or f leaves the warp
  /// domain shrunk by margin.
  void validate(const WarpFunction& warp, double unit_tol = 1e-10, double margin = 0.0) const;

  void renormalize();
};

}  // namespace warp_harmonic
