#include "warp_harmonic/discrete_map.hpp"

#include <cmath>
#include <string>

#include "warp_harmonic/error.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic {

DiscreteMap::DiscreteMap(MeshPtr m, std::vector<Vec3> v_, std::vector<double> f_)
    : mesh(std::move(m)), v(std::move(v_)), f(std::move(f_)) {
  if (!mesh) throw ConfigError("map requires a mesh");
  if (v.size() != mesh->vertex_count() || f.size() != mesh->vertex_count()) {
    throw ConfigError("map fields do not match the mesh vertex count");
  }
}

DiscreteMap DiscreteMap::constant(MeshPtr m, const Vec3& v0, double f0) {
  const std::size_t n = m->vertex_count();
  return DiscreteMap(std::move(m), std::vector<Vec3>(n, v0.normalized()), std::vector<double>(n, f0));
}

void DiscreteMap::validate(const WarpFunction& warp, double unit_tol, double margin) const {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i].norm() - 1.0) > unit_tol) {
      throw DomainError("|v| != 1 at vertex " + std::to_string(i));
    }
    if (!warp.in_domain(f[i], margin)) {
      throw DomainError("f outside the warp domain at vertex " + std::to_string(i));
    }
  }
}

void DiscreteMap::renormalize() {
  for (auto& x : v) x.normalize();
}

}  // namespace warp_harmonic
