#include "warp_harmonic/patch.hpp"

#include <cmath>
#include <string>

#include "warp_harmonic/error.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic {

PlanarPatch resample_stereographic(const DiscreteMap& map, const Vec3& center, double scale,
                                   double R, int n_grid) {
  const FaceLocator locator(map.mesh);
  return resample_stereographic(map, locator, center, scale, R, n_grid);
}

PlanarPatch resample_stereographic(const DiscreteMap& map, const FaceLocator& locator,
                                   const Vec3& center, double scale, double R, int n_grid) {
  if (!(scale > 0.0) || !(R > 0.0)) throw ConfigError("patch scale and radius must be positive");
  if (n_grid < 3) throw ConfigError("patch grid needs at least 3 nodes per side");
  if (!(scale * R < 1.0)) {
    throw DomainError("chart guard violated: scale*R = " + std::to_string(scale * R) +
                      " must be < 1; use a smaller R");
  }
  PlanarPatch p;
  p.center = center.normalized();
  p.scale = scale;
  p.radius = R;
  p.n_grid = n_grid;
  p.spacing = 2.0 * R / (n_grid - 1);
  const std::size_t n = static_cast<std::size_t>(n_grid) * n_grid;
  p.v.assign(n, Vec3::Zero());
  p.f.assign(n, 0.0);
  p.sampled.assign(n, 0);
  p.inside.assign(n, 0);

  const StereoChart chart(p.center);
  const double sample_radius = R + 1.5 * p.spacing;
  for (int j = 0; j < n_grid; ++j) {
    for (int i = 0; i < n_grid; ++i) {
      const auto z = p.node(i, j);
      const double rz = std::abs(z);
      const std::size_t k = p.index(i, j);
      p.inside[k] = rz <= R;
      if (rz > sample_radius) continue;
      const Vec3 x = chart.from_chart(scale * z);
      const auto hit = locator.locate(x);
      if (!hit) throw DomainError("patch node could not be located on the mesh");
      const Face& face = map.mesh->faces[hit->face];
      Vec3 vv = Vec3::Zero();
      double ff = 0.0;
      for (int c = 0; c < 3; ++c) {
        vv += hit->bary[c] * map.v[face[c]];
        ff += hit->bary[c] * map.f[face[c]];
      }
      p.v[k] = vv.normalized();
      p.f[k] = ff;
      p.sampled[k] = 1;
    }
  }
  return p;
}

double patch_energy(const PlanarPatch& p, const WarpFunction& warp) {
  const double h = p.spacing;
  const double tri_area = 0.5 * h * h;
  double total = 0.0;
  // P1 on the right triangles (a, b, d) and (a, d, c) of each cell with corners
  // a=(i,j) b=(i+1,j) c=(i,j+1) d=(i+1,j+1).
  auto tri = [&](std::size_t a, std::size_t b, std::size_t c, bool lower) {
    // lower: legs a->b along x, b->d along y; upper: legs a->c along y, c->d along x
    Vec3 dvx, dvy;
    double dfx, dfy;
    if (lower) {
      dvx = (p.v[b] - p.v[a]) / h;
      dvy = (p.v[c] - p.v[b]) / h;
      dfx = (p.f[b] - p.f[a]) / h;
      dfy = (p.f[c] - p.f[b]) / h;
    } else {
      dvy = (p.v[b] - p.v[a]) / h;
      dvx = (p.v[c] - p.v[b]) / h;
      dfy = (p.f[b] - p.f[a]) / h;
      dfx = (p.f[c] - p.f[b]) / h;
    }
    const double g2 = dvx.squaredNorm() + dvy.squaredNorm() + dfx * dfx + dfy * dfy;
    const double f_mean = (p.f[a] + p.f[b] + p.f[c]) / 3.0;
    return 0.5 * g2 * warp.value(f_mean) * tri_area;
  };
  for (int j = 0; j + 1 < p.n_grid; ++j) {
    for (int i = 0; i + 1 < p.n_grid; ++i) {
      const std::complex<double> mid(-p.radius + (i + 0.5) * h, -p.radius + (j + 0.5) * h);
      if (std::abs(mid) > p.radius) continue;
      const std::size_t a = p.index(i, j), b = p.index(i + 1, j);
      const std::size_t c = p.index(i, j + 1), d = p.index(i + 1, j + 1);
      if (!p.sampled[a] || !p.sampled[b] || !p.sampled[c] || !p.sampled[d]) {
        throw DomainError("patch cell inside D_R has unsampled corners");
      }
      total += tri(a, b, d, true) + tri(a, c, d, false);
    }
  }
  return total;
}

}  // namespace warp_harmonic
