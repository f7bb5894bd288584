#include "warp_harmonic/energy.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "warp_harmonic/error.hpp"
#include "warp_harmonic/parallel.hpp"

namespace warp_harmonic {

namespace {

struct FaceEval {
  Mat3 grad_v;  // row c = gradient of component c
  Vec3 grad_f;
  double gv2;
  double gf2;
  double f_mean;
};

inline FaceEval eval_face(const TriMesh& mesh, const DiscreteMap& map, std::size_t fi) {
  const Face& face = mesh.faces[fi];
  const auto& g = mesh.grad_basis[fi];
  FaceEval e;
  // differences against corner 0 keep constant fields at an exact zero gradient
  e.grad_v = (map.v[face[1]] - map.v[face[0]]) * g[1].transpose() +
             (map.v[face[2]] - map.v[face[0]]) * g[2].transpose();
  e.grad_f = (map.f[face[1]] - map.f[face[0]]) * g[1] + (map.f[face[2]] - map.f[face[0]]) * g[2];
  e.gv2 = e.grad_v.squaredNorm();
  e.gf2 = e.grad_f.squaredNorm();
  e.f_mean = (map.f[face[0]] + map.f[face[1]] + map.f[face[2]]) / 3.0;
  return e;
}

// (1 + x)^alpha - 1, accurate near x = 0
inline double alpha_integrand(double x, double alpha) {
  if (alpha == 1.0) return x;
  return std::expm1(alpha * std::log1p(x));
}

void check_inputs(const DiscreteMap& map, const WarpFunction& warp) {
  if (!map.mesh) throw ConfigError("map has no mesh");
  const std::size_t n = map.mesh->vertex_count();
  if (map.v.size() != n || map.f.size() != n) {
    throw ConfigError("map fields do not match the mesh vertex count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!warp.in_domain(map.f[i])) {
      throw DomainError("f at vertex " + std::to_string(i) + " = " + std::to_string(map.f[i]) +
                        " lies outside the warp domain (" + std::to_string(warp.t_min()) + ", " +
                        std::to_string(warp.t_max()) + ")");
    }
  }
}

void check_alpha(double alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) {
    throw ConfigError("alpha must lie in [1, 2], got " + std::to_string(alpha));
  }
}

EnergyBreakdown breakdown(const DiscreteMap& map, const WarpFunction& warp, double alpha) {
  check_inputs(map, warp);
  check_alpha(alpha);
  const TriMesh& mesh = *map.mesh;
  const std::size_t nf = mesh.face_count();
  EnergyBreakdown out;
  out.alpha = alpha;
  out.per_face.resize(nf);
  std::vector<double> v_terms(nf), f_terms(nf), a_terms(nf);
  parallel_blocks(nf, [&](std::size_t begin, std::size_t end) {
    for (std::size_t fi = begin; fi < end; ++fi) {
      const FaceEval e = eval_face(mesh, map, fi);
      const double psi = warp.value(e.f_mean);
      const double area = mesh.face_area[fi];
      out.per_face[fi] = {e.gv2, e.gf2, psi};
      v_terms[fi] = 0.5 * e.gv2 * psi * area;
      f_terms[fi] = 0.5 * e.gf2 * psi * area;
      a_terms[fi] = 0.5 * alpha_integrand((e.gv2 + e.gf2) * psi, alpha) * area;
    }
  });
  out.v_part = pairwise_sum(v_terms);
  out.f_part = pairwise_sum(f_terms);
  out.total_E = out.v_part + out.f_part;
  out.total_E_alpha = (alpha == 1.0) ? out.total_E : pairwise_sum(a_terms);
  return out;
}

}  // namespace

nlohmann::json EnergyBreakdown::to_json() const {
  return {{"total_E", total_E},
          {"total_E_alpha", total_E_alpha},
          {"alpha", alpha},
          {"v_part", v_part},
          {"f_part", f_part},
          {"faces", per_face.size()}};
}

void EnergyBreakdown::write_face_csv(std::ostream& out) const {
  out.precision(17);
  out << "face,grad_v_sq,grad_f_sq,psi\n";
  for (std::size_t i = 0; i < per_face.size(); ++i) {
    out << i << ',' << per_face[i].grad_v_sq << ',' << per_face[i].grad_f_sq << ','
        << per_face[i].psi << '\n';
  }
}

EnergyBreakdown energy(const DiscreteMap& map, const WarpFunction& warp) {
  return breakdown(map, warp, 1.0);
}

EnergyBreakdown alpha_energy(const DiscreteMap& map, const WarpFunction& warp, double alpha) {
  return breakdown(map, warp, alpha);
}

double alpha_energy_value(const DiscreteMap& map, const WarpFunction& warp, double alpha) {
  check_inputs(map, warp);
  check_alpha(alpha);
  const TriMesh& mesh = *map.mesh;
  return parallel_sum(mesh.face_count(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> terms;
    terms.reserve(end - begin);
    for (std::size_t fi = begin; fi < end; ++fi) {
      const FaceEval e = eval_face(mesh, map, fi);
      const double x = (e.gv2 + e.gf2) * warp.value(e.f_mean);
      terms.push_back(0.5 * alpha_integrand(x, alpha) * mesh.face_area[fi]);
    }
    return pairwise_sum(terms);
  });
}

EnergyGradient energy_gradient(const DiscreteMap& map, const WarpFunction& warp, double alpha,
                               bool project) {
  check_inputs(map, warp);
  check_alpha(alpha);
  const TriMesh& mesh = *map.mesh;
  const std::size_t nf = mesh.face_count();
  const std::size_t nv = mesh.vertex_count();

  std::vector<std::array<Vec3, 3>> cv(nf);
  std::vector<std::array<double, 3>> cf(nf);
  std::vector<double> terms(nf);
  parallel_blocks(nf, [&](std::size_t begin, std::size_t end) {
    for (std::size_t fi = begin; fi < end; ++fi) {
      const FaceEval e = eval_face(mesh, map, fi);
      const double psi = warp.value(e.f_mean);
      const double dpsi = warp.derivative(e.f_mean);
      const double area = mesh.face_area[fi];
      const double g2 = e.gv2 + e.gf2;
      const double x = g2 * psi;
      terms[fi] = 0.5 * alpha_integrand(x, alpha) * area;
      // dE_face/dx
      const double c =
          (alpha == 1.0) ? 0.5 * area : 0.5 * area * alpha * std::exp((alpha - 1.0) * std::log1p(x));
      const auto& g = mesh.grad_basis[fi];
      for (int k = 0; k < 3; ++k) {
        cv[fi][k] = c * 2.0 * psi * (e.grad_v * g[k]);
        cf[fi][k] = c * (2.0 * psi * e.grad_f.dot(g[k]) + g2 * dpsi / 3.0);
      }
    }
  });

  EnergyGradient out;
  out.value = pairwise_sum(terms);
  out.v.assign(nv, Vec3::Zero());
  out.f.assign(nv, 0.0);
  parallel_blocks(nv, [&](std::size_t begin, std::size_t end) {
    for (std::size_t vi = begin; vi < end; ++vi) {
      Vec3 gv = Vec3::Zero();
      double gf = 0.0;
      for (int fi : mesh.faces_of_vertex(static_cast<int>(vi))) {
        const Face& face = mesh.faces[fi];
        const int k = face[0] == static_cast<int>(vi) ? 0 : (face[1] == static_cast<int>(vi) ? 1 : 2);
        gv += cv[fi][k];
        gf += cf[fi][k];
      }
      if (project) gv -= gv.dot(map.v[vi]) * map.v[vi] / map.v[vi].squaredNorm();
      out.v[vi] = gv;
      out.f[vi] = gf;
    }
  });
  return out;
}

double dual_norm(const TriMesh& mesh, const std::vector<Vec3>& rv, const std::vector<double>& rf) {
  return std::sqrt(parallel_sum(mesh.vertex_count(), [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      double r2 = 0.0;
      if (!rv.empty()) r2 += rv[i].squaredNorm();
      if (!rf.empty()) r2 += rf[i] * rf[i];
      s += r2 / mesh.vertex_dual_area[i];
    }
    return s;
  }));
}

Residual el_residual(const DiscreteMap& map, const WarpFunction& warp) {
  EnergyGradient g = energy_gradient(map, warp, 1.0, true);
  Residual r;
  r.v = std::move(g.v);
  r.f = std::move(g.f);
  r.norm_v = dual_norm(*map.mesh, r.v, {});
  r.norm_f = dual_norm(*map.mesh, {}, r.f);
  return r;
}

std::vector<double> face_energy_density(const DiscreteMap& map, const WarpFunction& warp) {
  check_inputs(map, warp);
  const TriMesh& mesh = *map.mesh;
  std::vector<double> out(mesh.face_count());
  parallel_blocks(mesh.face_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t fi = begin; fi < end; ++fi) {
      const FaceEval e = eval_face(mesh, map, fi);
      out[fi] = (e.gv2 + e.gf2) * warp.value(e.f_mean);
    }
  });
  return out;
}

std::vector<double> face_stretch(const DiscreteMap& map) {
  const TriMesh& mesh = *map.mesh;
  std::vector<double> out(mesh.face_count());
  parallel_blocks(mesh.face_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t fi = begin; fi < end; ++fi) {
      const FaceEval e = eval_face(mesh, map, fi);
      out[fi] = std::sqrt(0.5 * (e.gv2 + e.gf2));
    }
  });
  return out;
}

FPairing f_residual_pairing(const DiscreteMap& map, const WarpFunction& warp) {
  const Residual r = el_residual(map, warp);
  const TriMesh& mesh = *map.mesh;
  std::vector<double> pair_terms(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) pair_terms[i] = r.f[i] * map.f[i];
  std::vector<double> int_terms(mesh.face_count());
  for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
    const FaceEval e = eval_face(mesh, map, fi);
    const double area = mesh.face_area[fi];
    int_terms[fi] = (e.gf2 * warp.value(e.f_mean) +
                     0.5 * (e.gv2 + e.gf2) * warp.derivative(e.f_mean) * e.f_mean) *
                    area;
  }
  return {pairwise_sum(pair_terms), pairwise_sum(int_terms)};
}

}  // namespace warp_harmonic
