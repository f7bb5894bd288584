#include "warp_harmonic/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <Eigen/Geometry>

#include "warp_harmonic/error.hpp"

namespace warp_harmonic {

namespace {

// Solid angle of the spherical triangle (a, b, c), signed by orientation.
double signed_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

}  // namespace

std::size_t TriMesh::edge_count() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(faces.size() * 3);
  for (const Face& f : faces) {
    for (int i = 0; i < 3; ++i) keys.push_back(edge_key(f[i], f[(i + 1) % 3]));
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

double TriMesh::max_edge_length() const {
  double h = 0.0;
  for (const Face& f : faces) {
    for (int i = 0; i < 3; ++i) h = std::max(h, (vertices[f[i]] - vertices[f[(i + 1) % 3]]).norm());
  }
  return h;
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (double a : face_area) s += a;
  return s;
}

Vec3 TriMesh::barycenter(int face) const {
  const Face& f = faces[face];
  return (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]).normalized();
}

MeshPtr make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces, int level) {
  auto mesh = std::make_shared<TriMesh>();
  mesh->vertices = std::move(vertices);
  mesh->faces = std::move(faces);
  mesh->subdivision_level = level;

  const std::size_t nf = mesh->faces.size();
  const std::size_t nv = mesh->vertices.size();
  mesh->face_area.resize(nf);
  mesh->spherical_area.resize(nf);
  mesh->grad_basis.resize(nf);
  mesh->vertex_dual_area.assign(nv, 0.0);

  std::vector<int> counts(nv + 1, 0);
  for (std::size_t fi = 0; fi < nf; ++fi) {
    Face& face = mesh->faces[fi];
    for (int idx : face) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= nv) {
        throw DomainError("face " + std::to_string(fi) + " references missing vertex " +
                          std::to_string(idx));
      }
    }
    const Vec3& p0 = mesh->vertices[face[0]];
    const Vec3& p1 = mesh->vertices[face[1]];
    const Vec3& p2 = mesh->vertices[face[2]];
    Vec3 n = (p1 - p0).cross(p2 - p0);
    // outward orientation
    if (n.dot(p0 + p1 + p2) < 0.0) {
      std::swap(face[1], face[2]);
      n = -n;
    }
    const double twice_area = n.norm();
    if (!(twice_area > 1e-300)) {
      throw DomainError("degenerate (zero-area) face " + std::to_string(fi));
    }
    mesh->face_area[fi] = 0.5 * twice_area;
    const Vec3 unit_n = n / twice_area;
    const std::array<Vec3, 3> p = {mesh->vertices[face[0]], mesh->vertices[face[1]],
                                   mesh->vertices[face[2]]};
    for (int i = 0; i < 3; ++i) {
      // grad of hat i = n x (edge opposite i, oriented j -> k) / (2A)
      const Vec3 e = p[(i + 2) % 3] - p[(i + 1) % 3];
      mesh->grad_basis[fi][i] = unit_n.cross(e) / twice_area;
    }
    mesh->spherical_area[fi] = std::abs(signed_solid_angle(p[0], p[1], p[2]));
    for (int idx : face) {
      mesh->vertex_dual_area[idx] += mesh->face_area[fi] / 3.0;
      counts[idx + 1] += 1;
    }
  }
  for (std::size_t v = 0; v < nv; ++v) counts[v + 1] += counts[v];
  mesh->vertex_face_offsets = counts;
  mesh->vertex_faces.resize(nf * 3);
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (std::size_t fi = 0; fi < nf; ++fi) {
    for (int idx : mesh->faces[fi]) mesh->vertex_faces[fill[idx]++] = static_cast<int>(fi);
  }
  return mesh;
}

MeshPtr build_icosphere(int level) {
  if (level < 0 || level > 8) {
    throw ConfigError("subdivision level must lie in [0, 8], got " + std::to_string(level));
  }
  std::vector<Vec3> verts;
  verts.emplace_back(0.0, 0.0, 1.0);
  const double ring_z = 1.0 / std::sqrt(5.0);
  const double ring_r = 2.0 / std::sqrt(5.0);
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0;
    verts.emplace_back(ring_r * std::cos(a), ring_r * std::sin(a), ring_z);
  }
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * (k + 0.5) / 5.0;
    verts.emplace_back(ring_r * std::cos(a), ring_r * std::sin(a), -ring_z);
  }
  verts.emplace_back(0.0, 0.0, -1.0);

  std::vector<Face> faces;
  for (int k = 0; k < 5; ++k) {
    const int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const int l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    faces.push_back({0, u0, u1});
    faces.push_back({u0, l0, u1});
    faces.push_back({u1, l0, l1});
    faces.push_back({11, l1, l0});
  }

  for (int it = 0; it < level; ++it) {
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(faces.size() * 2);
    auto mid = [&](int a, int b) {
      const auto key = edge_key(a, b);
      auto found = midpoint.find(key);
      if (found != midpoint.end()) return found->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int a = mid(f[0], f[1]);
      const int b = mid(f[1], f[2]);
      const int c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces.swap(next);
  }
  return make_mesh(std::move(verts), std::move(faces), level);
}

Vec3 face_gradient(const TriMesh& mesh, std::span<const double> field, int face) {
  if (field.size() != mesh.vertex_count()) {
    throw ConfigError("field length does not match the vertex count");
  }
  if (!(mesh.face_area[face] > 0.0)) {
    throw DomainError("degenerate face " + std::to_string(face));
  }
  const Face& f = mesh.faces[face];
  const auto& g = mesh.grad_basis[face];
  // differences against corner 0 (sum of the basis gradients is zero): exact 0 on constants
  return (field[f[1]] - field[f[0]]) * g[1] + (field[f[2]] - field[f[0]]) * g[2];
}

Mat3 face_gradient(const TriMesh& mesh, std::span<const Vec3> field, int face) {
  if (field.size() != mesh.vertex_count()) {
    throw ConfigError("field length does not match the vertex count");
  }
  if (!(mesh.face_area[face] > 0.0)) {
    throw DomainError("degenerate face " + std::to_string(face));
  }
  const Face& f = mesh.faces[face];
  const auto& g = mesh.grad_basis[face];
  return (field[f[1]] - field[f[0]]) * g[1].transpose() +
         (field[f[2]] - field[f[0]]) * g[2].transpose();
}

double geodesic_distance(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate for nearly equal and nearly antipodal points
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double geodesic_ball_energy(const TriMesh& mesh, std::span<const double> density,
                            const Vec3& center, double radius) {
  if (density.size() != mesh.face_count()) {
    throw ConfigError("density length does not match the face count");
  }
  if (!(radius > 0.0) || radius > std::numbers::pi) {
    throw ConfigError("ball radius must lie in (0, pi]");
  }
  const Vec3 c = center.normalized();
  double sum = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (geodesic_distance(mesh.barycenter(static_cast<int>(f)), c) <= radius) {
      sum += density[f] * mesh.face_area[f];
    }
  }
  return sum;
}

Vec3 inverse_stereographic(std::complex<double> z) {
  const double n2 = std::norm(z);
  if (!std::isfinite(n2)) return Vec3(0.0, 0.0, -1.0);
  return Vec3(2.0 * z.real(), 2.0 * z.imag(), 1.0 - n2) / (1.0 + n2);
}

Vec3 inverse_stereographic_of_reciprocal(std::complex<double> q) {
  const double n2 = std::norm(q);
  return Vec3(2.0 * q.real(), -2.0 * q.imag(), n2 - 1.0) / (1.0 + n2);
}

StereoChart::StereoChart(const Vec3& center) : center_(center.normalized()) {
  const Vec3 north(0.0, 0.0, 1.0);
  const double c = center_.dot(north);
  if (c > 1.0 - 1e-15) {
    to_north_.setIdentity();
  } else if (c < -1.0 + 1e-15) {
    to_north_ = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
  } else {
    const Vec3 axis = center_.cross(north).normalized();
    to_north_ = Eigen::AngleAxisd(std::acos(c), axis).toRotationMatrix();
  }
}

std::complex<double> StereoChart::to_chart(const Vec3& p) const {
  const Vec3 q = to_north_ * p;
  const double den = 1.0 + q.z();
  if (den <= 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  return {q.x() / den, q.y() / den};
}

Vec3 StereoChart::from_chart(std::complex<double> z) const {
  return to_north_.transpose() * inverse_stereographic(z);
}

FaceLocator::FaceLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const double h = mesh_->max_edge_length();
  cells_ = std::clamp(static_cast<int>(std::ceil(2.0 / (2.0 * h))), 1, 160);
  cell_size_ = 2.0 / cells_;
  const std::size_t nf = mesh_->face_count();
  barycenters_.resize(nf);

  std::vector<std::vector<int>> lists;
  std::vector<int> counts(static_cast<std::size_t>(cells_) * cells_ * cells_ + 1, 0);
  std::vector<std::pair<int, int>> pairs;  // (cell, face)
  pairs.reserve(nf * 8);
  for (std::size_t fi = 0; fi < nf; ++fi) {
    const Face& f = mesh_->faces[fi];
    barycenters_[fi] = mesh_->barycenter(static_cast<int>(fi));
    Vec3 lo = mesh_->vertices[f[0]], hi = lo;
    for (int i = 1; i < 3; ++i) {
      lo = lo.cwiseMin(mesh_->vertices[f[i]]);
      hi = hi.cwiseMax(mesh_->vertices[f[i]]);
    }
    // covers the ray hits of points on the sphere and the normalized barycenter
    lo.array() -= h;
    hi.array() += h;
    for (int cell : candidate_cells(lo, hi)) pairs.emplace_back(cell, static_cast<int>(fi));
  }
  for (const auto& [cell, face] : pairs) counts[cell + 1] += 1;
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  offsets_ = counts;
  entries_.resize(pairs.size());
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (const auto& [cell, face] : pairs) entries_[fill[cell]++] = face;
}

int FaceLocator::coord(double x) const {
  return std::clamp(static_cast<int>(std::floor((x + 1.0) / cell_size_)), 0, cells_ - 1);
}

std::vector<int> FaceLocator::candidate_cells(const Vec3& lo, const Vec3& hi) const {
  std::vector<int> out;
  const int x0 = coord(lo.x()), x1 = coord(hi.x());
  const int y0 = coord(lo.y()), y1 = coord(hi.y());
  const int z0 = coord(lo.z()), z1 = coord(hi.z());
  out.reserve(static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1) * (z1 - z0 + 1)));
  for (int iz = z0; iz <= z1; ++iz)
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) out.push_back(cell_index(ix, iy, iz));
  return out;
}

std::optional<FaceLocator::Hit> FaceLocator::locate(const Vec3& p) const {
  const int cell = cell_index(coord(p.x()), coord(p.y()), coord(p.z()));
  std::optional<Hit> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
    const int fi = entries_[k];
    const Face& f = mesh_->faces[fi];
    const Vec3& a = mesh_->vertices[f[0]];
    const Vec3& b = mesh_->vertices[f[1]];
    const Vec3& c = mesh_->vertices[f[2]];
    // p = s (l0 a + l1 b + l2 c) with l summing to 1: solve the 3x3 cone system
    Mat3 m;
    m.col(0) = a;
    m.col(1) = b;
    m.col(2) = c;
    const Vec3 w = m.partialPivLu().solve(p);
    const double s = w.sum();
    if (!(s > 0.0)) continue;
    const Vec3 l = w / s;
    const double lmin = l.minCoeff();
    if (lmin > best_min) {
      best_min = lmin;
      best = Hit{fi, {l[0], l[1], l[2]}};
    }
    if (lmin >= 0.0) break;
  }
  if (!best || best_min < -1e-9) return std::nullopt;
  return best;
}

void write_mesh_csv(std::ostream& out, const TriMesh& mesh, std::span<const Vec3> v,
                    std::span<const double> f) {
  const bool with_map = !v.empty();
  if (with_map && (v.size() != mesh.vertex_count() || f.size() != mesh.vertex_count())) {
    throw ConfigError("map fields do not match the mesh vertex count");
  }
  out.precision(17);
  out << "# warp-harmonic mesh, level " << mesh.subdivision_level << "\n";
  out << "vertices " << mesh.vertex_count() << (with_map ? " x,y,z,vx,vy,vz,f" : " x,y,z")
      << "\n";
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& p = mesh.vertices[i];
    out << p.x() << ',' << p.y() << ',' << p.z();
    if (with_map) out << ',' << v[i].x() << ',' << v[i].y() << ',' << v[i].z() << ',' << f[i];
    out << '\n';
  }
  out << "faces " << mesh.face_count() << "\n";
  for (const Face& face : mesh.faces) out << face[0] << ',' << face[1] << ',' << face[2] << '\n';
}

MeshCsv read_mesh_csv(std::istream& in) {
  MeshCsv out;
  std::string line;
  enum class Section { None, Vertices, Faces } section = Section::None;
  auto split = [](const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    return vals;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("vertices", 0) == 0) {
      section = Section::Vertices;
      continue;
    }
    if (line.rfind("faces", 0) == 0) {
      section = Section::Faces;
      continue;
    }
    const auto vals = split(line);
    if (section == Section::Vertices) {
      if (vals.size() != 3 && vals.size() != 7) {
        throw ConfigError("vertex line must have 3 or 7 fields: '" + line + "'");
      }
      out.vertices.emplace_back(vals[0], vals[1], vals[2]);
      if (vals.size() == 7) {
        out.v.emplace_back(vals[3], vals[4], vals[5]);
        out.f.push_back(vals[6]);
      }
    } else if (section == Section::Faces) {
      if (vals.size() != 3) throw ConfigError("face line must have 3 indices: '" + line + "'");
      out.faces.push_back({static_cast<int>(vals[0]), static_cast<int>(vals[1]),
                           static_cast<int>(vals[2])});
    } else {
      throw ConfigError("mesh file: data before a section header");
    }
  }
  if (!out.v.empty() && out.v.size() != out.vertices.size()) {
    throw ConfigError("mesh file mixes vertex lines with and without map values");
  }
  return out;
}

}  // namespace warp_harmonic
