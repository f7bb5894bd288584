#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace warp_harmonic {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<int, 3>;

/// Triangulated unit sphere with flat-triangle P1 quadrature data.
///
/// face_area holds the flat triangle areas used by every quadrature in the library;
/// spherical_area holds the exact spherical excess of each face for reference.
/// grad_basis[f][i] is the constant gradient of the hat function of corner i on face f.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<double> face_area;
  std::vector<double> spherical_area;
  std::vector<double> vertex_dual_area;
  std::vector<std::array<Vec3, 3>> grad_basis;
  int subdivision_level = 0;

  // vertex -> incident faces, CSR layout
  std::vector<int> vertex_face_offsets;
  std::vector<int> vertex_faces;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  std::size_t edge_count() const;
  double max_edge_length() const;
  double total_area() const;
  Vec3 barycenter(int face) const;  // normalized to the unit sphere
  std::span<const int> faces_of_vertex(int v) const {
    return {vertex_faces.data() + vertex_face_offsets[v],
            static_cast<std::size_t>(vertex_face_offsets[v + 1] - vertex_face_offsets[v])};
  }
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Icosahedron with vertices at both poles, subdivided `level` times (midpoint split,
/// projected to the sphere). Throws ConfigError for level > 8.
MeshPtr build_icosphere(int level);

/// Builds the derived quadrature data for an arbitrary closed triangulation of S^2.
/// Throws DomainError on zero-area faces.
MeshPtr make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces, int level = -1);

/// Tangential gradient of a per-vertex scalar field on one face.
Vec3 face_gradient(const TriMesh& mesh, std::span<const double> field, int face);
/// Gradient of a per-vertex vector field on one face; row c is the gradient of component c.
Mat3 face_gradient(const TriMesh& mesh, std::span<const Vec3> field, int face);

/// Sum of density * area over faces whose barycenter lies within geodesic distance
/// `radius` of `center`. radius in (0, pi].
double geodesic_ball_energy(const TriMesh& mesh, std::span<const double> density,
                            const Vec3& center, double radius);

double geodesic_distance(const Vec3& a, const Vec3& b);

/// Stereographic chart centered at a point c of S^2: rotate c to the north pole, then
/// z = (x + i y) / (1 + z3). The antipode of c maps to infinity.
class StereoChart {
 public:
  explicit StereoChart(const Vec3& center = Vec3(0, 0, 1));
  std::complex<double> to_chart(const Vec3& p) const;
  Vec3 from_chart(std::complex<double> z) const;
  const Vec3& center() const { return center_; }
  /// Conformal factor rho with g_S2 = rho^2 |dz|^2 at chart point z.
  static double conformal_factor(std::complex<double> z) { return 2.0 / (1.0 + std::norm(z)); }

 private:
  Vec3 center_;
  Mat3 to_north_;  // rotation taking center_ to (0, 0, 1)
};

/// Inverse standard stereographic projection (north pole <-> 0).
Vec3 inverse_stereographic(std::complex<double> z);
/// S^{-1}(1/q), well defined at q = 0 (the south pole).
Vec3 inverse_stereographic_of_reciprocal(std::complex<double> q);

/// Uniform-grid spatial index over face bounding boxes.
class FaceLocator {
 public:
  explicit FaceLocator(MeshPtr mesh);

  struct Hit {
    int face;
    std::array<double, 3> bary;
  };
  /// Face hit by the ray from the origin through p, with barycentric coordinates.
  std::optional<Hit> locate(const Vec3& p) const;

  /// Calls fn(face) for every face whose barycenter lies within geodesic radius of c.
  template <typename Fn>
  void for_each_face_in_ball(const Vec3& c, double radius, Fn&& fn) const;

  const TriMesh& mesh() const { return *mesh_; }

 private:
  int cell_index(int ix, int iy, int iz) const { return (iz * cells_ + iy) * cells_ + ix; }
  int coord(double x) const;
  std::vector<int> candidate_cells(const Vec3& lo, const Vec3& hi) const;

  MeshPtr mesh_;
  int cells_ = 1;
  double cell_size_ = 2.0;
  std::vector<int> offsets_;
  std::vector<int> entries_;
  std::vector<Vec3> barycenters_;
};

template <typename Fn>
void FaceLocator::for_each_face_in_ball(const Vec3& c, double radius, Fn&& fn) const {
  if (radius >= 3.14159) {
    for (int f = 0; f < static_cast<int>(mesh_->face_count()); ++f) fn(f);
    return;
  }
  const double cos_r = std::cos(radius);
  const double chord = 2.0 * std::sin(0.5 * radius);
  const Vec3 lo = c.array() - chord;
  const Vec3 hi = c.array() + chord;
  // Faces are registered in every cell their box touches; report each once.
  for (int cell : candidate_cells(lo, hi)) {
    for (int k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
      const int f = entries_[k];
      const Vec3& b = barycenters_[f];
      if (b.dot(c) < cos_r) continue;
      // owner cell of the barycenter dedups multi-cell registration
      const int owner = cell_index(coord(b.x()), coord(b.y()), coord(b.z()));
      if (owner != cell) continue;
      fn(f);
    }
  }
}

/// Writes vertices (x,y,z[,vx,vy,vz,f]) then faces (i,j,k) in a flat text format.
void write_mesh_csv(std::ostream& out, const TriMesh& mesh, std::span<const Vec3> v = {},
                    std::span<const double> f = {});

struct MeshCsv {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec3> v;
  std::vector<double> f;
};
MeshCsv read_mesh_csv(std::istream& in);

}  // namespace warp_harmonic
