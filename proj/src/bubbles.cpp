#include "warp_harmonic/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>

#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/mesh.hpp"

namespace warp_harmonic {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

// 1/2 sum of density * area over faces whose barycenter lies in the geodesic ball
double ball_energy(const FaceLocator& loc, const std::vector<double>& dens, const Vec3& c,
                   double radius) {
  const TriMesh& mesh = loc.mesh();
  double s = 0.0;
  loc.for_each_face_in_ball(c, radius, [&](int f) { s += dens[f] * mesh.face_area[f]; });
  return 0.5 * s;
}

// density-weighted centroid of the faces within radius of c, projected to the sphere
Vec3 weighted_centroid(const FaceLocator& loc, const std::vector<double>& dens, const Vec3& c,
                       double radius) {
  const TriMesh& mesh = loc.mesh();
  Vec3 acc = Vec3::Zero();
  loc.for_each_face_in_ball(c, radius, [&](int f) {
    acc += dens[f] * mesh.face_area[f] * mesh.barycenter(f);
  });
  return acc.squaredNorm() > 0.0 ? Vec3(acc.normalized()) : c;
}

struct Sample {
  Vec3 v;
  double f;
};

Sample sample_at(const DiscreteMap& map, const FaceLocator& loc, const Vec3& p) {
  const auto hit = loc.locate(p);
  if (!hit) throw DomainError("sample point could not be located on the mesh");
  const Face& face = map.mesh->faces[hit->face];
  Vec3 v = Vec3::Zero();
  double f = 0.0;
  for (int c = 0; c < 3; ++c) {
    v += hit->bary[c] * map.v[face[c]];
    f += hit->bary[c] * map.f[face[c]];
  }
  return {v.normalized(), f};
}

CircleOscillation circle_osc(const DiscreteMap& map, const FaceLocator& loc,
                             const StereoChart& chart, double t, int n) {
  std::vector<Sample> s(n);
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    s[k] = sample_at(map, loc, chart.from_chart(std::polar(t, th)));
  }
  CircleOscillation r;
  double fmin = s[0].f, fmax = s[0].f;
  Vec3 vsum = Vec3::Zero();
  double fsum = 0.0;
  for (int a = 0; a < n; ++a) {
    fmin = std::min(fmin, s[a].f);
    fmax = std::max(fmax, s[a].f);
    vsum += s[a].v;
    fsum += s[a].f;
    for (int b = a + 1; b < n; ++b) r.osc_v = std::max(r.osc_v, geodesic_distance(s[a].v, s[b].v));
  }
  r.osc_f = fmax - fmin;
  r.mean_v = vsum.squaredNorm() > 0.0 ? Vec3(vsum.normalized()) : Vec3(s[0].v);
  r.mean_f = fsum / n;
  return r;
}

double simpson(const std::function<double(double)>& g, double a, double b, int n = 2000) {
  if (a == b) return 0.0;
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

}  // namespace

double min_quantum(const WarpFunction& warp) {
  const int n = 4000;
  const double a = warp.t_min(), b = warp.t_max();
  double m = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) m = std::min(m, warp.value(a + (b - a) * i / n));
  if (warp.in_domain(0.0)) m = std::min(m, warp.value(0.0));
  return 4.0 * kPi * m;
}

double neck_quantum(const WarpFunction& warp) {
  if (!warp.in_domain(0.0)) throw ConfigError("t = 0 lies outside the warp domain");
  return 4.0 * kPi * warp.value(0.0);
}

void EpsilonPolicy::validate(const WarpFunction& warp) const {
  if (!(eps0 > 0.0)) throw ConfigError("eps0 must be positive");
  const double guard = min_quantum(warp);
  if (!(eps0 < guard)) {
    throw ConfigError("eps0 = " + std::to_string(eps0) +
                      " must lie below the smallest bubble quantum 4 pi psi_min = " +
                      std::to_string(guard));
  }
  if (!(min_radius > 0.0 && min_radius < max_radius && max_radius < kPi)) {
    throw ConfigError("policy radii must satisfy 0 < min_radius < max_radius < pi");
  }
  if (profile_samples < 2) throw ConfigError("profile_samples must be at least 2");
}

nlohmann::json EpsilonPolicy::to_json() const {
  return {{"eps0", eps0},
          {"min_radius", min_radius},
          {"max_radius", max_radius},
          {"profile_samples", profile_samples}};
}

nlohmann::json ConcentrationPoint::to_json() const {
  nlohmann::json prof = nlohmann::json::array();
  for (const auto& [r, e] : ball_energy_profile) prof.push_back({r, e});
  return {{"location", vec_json(location)},
          {"ball_energy", ball_energy},
          {"peak_gradient", peak_gradient},
          {"blowup_scale", blowup_scale},
          {"ball_energy_profile", prof}};
}

std::vector<ConcentrationPoint> detect_concentration(const DiscreteMap& map,
                                                     const WarpFunction& warp,
                                                     const EpsilonPolicy& policy) {
  policy.validate(warp);
  const TriMesh& mesh = *map.mesh;
  const std::vector<double> dens = face_energy_density(map, warp);
  const std::vector<double> stretch = face_stretch(map);
  const FaceLocator loc(map.mesh);
  const int nf = static_cast<int>(mesh.face_count());

  // strict local maxima over vertex-adjacent faces, ties broken by index
  std::vector<int> cand;
  for (int f = 0; f < nf; ++f) {
    if (!(stretch[f] > 0.0)) continue;
    bool is_max = true;
    for (int c = 0; c < 3 && is_max; ++c) {
      for (int g : mesh.faces_of_vertex(mesh.faces[f][c])) {
        if (stretch[g] > stretch[f] || (stretch[g] == stretch[f] && g < f)) {
          is_max = false;
          break;
        }
      }
    }
    if (is_max) cand.push_back(f);
  }
  std::sort(cand.begin(), cand.end(), [&](int a, int b) {
    return stretch[a] != stretch[b] ? stretch[a] > stretch[b] : a < b;
  });

  std::vector<ConcentrationPoint> out;
  const double threshold = 0.5 * policy.eps0;
  for (int f : cand) {
    const Vec3 b = mesh.barycenter(f);
    bool merged = false;
    for (const auto& cp : out) {
      if (geodesic_distance(cp.location, b) < 2.0 * policy.min_radius) {
        merged = true;
        break;
      }
    }
    if (merged) continue;
    if (ball_energy(loc, dens, b, policy.min_radius) < threshold) continue;

    ConcentrationPoint cp;
    cp.peak_face = f;
    cp.peak_gradient = stretch[f];
    cp.blowup_scale = 1.0 / stretch[f];
    // refine the location on the bubble's own scale (chart radius ~ scale, geodesic ~ 2 scale)
    const double r_c = std::min(policy.min_radius, 4.0 * cp.blowup_scale);
    Vec3 loc_c = b;
    for (int it = 0; it < 3; ++it) loc_c = weighted_centroid(loc, dens, loc_c, r_c);
    cp.location = loc_c;
    cp.ball_energy = ball_energy(loc, dens, cp.location, policy.min_radius);
    const int n = policy.profile_samples;
    const double ratio = policy.max_radius / policy.min_radius;
    for (int i = 0; i < n; ++i) {
      const double r = policy.min_radius * std::pow(ratio, static_cast<double>(i) / (n - 1));
      cp.ball_energy_profile.emplace_back(r, ball_energy(loc, dens, cp.location, r));
    }
    out.push_back(std::move(cp));
  }
  return out;
}

ExtractedBubble extract_bubble(const DiscreteMap& map, const WarpFunction& warp,
                               const ConcentrationPoint& cp, double R, int n_grid) {
  const FaceLocator loc(map.mesh);
  return extract_bubble(map, loc, warp, cp, R, n_grid);
}

ExtractedBubble extract_bubble(const DiscreteMap& map, const FaceLocator& locator,
                               const WarpFunction& warp, const ConcentrationPoint& cp, double R,
                               int n_grid) {
  if (!(cp.blowup_scale > 0.0)) throw ConfigError("concentration point has no blow-up scale");
  if (!(cp.blowup_scale * R < 1.0)) {
    throw DomainError("chart guard violated: blowup_scale*R = " +
                      std::to_string(cp.blowup_scale * R) + "; use R < " +
                      std::to_string(1.0 / cp.blowup_scale));
  }
  ExtractedBubble out;
  out.patch = resample_stereographic(map, locator, cp.location, cp.blowup_scale, R, n_grid);
  out.energy = patch_energy(out.patch, warp);
  return out;
}

CircleOscillation neck_oscillation(const DiscreteMap& map, const ConcentrationPoint& cp, double t,
                                   int n) {
  const FaceLocator loc(map.mesh);
  return neck_oscillation(map, loc, cp.location, t, n);
}

CircleOscillation neck_oscillation(const DiscreteMap& map, const FaceLocator& locator,
                                   const Vec3& center, double t, int n) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("circle radius t must lie in (0, 1) chart units");
  if (n < 64) throw ConfigError("circle sampling needs at least 64 points");
  const StereoChart chart(center);
  CircleOscillation r = circle_osc(map, locator, chart, t, n);
  const CircleOscillation fine = circle_osc(map, locator, chart, t, 2 * n);
  auto moved = [](double a, double b) {
    const double d = std::abs(a - b);
    return d > 0.05 * std::max(a, b) && d > 1e-3;
  };
  r.under_resolved = moved(r.osc_v, fine.osc_v) || moved(r.osc_f, fine.osc_f);
  return r;
}

double chart_annulus_energy(const DiscreteMap& map, const WarpFunction& warp, const Vec3& center,
                            double r_in, double r_out) {
  const TriMesh& mesh = *map.mesh;
  const std::vector<double> dens = face_energy_density(map, warp);
  const StereoChart chart(center);
  double s = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const double rz = std::abs(chart.to_chart(mesh.barycenter(static_cast<int>(f))));
    if (rz > r_in && rz < r_out) s += dens[f] * mesh.face_area[f];
  }
  return 0.5 * s;
}

nlohmann::json NeckProfile::to_json() const {
  return {{"t_in", t_in},
          {"t_out", t_out},
          {"energy", energy},
          {"circle_osc_max", circle_osc_max},
          {"along_osc_f", along_osc_f},
          {"along_osc_v", along_osc_v},
          {"under_resolved", under_resolved},
          {"samples", samples.size()}};
}

void NeckProfile::write_csv(std::ostream& out) const {
  out.precision(12);
  out << "t,log_t,osc_v,osc_f,mean_f\n";
  for (const auto& s : samples) {
    out << s.t << ',' << std::log(s.t) << ',' << s.osc_v << ',' << s.osc_f << ',' << s.mean_f
        << '\n';
  }
}

NeckProfile neck_profile(const DiscreteMap& map, const WarpFunction& warp, const Vec3& center,
                         double t_in, double t_out, int n_t, int n_circle) {
  if (!(t_in > 0.0 && t_in < t_out && t_out < 1.0)) {
    throw ConfigError("annulus empty: need 0 < t_in < t_out < 1 (chart units)");
  }
  if (n_t < 2) throw ConfigError("neck profile needs at least 2 radii");
  const FaceLocator loc(map.mesh);
  NeckProfile p;
  p.t_in = t_in;
  p.t_out = t_out;
  for (int j = 0; j < n_t; ++j) {
    const double t = t_in * std::pow(t_out / t_in, (j + 0.5) / n_t);
    const CircleOscillation c = neck_oscillation(map, loc, center, t, n_circle);
    p.samples.push_back({t, c.osc_v, c.osc_f, c.mean_f, c.mean_v});
    p.circle_osc_max = std::max(p.circle_osc_max, c.osc_v + c.osc_f);
    p.under_resolved |= c.under_resolved;
  }
  double fmin = p.samples[0].mean_f, fmax = fmin;
  for (std::size_t a = 0; a < p.samples.size(); ++a) {
    fmin = std::min(fmin, p.samples[a].mean_f);
    fmax = std::max(fmax, p.samples[a].mean_f);
    for (std::size_t b = a + 1; b < p.samples.size(); ++b) {
      p.along_osc_v =
          std::max(p.along_osc_v, geodesic_distance(p.samples[a].mean_v, p.samples[b].mean_v));
    }
  }
  p.along_osc_f = fmax - fmin;
  p.energy = chart_annulus_energy(map, warp, center, t_in, t_out);
  return p;
}

double BubbleDecomposition::bubble_sum() const {
  double s = 0.0;
  for (const auto& b : bubbles) s += b.energy;
  return s;
}

double BubbleDecomposition::neck_sum() const {
  double s = 0.0;
  for (const auto& n : neck_annuli) s += n.energy;
  return s;
}

nlohmann::json BubbleDecomposition::to_json() const {
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& b : bubbles) {
    nlohmann::json j = b.point.to_json();
    j["energy"] = b.energy;
    j["patch_radius"] = b.patch.radius;
    j["patch_grid"] = b.patch.n_grid;
    j["nearest_quantum"] = b.nearest_quantum;
    j["quantum_distance"] = b.quantum_distance;
    bj.push_back(j);
  }
  nlohmann::json nj = nlohmann::json::array();
  for (const auto& n : neck_annuli) {
    nj.push_back({{"inner_radius", n.inner_radius},
                  {"outer_radius", n.outer_radius},
                  {"energy", n.energy},
                  {"oscillation", n.oscillation},
                  {"circle_oscillation", n.circle_oscillation},
                  {"profile", n.profile.to_json()}});
  }
  return {{"alpha", alpha},
          {"total_E", total_E},
          {"total_E_alpha", total_E_alpha},
          {"base_energy", base_energy},
          {"bubble_sum", bubble_sum()},
          {"neck_sum", neck_sum()},
          {"closure_error", closure_error},
          {"bubbles", bj},
          {"neck_annuli", nj}};
}

BubbleDecomposition decompose(const DiscreteMap& map, const WarpFunction& warp, double alpha,
                              const EpsilonPolicy& policy, const DecomposeOptions& opts) {
  if (!(opts.R > 0.0) || opts.n_grid < 3) throw ConfigError("invalid decomposition options");
  const TriMesh& mesh = *map.mesh;
  BubbleDecomposition d;
  d.alpha = alpha;
  d.total_E = energy(map, warp).total_E;
  d.total_E_alpha = alpha_energy_value(map, warp, alpha);
  const auto points = detect_concentration(map, warp, policy);
  const std::vector<double> dens = face_energy_density(map, warp);
  const FaceLocator loc(map.mesh);

  std::vector<char> in_ball(mesh.face_count(), 0);
  for (const auto& cp : points) {
    loc.for_each_face_in_ball(cp.location, policy.max_radius, [&](int f) { in_ball[f] = 1; });
  }
  double base = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (!in_ball[f]) base += dens[f] * mesh.face_area[f];
  }
  d.base_energy = 0.5 * base;

  const double quantum = warp.in_domain(0.0) ? neck_quantum(warp) : min_quantum(warp);
  const double outer = std::tan(0.5 * policy.max_radius);
  for (const auto& cp : points) {
    ExtractedBubble ex = extract_bubble(map, loc, warp, cp, opts.R, opts.n_grid);
    BubbleRecord rec;
    rec.point = cp;
    rec.energy = ex.energy;
    rec.patch = std::move(ex.patch);
    rec.nearest_quantum = static_cast<int>(std::lround(rec.energy / quantum));
    rec.quantum_distance = std::abs(rec.energy / quantum - rec.nearest_quantum);
    d.bubbles.push_back(std::move(rec));

    NeckAnnulus neck;
    neck.inner_radius = cp.blowup_scale * opts.R;
    neck.outer_radius = outer;
    if (neck.inner_radius < outer) {
      neck.profile = neck_profile(map, warp, cp.location, neck.inner_radius, outer,
                                  opts.neck_samples);
      neck.energy = neck.profile.energy;
      neck.oscillation = neck.profile.along_oscillation();
      neck.circle_oscillation = neck.profile.circle_osc_max;
    }
    d.neck_annuli.push_back(std::move(neck));
  }
  const double sum = d.base_energy + d.bubble_sum() + d.neck_sum();
  d.closure_error = d.total_E > 0.0 ? std::abs(sum - d.total_E) / d.total_E : std::abs(sum);
  return d;
}

nlohmann::json DefectReport::to_json() const {
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) {
    rj.push_back({{"alpha", r.alpha},
                  {"energy_alpha", r.energy_alpha},
                  {"energy", r.energy},
                  {"base", r.base},
                  {"bubble_sum", r.bubble_sum},
                  {"neck_sum", r.neck_sum},
                  {"n_bubbles", r.n_bubbles},
                  {"defect", r.defect},
                  {"nearest_multiple", r.nearest_multiple},
                  {"multiple_distance", r.multiple_distance},
                  {"closure_error", r.closure_error}});
  }
  nlohmann::json dj = nlohmann::json::array();
  for (const auto& d : decompositions) dj.push_back(d.to_json());
  return {{"label", label},
          {"quantum", quantum},
          {"rows", rj},
          {"trend_slope", trend_slope},
          {"tau", tau},
          {"tau_over_quantum", tau_over_quantum},
          {"tau_non_integer", tau_non_integer},
          {"identity_consistent", identity_consistent},
          {"defect_bounded_away", defect_bounded_away},
          {"flags", flags},
          {"decompositions", dj}};
}

void DefectReport::write_csv(std::ostream& out) const {
  out.precision(12);
  out << "member,alpha,energy_alpha,energy,base,bubble_sum,neck_sum,n_bubbles,defect\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << i << ',' << r.alpha << ',' << r.energy_alpha << ',' << r.energy << ',' << r.base << ','
        << r.bubble_sum << ',' << r.neck_sum << ',' << r.n_bubbles << ',' << r.defect << '\n';
  }
}

DefectReport energy_identity_defect(const std::vector<FamilyMember>& family,
                                    const WarpFunction& warp, const EpsilonPolicy& policy,
                                    const DecomposeOptions& opts, std::string label) {
  if (family.size() < 2) throw ConfigError("defect analysis needs a family of at least 2 maps");
  for (std::size_t i = 1; i < family.size(); ++i) {
    if (family[i].alpha > family[i - 1].alpha) {
      throw ConfigError("family alphas must be nonincreasing toward 1");
    }
  }
  policy.validate(warp);
  DefectReport rep;
  rep.label = std::move(label);
  rep.quantum = neck_quantum(warp);
  for (const auto& m : family) {
    BubbleDecomposition d = decompose(m.map, warp, m.alpha, policy, opts);
    DefectRow r;
    r.alpha = m.alpha;
    r.energy_alpha = d.total_E_alpha;
    r.energy = d.total_E;
    r.base = d.base_energy;
    r.bubble_sum = d.bubble_sum();
    r.neck_sum = d.neck_sum();
    r.n_bubbles = static_cast<int>(d.bubbles.size());
    r.defect = r.energy_alpha - (r.base + r.bubble_sum);
    r.nearest_multiple = static_cast<int>(std::lround(r.defect / rep.quantum));
    r.multiple_distance = std::abs(r.defect / rep.quantum - r.nearest_multiple);
    r.closure_error = d.closure_error;
    rep.rows.push_back(r);
    rep.decompositions.push_back(std::move(d));
  }

  const std::size_t n = rep.rows.size();
  const std::size_t k0 = n >= 3 ? n - 3 : 0;
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(n - k0);
    for (std::size_t i = k0; i < n; ++i) {
      const double x = static_cast<double>(i), y = rep.rows[i].defect;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    rep.trend_slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  }
  rep.tau = rep.rows.back().energy_alpha;
  rep.tau_over_quantum = rep.tau / rep.quantum;
  rep.tau_non_integer =
      std::abs(rep.tau_over_quantum - std::round(rep.tau_over_quantum)) > 0.1;
  const double last = rep.rows.back().defect;
  rep.identity_consistent = std::abs(last) < 0.05 * rep.quantum;
  double tail_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = k0; i < n; ++i) tail_min = std::min(tail_min, std::abs(rep.rows[i].defect));
  rep.defect_bounded_away = tail_min > 0.25 * rep.quantum;

  rep.flags.push_back(rep.label);
  if (rep.identity_consistent) rep.flags.push_back("identity-consistent");
  if (rep.defect_bounded_away) rep.flags.push_back("defect bounded away from 0");
  if (rep.tau_non_integer) rep.flags.push_back("tau/quantum non-integer");
  return rep;
}

DiscreteMap single_bubble_map(MeshPtr mesh, const Vec3& center, double lambda, double f0) {
  if (!(lambda > 0.0)) throw ConfigError("bubble scale must be positive");
  const StereoChart chart(center);
  const std::size_t n = mesh->vertex_count();
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> z = chart.to_chart(mesh->vertices[i]);
    v[i] = std::isfinite(z.real()) ? chart.from_chart(z / lambda) : Vec3(-chart.center());
  }
  return DiscreteMap(std::move(mesh), std::move(v), std::vector<double>(n, f0));
}

DiscreteMap two_bubble_map(MeshPtr mesh, double lambda) {
  if (!(lambda > 0.0 && lambda < 0.5)) throw ConfigError("bubble scale must lie in (0, 0.5)");
  const std::size_t n = mesh->vertex_count();
  std::vector<Vec3> v(n);
  auto hemisphere = [lambda](const Vec3& p) {
    // p.z() >= 0: |z| <= 1; cut the bubble off to the south pole between |z| = 0.5 and 1
    const double den = 1.0 + p.z();
    const std::complex<double> z(p.x() / den, p.y() / den);
    const double nu = 1.0 - smoothstep((std::abs(z) - 0.5) / 0.5);
    if (nu <= 0.0) return Vec3(0.0, 0.0, -1.0);
    if (std::abs(z) <= nu * lambda) return inverse_stereographic(z / (nu * lambda));
    return inverse_stereographic_of_reciprocal(nu * lambda / z);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = mesh->vertices[i];
    v[i] = p.z() >= 0.0 ? hemisphere(p) : hemisphere(Vec3(p.x(), -p.y(), -p.z()));
  }
  return DiscreteMap(std::move(mesh), std::move(v), std::vector<double>(n, 0.0));
}

std::vector<FamilyMember> identity_family(MeshPtr mesh, const std::vector<double>& eps,
                                          const std::vector<double>& alphas, double delta0,
                                          double R0, double base_scale) {
  if (eps.size() != alphas.size()) throw ConfigError("eps and alphas must have equal length");
  std::vector<FamilyMember> fam;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    NeckParams p;
    p.delta0 = delta0;
    p.R0 = R0;
    p.eps0 = eps[i];
    p.base_scale = base_scale;
    fam.push_back({alphas[i], init_neck(mesh, p)});
  }
  return fam;
}

double neck_energy_closed_form(const WarpFunction& warp, int winds, double amplitude,
                               double log_gap) {
  if (!(log_gap > 0.0)) throw ConfigError("log-gap must be positive");
  const double Psi = simpson([&](double t) { return warp.value(t); }, 0.0, amplitude);
  return 4.0 * kPi * winds * winds * amplitude * Psi / log_gap;
}

std::vector<FamilyMember> pinned_winds_family(MeshPtr mesh, const WarpFunction& warp,
                                              const std::vector<int>& winds,
                                              const std::vector<double>& alphas,
                                              double amplitude, double neck_energy,
                                              double delta0, double R0, double base_scale,
                                              std::vector<PinnedMember>* info) {
  if (winds.size() != alphas.size()) throw ConfigError("winds and alphas must have equal length");
  if (!(neck_energy > 0.0)) throw ConfigError("pinned neck energy must be positive");
  if (!warp.in_domain(amplitude) || !warp.in_domain(0.0)) {
    throw ConfigError("neck path leaves the warp domain");
  }
  const Vec3 north(0, 0, 1);
  std::vector<FamilyMember> fam;
  for (std::size_t i = 0; i < winds.size(); ++i) {
    if (winds[i] < 1) throw ConfigError("pinned families need winds >= 1");
    NeckParams p;
    p.delta0 = delta0;
    p.R0 = R0;
    p.path = NeckPath::linear(amplitude);
    p.winds = winds[i];
    p.base_scale = base_scale;
    auto build = [&](double G) {
      p.eps0 = delta0 * std::exp(-G) / R0;
      return init_neck(mesh, p);
    };
    auto measure = [&](const DiscreteMap& m) {
      return chart_annulus_energy(m, warp, north, p.inner_radius(), delta0);
    };
    // the annulus energy scales like 1/G; secant iteration on log G
    double G = 4.0 * kPi * winds[i] * winds[i] * amplitude *
               simpson([&](double t) { return warp.value(t); }, 0.0, amplitude) / neck_energy;
    double lg0 = std::log(G), e0 = std::log(measure(build(G)) / neck_energy);
    double lg1 = std::max(lg0 + e0, std::log(1e-3)), e1 = std::log(measure(build(std::exp(lg1))) / neck_energy);
    for (int it = 0; it < 30 && std::abs(e1) > 1e-4; ++it) {
      const double slope = (e1 - e0) / (lg1 - lg0);
      const double next = lg1 - e1 / (std::isfinite(slope) && slope < -0.1 ? slope : -1.0);
      lg0 = lg1;
      e0 = e1;
      lg1 = std::max(next, std::log(1e-3));
      e1 = std::log(measure(build(std::exp(lg1))) / neck_energy);
    }
    if (std::abs(e1) > 1e-3) {
      throw InvariantError("could not pin the neck energy for winds = " +
                           std::to_string(winds[i]) + "; the annulus is not resolved");
    }
    G = std::exp(lg1);
    DiscreteMap m = build(G);
    if (info) {
      info->push_back({winds[i], G, p.eps0, measure(m),
                       neck_energy_closed_form(warp, winds[i], amplitude, G)});
    }
    fam.push_back({alphas[i], std::move(m)});
  }
  return fam;
}

}  // namespace warp_harmonic
