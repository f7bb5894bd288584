#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "warp_harmonic/discrete_map.hpp"
#include "warp_harmonic/patch.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/warp.hpp"

namespace warp_harmonic {

/// Smallest harmonic-sphere quantum 4 pi psi_min used to guard eps0, with psi_min the
/// minimum of psi sampled over the warp domain.
double min_quantum(const WarpFunction& warp);

/// 4 pi psi(0), the degree-1 quantum of the neck sphere. Requires 0 in the warp domain.
double neck_quantum(const WarpFunction& warp);

struct EpsilonPolicy {
  double eps0 = 1.0;        // ball-energy threshold (energies in units of E)
  double min_radius = 0.15;  // geodesic radius of the detection ball
  double max_radius = 0.9;   // geodesic radius of the decomposition ball
  int profile_samples = 8;

  /// Throws ConfigError unless 0 < eps0 < min_quantum(warp) and 0 < min < max < pi.
  void validate(const WarpFunction& warp) const;
  nlohmann::json to_json() const;
};

struct ConcentrationPoint {
  Vec3 location;
  std::vector<std::pair<double, double>> ball_energy_profile;  // (radius, energy)
  double ball_energy = 0.0;     // at min_radius
  double peak_gradient = 0.0;   // conformal stretch at the peak face
  double blowup_scale = 0.0;    // 1 / peak_gradient
  int peak_face = -1;

  nlohmann::json to_json() const;
};

/// Local maxima of the conformal stretch whose ball energy 1/2 int_B |grad u|^2 at
/// min_radius is at least eps0/2; candidates closer than 2 min_radius are merged, keeping
/// the higher peak. The stretch sqrt((|grad v|^2 + |grad f|^2)/2) equals 1/eps at the center
/// of the standard bubble S^{-1}(z/eps), so blowup_scale is the chart scale of the bubble.
std::vector<ConcentrationPoint> detect_concentration(const DiscreteMap& map,
                                                     const WarpFunction& warp,
                                                     const EpsilonPolicy& policy);

struct ExtractedBubble {
  PlanarPatch patch;
  double energy = 0.0;
};

/// Resamples the map at scale cp.blowup_scale over D_R around cp.location and integrates
/// the patch energy. Throws DomainError (suggesting a smaller R) if scale * R >= 1.
ExtractedBubble extract_bubble(const DiscreteMap& map, const WarpFunction& warp,
                               const ConcentrationPoint& cp, double R = 10.0, int n_grid = 161);
ExtractedBubble extract_bubble(const DiscreteMap& map, const FaceLocator& locator,
                               const WarpFunction& warp, const ConcentrationPoint& cp, double R,
                               int n_grid);

struct CircleOscillation {
  double osc_v = 0.0;   // max pairwise geodesic distance of v on the circle
  double osc_f = 0.0;   // max - min of f on the circle
  Vec3 mean_v = Vec3::Zero();  // normalized circle mean of v
  double mean_f = 0.0;
  bool under_resolved = false;  // doubling the samples moved osc by more than 5%
};

/// Oscillation of the map on the chart circle |z| = t around cp.location, sampled at n
/// points (n >= 64). Throws ConfigError when t is not in (0, 1).
CircleOscillation neck_oscillation(const DiscreteMap& map, const ConcentrationPoint& cp, double t,
                                   int n = 64);
CircleOscillation neck_oscillation(const DiscreteMap& map, const FaceLocator& locator,
                                   const Vec3& center, double t, int n = 64);

struct NeckSample {
  double t;
  double osc_v;
  double osc_f;
  double mean_f;
  Vec3 mean_v;
};

/// Circle oscillations on log-spaced radii of the chart annulus t_in < |z| < t_out plus
/// the oscillation along the neck: max - min over t of the circle mean of f, and the
/// largest geodesic distance between circle means of v. Radial necks carry all their
/// oscillation in the second kind.
struct NeckProfile {
  double t_in = 0.0, t_out = 0.0;
  std::vector<NeckSample> samples;
  double circle_osc_max = 0.0;  // sup over t of osc_v + osc_f
  double along_osc_f = 0.0;
  double along_osc_v = 0.0;
  double energy = 0.0;          // mesh energy of the annulus
  bool under_resolved = false;

  double along_oscillation() const { return along_osc_f + along_osc_v; }
  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

/// Throws ConfigError ("annulus empty") unless 0 < t_in < t_out < 1.
NeckProfile neck_profile(const DiscreteMap& map, const WarpFunction& warp, const Vec3& center,
                         double t_in, double t_out, int n_t = 48, int n_circle = 64);

/// Mesh energy of the faces whose barycenter has chart radius in (r_in, r_out) in the
/// stereographic chart centered at `center`.
double chart_annulus_energy(const DiscreteMap& map, const WarpFunction& warp, const Vec3& center,
                            double r_in, double r_out);

struct BubbleRecord {
  ConcentrationPoint point;
  PlanarPatch patch;
  double energy = 0.0;
  int nearest_quantum = 0;       // m with |energy - m 4 pi psi(0)| minimal
  double quantum_distance = 0.0;  // relative to the quantum
};

struct NeckAnnulus {
  double inner_radius = 0.0;  // chart units, blowup_scale * R
  double outer_radius = 0.0;  // chart radius of the decomposition ball
  double energy = 0.0;
  double oscillation = 0.0;   // along-neck oscillation
  double circle_oscillation = 0.0;
  NeckProfile profile;
};

struct DecomposeOptions {
  double R = 10.0;
  int n_grid = 161;
  int neck_samples = 32;
};

struct BubbleDecomposition {
  double alpha = 1.0;
  double total_E = 0.0;
  double total_E_alpha = 0.0;
  double base_energy = 0.0;
  std::vector<BubbleRecord> bubbles;
  std::vector<NeckAnnulus> neck_annuli;
  double closure_error = 0.0;  // |base + bubbles + necks - E| / E

  double bubble_sum() const;
  double neck_sum() const;
  nlohmann::json to_json() const;
};

/// Partitions the map energy: base = energy outside every max_radius ball, bubble = patch
/// energy over D_R at the blow-up scale, neck = mesh energy of the chart annulus between.
BubbleDecomposition decompose(const DiscreteMap& map, const WarpFunction& warp, double alpha,
                              const EpsilonPolicy& policy, const DecomposeOptions& opts = {});

struct FamilyMember {
  double alpha = 1.0;
  DiscreteMap map;
};

struct DefectRow {
  double alpha;
  double energy_alpha;
  double energy;
  double base;
  double bubble_sum;
  double neck_sum;
  int n_bubbles;
  double defect;
  int nearest_multiple;      // defect / quantum rounded
  double multiple_distance;  // |defect / quantum - nearest_multiple|
  double closure_error;
};

struct DefectReport {
  std::string label;  // "constructed family" for built families, never "minimizer family"
  double quantum = 0.0;
  std::vector<DefectRow> rows;
  std::vector<BubbleDecomposition> decompositions;
  double trend_slope = 0.0;   // least-squares slope of the last 3 defects per member
  double tau = 0.0;           // E_alpha of the last member
  double tau_over_quantum = 0.0;
  bool tau_non_integer = false;
  bool identity_consistent = false;
  bool defect_bounded_away = false;
  std::vector<std::string> flags;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

/// defect_k = E_{alpha_k}(map_k) - [base_k + sum bubble_k] for each member. Requires at
/// least two members with alpha nonincreasing; ConfigError otherwise.
DefectReport energy_identity_defect(const std::vector<FamilyMember>& family,
                                    const WarpFunction& warp, const EpsilonPolicy& policy,
                                    const DecomposeOptions& opts = {},
                                    std::string label = "constructed family");

// ---- synthetic maps and families ---------------------------------------------------------

/// Global Moebius dilation of the identity: v = C^{-1}(C(x) / lambda) in the chart C
/// centered at `center`, f = f0. A single bubble of chart scale lambda.
DiscreteMap single_bubble_map(MeshPtr mesh, const Vec3& center, double lambda, double f0 = 0.0);

/// Two bubbles of scale lambda at the north and south poles, glued along the equator at the
/// south pole; the southern copy is the northern one composed with the half-turn about the
/// x axis, so the map has degree 2.
DiscreteMap two_bubble_map(MeshPtr mesh, double lambda);

/// Neck maps with winds = 0 and eps0 running through `eps`; alphas pair with eps.
std::vector<FamilyMember> identity_family(MeshPtr mesh, const std::vector<double>& eps,
                                          const std::vector<double>& alphas, double delta0 = 0.5,
                                          double R0 = 4.0, double base_scale = 1.0);

struct PinnedMember {
  int winds;
  double log_gap;
  double eps0;
  double annulus_energy;  // measured on the mesh
  double closed_form;     // 4 pi w^2 A Psi(A) / G
};

/// Neck maps with winds from `winds` and a linear path of the given amplitude; for each
/// member the log-gap is solved so that the measured annulus energy equals `neck_energy`.
std::vector<FamilyMember> pinned_winds_family(MeshPtr mesh, const WarpFunction& warp,
                                              const std::vector<int>& winds,
                                              const std::vector<double>& alphas,
                                              double amplitude, double neck_energy,
                                              double delta0 = 0.5, double R0 = 4.0,
                                              double base_scale = 1.0,
                                              std::vector<PinnedMember>* info = nullptr);

/// Closed-form annulus energy of a linear neck path traversed `winds` times back and forth:
/// 4 pi w^2 A Psi(A) / G with Psi(A) = int_0^A psi.
double neck_energy_closed_form(const WarpFunction& warp, int winds, double amplitude,
                               double log_gap);

}  // namespace warp_harmonic
