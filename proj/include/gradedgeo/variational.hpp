#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/curve.hpp"
#include "gradedgeo/metric_family.hpp"
#include "gradedgeo/spray.hpp"

namespace gradedgeo {

/// L_n(curve) by composite 5-point Gauss-Legendre quadrature per segment.
double length_n(const LevelMetricFamily& family, int n, const CurvePath& curve);

/// E_n(curve) = 1/2 int <<l', l'>>_n dt with the same quadrature.
double energy_n(const LevelMetricFamily& family, int n, const CurvePath& curve);

/// Straight segment x -> y on [0, 1] with `nodes` grid points.
CurvePath straight_segment(const Vec& x, const Vec& y, int nodes = 2);

struct DistanceOptions {
  ShootingOptions shooting;
  int geodesic_nodes = 401;    ///< grid of the connecting geodesic used for its length
  int fallback_cells = 24;     ///< lattice cells per axis of the polygonal fallback
  int fallback_max_nodes = 20000;
  bool allow_fallback = true;
};

struct LevelDistance {
  int level = 0;
  double value = 0.0;
  /// "geodesic" or "polygonal-upper-bound".
  std::string method;
  /// Geodesic of a connection compatible with this level, found by a converged
  /// and well-conditioned shooting.
  bool certified = false;
  std::string status;

  nlohmann::json to_json() const;
};

/// rho_n(x, y): length of the connecting geodesic, or the polygonal upper
/// bound over a lattice when shooting fails. Throws
/// NumericalError("no_certificate") when neither method produces a value.
LevelDistance distance_n(const LevelMetricFamily& family, const Spray& spray, int n, const Vec& x, const Vec& y,
                         const DistanceOptions& opts = {});

struct DistanceReport {
  std::vector<LevelDistance> levels;
  double rho = 0.0;

  nlohmann::json to_json() const;
};

/// sum_n 2^-n r_n / (1 + r_n).
double combine_level_distances(const std::vector<double>& rho_n);

DistanceReport finsler_distance(const LevelMetricFamily& family, const Spray& spray, const Vec& x, const Vec& y,
                                const DistanceOptions& opts = {});

struct ElResidual {
  std::vector<double> times;      ///< interior grid times
  std::vector<Vec> residual;      ///< d_x L - d/dt [G_n l']
  double sup = 0.0;
  double dx_term_sup = 0.0;       ///< sup || d_x L ||
  double dt_term_sup = 0.0;       ///< sup || d/dt [G_n l'] ||

  nlohmann::json to_json() const;
  /// CSV with columns t, r_1..r_D.
  void save_csv(const std::string& path) const;
};

/// Euler-Lagrange residual of L(x, v) = 1/2 v^T G_n(x) v at interior grid
/// points; the time derivative is a central difference on the Hermite
/// interpolant with step `rel_step` times the local grid spacing.
ElResidual el_residual(const LevelMetricFamily& family, int n, const CurvePath& curve, double rel_step = 1e-2);

struct FirstVariation {
  double fd = 0.0;       ///< central difference of h -> E_n(curve + h Y)
  double formula = 0.0;  ///< -int <<Y, nabla_{l'} l'>>_n
  double difference = 0.0;

  nlohmann::json to_json() const;
};

/// Throws std::invalid_argument when the variation field does not vanish at
/// both endpoints or lives on a different grid.
FirstVariation first_variation(const LevelMetricFamily& family, int n, const CurvePath& curve,
                               const CurvePath& variation, double h = 1e-4);

struct MinimalityOptions {
  int max_resamples = 20;
  double slack = 1e-9;
};

struct MinimalityReport {
  std::vector<double> base_lengths;  ///< L_n(l) per level
  int trials = 0;
  int violations = 0;          ///< competitors shorter than l beyond the slack at some level
  int trials_beaten = 0;       ///< trials whose pair contains a competitor shorter at some level
  int resamples = 0;
  int skipped = 0;             ///< trials abandoned after max_resamples chart exits
  std::vector<double> min_margin;  ///< min over competitors of L_n(competitor) - L_n(l)
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Each trial draws a seeded bump B vanishing at the endpoints and compares
/// L_n(l) with L_n(l + a B) and L_n(l - a B) at every level. Pass iff no
/// competitor is shorter by more than the slack.
MinimalityReport minimality_test(const LevelMetricFamily& family, const CurvePath& geodesic, int trials,
                                 double amplitude, std::uint64_t seed, const MinimalityOptions& opts = {});

struct GaussReport {
  double epsilon = 0.0;
  double orthogonality_defect = 0.0;  ///< max |<<d1 i, d2 i>>_n| / (||d1 i|| ||d2 i|| + 1e-30)
  double radial_speed_defect = 0.0;   ///< max |<<d1 i, d1 i>>_n - <<j, j>>_n| / <<j, j>>_n
  int s_samples = 0;
  int t_samples = 0;

  nlohmann::json to_json() const;
};

/// Builds i(s, t) = exp_x(s j(t)) for a closed curve j on the driving-level
/// unit sphere and s in (0, epsilon]. Throws NumericalError("domain_exit")
/// when a radial geodesic leaves the chart.
GaussReport gauss_check(const LevelMetricFamily& family, const Spray& spray, const Vec& x, double epsilon,
                        int s_samples, int t_samples, const OdeOptions& opts = fixed_mesh_options());

}  // namespace gradedgeo
