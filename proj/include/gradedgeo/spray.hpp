#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/curve.hpp"
#include "gradedgeo/manifold.hpp"
#include "gradedgeo/metric_family.hpp"
#include "gradedgeo/ode.hpp"

namespace gradedgeo {

/// Point-indexed symmetric bilinear map S(x)(u, v) on a chart, stored as
/// coefficient matrices: S(x)(u, v)_k = u^T C_k(x) v.
///
/// The geodesic equation reads l'' = S(l)(l', l'); for a metric-derived
/// spray S = -Gamma (Christoffel symbols of the designated level).
class Spray {
 public:
  enum class Provenance { from_metric, catalog, zero };
  using CoeffFn = std::function<std::vector<Mat>(const Vec&)>;

  Spray(Chart chart, CoeffFn coefficients, Provenance provenance, int level = 0, std::string name = {});
  static Spray zero(Chart chart);

  const Chart& chart() const { return chart_; }
  const ChartDomain& domain() const { return chart_.domain; }
  int dim() const { return chart_.dim(); }
  Provenance provenance() const { return provenance_; }
  int level() const { return level_; }
  const std::string& name() const { return name_; }

  std::vector<Mat> coefficients(const Vec& x) const;
  Vec operator()(const Vec& x, const Vec& u, const Vec& v) const;
  /// S(x)(v, v).
  Vec quadratic(const Vec& x, const Vec& v) const;
  /// The spray scaled by `factor` (used to plant deliberately wrong connections).
  Spray scaled(double factor) const;

 private:
  Chart chart_;
  CoeffFn coeffs_;
  Provenance provenance_;
  int level_;
  std::string name_;
};

std::string to_string(Spray::Provenance p);

/// S = -Gamma_n from the level-n Gram family; throws NumericalError with
/// reason "singular_gram" when G_n(x) cannot be inverted.
Spray spray_from_metric(const LevelMetricFamily& family, int n);

struct GeodesicSolution {
  Vec x0;
  Vec v0;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  ExitReason reason = ExitReason::horizon;
  double t_reached = 0.0;
  Vec x_reached;
  Vec v_reached;
  std::size_t steps = 0;
  std::size_t rejected = 0;

  bool completed() const { return reason == ExitReason::horizon; }
  CurvePath path() const;
  nlohmann::json stats_json() const;
};

/// Solves (x, v)' = (v, S(x)(v, v)) on a uniform grid of `grid_count` outputs
/// over [0, t_end] (t_end may be negative).
GeodesicSolution integrate_geodesic(const Spray& spray, const Vec& x0, const Vec& v0, double t_end,
                                    const OdeOptions& opts = {}, int grid_count = 101);

/// Position and velocity at time t of the geodesic through (x, v).
struct GeodesicState {
  Vec x;
  Vec v;
};
GeodesicState geodesic_state(const Spray& spray, const Vec& x, const Vec& v, double t, const OdeOptions& opts = {});

/// Smooth-in-parameters integration settings for finite-difference Jacobians
/// of exp: a fixed DP5 mesh, so nearby velocities see the same step sequence.
OdeOptions fixed_mesh_options(double steps_per_unit = 256.0);

/// Position at t = 1; throws NumericalError("domain_exit") when the geodesic
/// leaves the chart or blows up first.
Vec exp_map(const Spray& spray, const Vec& x, const Vec& v, const OdeOptions& opts = {});

/// Central-difference Jacobian of v -> exp_x(v); step <= 0 picks cbrt(eps)(1 + ||v||^N).
Mat exp_jacobian(const Spray& spray, const Vec& x, const Vec& v, const OdeOptions& opts = fixed_mesh_options(),
                 double step = 0.0);

struct HomogeneityError {
  double position = 0.0;  ///< ||geo(x, s v)(t) - geo(x, v)(s t)||^N
  double velocity = 0.0;  ///< ||geo'(x, s v)(t) - s geo'(x, v)(s t)||^N
};

HomogeneityError check_homogeneity(const Spray& spray, const Vec& x, const Vec& v, double s, double t,
                                   const OdeOptions& opts = {});

struct ShootingOptions {
  OdeOptions ode = fixed_mesh_options();
  int max_iter = 50;
  double tol = 1e-10;
  double damping_floor = 1e-4;
  double armijo = 1e-4;
  /// Jacobian condition number treated as singular (conjugate-point warning).
  double singular_condition = 1e12;
};

struct ShootingReport {
  Vec v;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;
  double jacobian_condition = 0.0;
  bool conjugate_warning = false;
  std::string failure;  ///< empty on success

  nlohmann::json to_json() const;
};

/// Damped Newton shooting for exp_x(v) = y with an FD Jacobian and Armijo
/// backtracking. Never throws on non-convergence; inspect `converged`.
ShootingReport connect(const Spray& spray, const Vec& x, const Vec& y, const std::optional<Vec>& v_init = {},
                       const ShootingOptions& opts = {});

struct InjectivityOptions {
  double condition_threshold = 1e8;
  double collision_distance = 1e-8;
  int bisection_steps = 40;
  double relative_width = 1e-5;
  std::uint64_t seed = 42;
  OdeOptions ode = fixed_mesh_options();
};

struct InjectivityEstimate {
  double radius = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  /// "none" (no failure up to r_max), "conjugate" or "collision".
  std::string certificate = "none";
  int directions = 0;
  int skipped_directions = 0;  ///< left the chart at the failing radius

  nlohmann::json to_json() const;
};

/// Bisection estimate of the injectivity radius at x. A radius fails when a
/// sampled velocity of level-N speed r has an exp Jacobian that is
/// ill-conditioned or has crossed a determinant sign change (a conjugate
/// point at or before r), or when two sampled velocities land closer than
/// the collision distance. Directions whose geodesic leaves the chart are
/// skipped. An estimate, not a proof.
InjectivityEstimate injectivity_radius_estimate(const Spray& spray, const LevelMetricFamily& family, const Vec& x,
                                                double r_max, int samples, const InjectivityOptions& opts = {});

/// Residual ||l'' - S(l)(l', l')|| at interior nodes, with l'' from
/// fourth-order central differences of the stored velocities (uniform grid).
double geodesic_equation_residual(const Spray& spray, const GeodesicSolution& sol);

}  // namespace gradedgeo
