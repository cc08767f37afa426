#pragma once

#include <cstdint>
#include <functional>

#include <nlohmann/json.hpp>

#include "gradedgeo/curve.hpp"
#include "gradedgeo/manifold.hpp"
#include "gradedgeo/metric_family.hpp"
#include "gradedgeo/spray.hpp"

namespace gradedgeo {

/// Level-n Levi-Civita derivative (nabla^n_X Y)(x) by the Koszul formula.
///
/// For each coordinate field Z = e_k the Koszul sum
///   X<Y,Z> + Y<Z,X> - Z<X,Y> + <[X,Y],Z> - <[Y,Z],X> + <[Z,X],Y>
/// is assembled from central-difference Lie derivatives of the products and
/// derivation-convention brackets [A,B] = B'A - A'B; then G_n(x) w = K/2.
/// Throws NumericalError("singular_gram") when G_n(x) is not definite.
Vec koszul_covariant(const LevelMetricFamily& family, int n, const VectorField& X, const VectorField& Y,
                     const Vec& x);

/// Chart formula (nabla_X Y)(x) = Y'(x)X(x) - S(x)(X(x), Y(x)).
Vec chart_covariant(const Spray& spray, const VectorField& X, const VectorField& Y, const Vec& x);

/// gamma'(t) - S(lambda(t))(lambda'(t), gamma(t)) on Hermite interpolants.
Vec covariant_along_curve(const Spray& spray, const CurvePath& curve, const CurvePath& lift, double t);

/// Closed-form curve for transport (exact position and velocity).
struct CurveFunction {
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
  double t0 = 0.0;
  double t1 = 1.0;

  static CurveFunction from_path(const CurvePath& path);
};

struct TransportResult {
  CurvePath lift;  ///< transported vector and its derivative on the grid
  ExitReason reason = ExitReason::horizon;
  /// max_t | ||gamma(t)||^n - ||gamma(t0)||^n | / ||gamma(t0)||^n per level
  std::vector<double> norm_drift;

  nlohmann::json to_json() const;
};

/// Solves gamma' = S(mu)(mu', gamma), gamma(t0) = v0 along the curve.
TransportResult parallel_transport(const Spray& spray, const LevelMetricFamily& family, const CurveFunction& curve,
                                   const Vec& v0, const OdeOptions& opts = {}, int grid_count = 201);
TransportResult parallel_transport(const Spray& spray, const LevelMetricFamily& family, const CurvePath& curve,
                                   const Vec& v0, const OdeOptions& opts = {});

struct ConnectionReport {
  int level = 0;
  int samples = 0;
  double compatibility_max = 0.0;  ///< |Z<X,Y> - <nabla_Z X,Y> - <X,nabla_Z Y>|
  double torsion_max = 0.0;        ///< ||nabla_X Y - nabla_Y X - [X,Y]||
  double koszul_vs_chart_max = 0.0;
  double tolerance = 1e-5;
  bool compatible = false;
  bool torsion_free = false;
  bool koszul_agrees = false;

  nlohmann::json to_json() const;
};

/// Checks the connection induced by `spray` (chart formula) against metric
/// compatibility and torsion-freeness on seeded sample points and seeded
/// polynomial vector fields; also compares with the Koszul construction.
ConnectionReport connection_property_report(const LevelMetricFamily& family, int n, const Spray& spray,
                                            int samples, std::uint64_t seed, double tolerance = 1e-5);

/// Seeded polynomial test field a + Bx + c (x.x) with analytic Jacobian,
/// scaled by `scale`.
VectorField random_polynomial_field(int dim, std::uint64_t seed, double scale = 1.0);

}  // namespace gradedgeo
