#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/curve.hpp"
#include "gradedgeo/metric_family.hpp"
#include "gradedgeo/ode.hpp"
#include "gradedgeo/variational.hpp"

namespace gradedgeo {

enum class SpdKind {
  flat,              ///< w_n tr(hk)
  affine_invariant,  ///< w_n tr(g^-1 h g^-1 k)
  ebin,              ///< w_n sqrt(det g) tr(g^-1 h g^-1 k)
};

std::string to_string(SpdKind k);
SpdKind spd_kind_from_string(const std::string& s);

/// Constant-coefficient metrics on the m-torus: SPD m x m matrices in
/// upper-triangle coordinates (off-diagonal coordinate g_ij moves both
/// symmetric entries), D = m(m+1)/2.
struct SpdMetricSpace {
  int m = 2;
  SpdKind kind = SpdKind::ebin;
  std::vector<double> weights{1.0, 2.0};

  int dim() const { return spd_dim(m); }
  /// Scalar-scaled family with analytic Gram partials.
  LevelMetricFamily family() const;
};

/// g(t) = (1 - 2 lambda t) g0 sampled on `grid_size` points of [0, T] with
/// exact velocity -2 lambda g0. Throws DomainError when positivity fails on [0, T].
CurvePath einstein_ricci_curve(double lambda, const Mat& g0, double T, int grid_size);

struct RicciLevelResult {
  int level = 0;
  ElResidual residual;
  FirstVariation variation;
  double control_residual = 0.0;
  double control_variation = 0.0;
  double theta = 0.0;    ///< residual threshold
  double theta_v = 0.0;  ///< first-variation threshold
  bool residual_exceeds = false;
  bool variation_exceeds = false;

  nlohmann::json to_json() const;
};

struct RicciAssessment {
  std::string kind;
  std::vector<RicciLevelResult> levels;
  std::string verdict;  ///< "geodesic" or "not geodesic"

  nlohmann::json to_json() const;
};

struct RicciReport {
  double lambda = 0.0;
  double T = 0.0;
  int m = 0;
  std::vector<double> weights;
  RicciAssessment assessment;
  RicciAssessment flat_control;
  std::string verdict;

  nlohmann::json to_json() const;
};

struct RicciOptions {
  /// Coarse enough that node rounding (about eps / h^2 in the residual) stays well below 1e-8.
  int grid_size = 101;
  std::uint64_t seed = 42;
  OdeOptions ode{1e-12, 1e-14};
  /// Thresholds: margin times the control geodesic's value, at least `floor`.
  double margin = 1e4;
  double floor = 1e-8;
};

/// E-L residuals and first variation of the Ricci curve for every level,
/// calibrated against a geodesic of the same family with the same initial
/// data, together with the flat-kind control on the same curve.
RicciReport ricci_nongeodesic_report(const SpdMetricSpace& space, double lambda, const Mat& g0, double T,
                                     const RicciOptions& opts = {});

}  // namespace gradedgeo
