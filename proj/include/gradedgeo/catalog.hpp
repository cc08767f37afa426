#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/manifold.hpp"
#include "gradedgeo/metric_family.hpp"
#include "gradedgeo/spray.hpp"

namespace gradedgeo {

/// Coordinate change to a second chart, defined on an overlap.
struct ChartTransition {
  std::string name;
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<bool(const Vec&)> in_overlap;
};

/// Catalog problem: chart, level metric family and the driving spray.
struct ChartedProblem {
  std::string id;
  nlohmann::json params;  ///< parameters with defaults filled in
  LevelMetricFamily family;
  Spray spray;
  std::optional<ChartTransition> second_chart;

  const Chart& chart() const { return family.chart(); }
  int dim() const { return family.dim(); }
  int levels() const { return family.levels(); }
};

/// Problem ids: flat, conformal, sphere_stereographic, spd.
const std::vector<std::string>& catalog_problem_ids();

/// Parameter keys accepted by a problem id (throws for an unknown id).
const std::vector<std::string>& catalog_problem_keys(const std::string& id);

/// Builds a catalog problem. Common params: levels (2), weights (1..N),
/// driving_level (N). flat: dim (2) or explicit grams + psd_tol; conformal:
/// dim (2), direction a (e_1), half_width (2), G = e^{2<a,x>} I on the box;
/// sphere_stereographic: dim (2), radius R (1), chart_radius (10 R),
/// G = 4R^4/(R^2+|x|^2)^2 I; spd: m (2), kind (ebin).
/// Throws std::invalid_argument for an unknown id, unknown keys or invalid
/// values (a grading failure names the offending level pair).
ChartedProblem catalog_problem(const std::string& id, const nlohmann::json& params = nlohmann::json::object());

/// Vector fields: identity, rotation, square, one_plus_square, linear
/// (param "matrix"), constant (param "vector"), pair_a (x_2^2, 0),
/// pair_b (0, x_1), poly (param "seed"). All carry analytic Jacobians.
VectorField catalog_field(const std::string& name, int dim, const nlohmann::json& params = nlohmann::json::object());
const std::vector<std::string>& catalog_field_names();

/// Scalar maps: linear (param "c", default all ones), sqnorm, exp2x1.
ScalarField catalog_scalar(const std::string& name, int dim, const nlohmann::json& params = nlohmann::json::object());

}  // namespace gradedgeo
