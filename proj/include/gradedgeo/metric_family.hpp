#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/graded_space.hpp"
#include "gradedgeo/manifold.hpp"

namespace gradedgeo {

/// Point-dependent fiber Gram matrices {G_n(x)} on a chart.
///
/// A scalar_scaled family is G_n(x) = w_n G(x) with 0 < w_1 <= ... <= w_N;
/// all its levels share one Levi-Civita connection. A general family stores
/// one Gram map per level and needs an explicit driving level for geodesics.
class LevelMetricFamily {
 public:
  enum class Structure { scalar_scaled, general };
  using GramFn = std::function<Mat(const Vec&)>;
  /// Returns the D partial derivatives dG/dx_k.
  using GramPartialsFn = std::function<std::vector<Mat>(const Vec&)>;

  static LevelMetricFamily scalar_scaled(std::string name, Chart chart, GramFn base, GramPartialsFn partials,
                                         std::vector<double> weights);
  static LevelMetricFamily general(std::string name, Chart chart, std::vector<GramFn> grams,
                                   std::vector<GramPartialsFn> partials, int driving_level);

  const std::string& name() const { return name_; }
  const Chart& chart() const { return chart_; }
  const ChartDomain& domain() const { return chart_.domain; }
  int dim() const { return chart_.dim(); }
  int levels() const { return levels_; }
  Structure structure() const { return structure_; }
  const std::vector<double>& weights() const { return weights_; }
  int driving_level() const { return driving_level_; }
  void set_driving_level(int n);
  bool has_analytic_partials() const;

  /// G_n(x); throws DomainError outside the chart and DimensionError for a bad level.
  Mat gram(int n, const Vec& x) const;
  /// dG_n/dx_k, analytic when registered, else central differences.
  std::vector<Mat> gram_partials(int n, const Vec& x) const;
  /// The fiber at x as a graded space (for grading checks).
  GradedSeminormSpace fiber(const Vec& x) const;

  double product(int n, const Vec& x, const Vec& u, const Vec& v) const;
  double norm(int n, const Vec& x, const Vec& u) const;

 private:
  explicit LevelMetricFamily(Chart chart) : chart_(std::move(chart)) {}
  void check_level(int n) const;

  std::string name_;
  Chart chart_;
  Structure structure_ = Structure::scalar_scaled;
  int levels_ = 0;
  int driving_level_ = 1;
  std::vector<double> weights_;
  GramFn base_;
  GramPartialsFn base_partials_;
  std::vector<GramFn> grams_;
  std::vector<GramPartialsFn> partials_;
};

/// u^T G_n(x) v.
double finsler_product(const LevelMetricFamily& family, int n, const Vec& x, const Vec& u, const Vec& v);

struct OrthogonalityResult {
  bool orthogonal = false;
  std::vector<double> values;  ///< per level
};

/// True iff |<<u,v>>_n| <= tol (1 + ||u||^n ||v||^n) at every level.
OrthogonalityResult f_orthogonal(const LevelMetricFamily& family, const Vec& x, const Vec& u, const Vec& v,
                                 double tol = 1e-10);

struct FinslerLevelResult {
  double max_ratio = 1.0;
  double min_ratio = 1.0;
  double worst_ratio = 1.0;  ///< max(max_ratio, 1/min_ratio)
  Vec witness_point;
  Vec witness_direction;
};

struct FinslerCheckReport {
  double k = 0.0;
  double radius = 0.0;
  Vec x0;
  std::vector<FinslerLevelResult> levels;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Samples points in the coordinate ball B(x0, radius) (half of them on its
/// boundary) and unit directions, recording ||f||^n_u / ||f||^n_x0 per level.
FinslerCheckReport finsler_check(const LevelMetricFamily& family, const Vec& x0, double k, double radius,
                                 int samples, std::uint64_t seed);

}  // namespace gradedgeo
