#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/curve.hpp"
#include "gradedgeo/graded_space.hpp"
#include "gradedgeo/linalg.hpp"
#include "gradedgeo/ode.hpp"

namespace gradedgeo {

/// Coordinate region of a chart.
class ChartDomain {
 public:
  enum class Kind { whole, box, ball, spd_cone };

  static ChartDomain whole(int dim);
  static ChartDomain box(Vec lo, Vec hi);
  static ChartDomain ball(Vec center, double radius);
  /// Flattened symmetric m x m matrices with smallest eigenvalue > floor.
  static ChartDomain spd_cone(int m, double floor = 1e-12);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool contains(const Vec& x) const;
  /// True when the closed coordinate ball B(x0, r) lies inside the domain.
  bool contains_ball(const Vec& x0, double r) const;
  void require(const Vec& x, const char* what) const;
  /// Interior reference point (box/ball center, identity matrix, origin).
  Vec reference_point() const;
  /// Length scale of the domain around the reference point.
  double typical_scale() const;

  nlohmann::json to_json() const;

 private:
  Kind kind_ = Kind::whole;
  int dim_ = 0;
  Vec lo_, hi_;
  double radius_ = 0.0;
  int m_ = 0;
  double floor_ = 0.0;
};

/// Coordinate chart: its domain plus the model space whose top seminorm is
/// used for diagnostics and finite-difference step sizing.
struct Chart {
  ChartDomain domain;
  GradedSeminormSpace space;

  int dim() const { return domain.dim(); }
  double top_norm(const Vec& v) const { return seminorm(space, space.levels(), v); }
  /// cbrt(machine epsilon) * (1 + ||x||^N).
  double fd_step(const Vec& x) const;
};

struct ScalarField {
  std::string name;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> gradient;  ///< optional analytic gradient

  double operator()(const Vec& x) const { return eval(x); }
};

struct VectorField {
  std::string name;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;  ///< optional analytic Jacobian X'(x)

  Vec operator()(const Vec& x) const { return eval(x); }
  bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

template <typename T>
struct DirectionalDerivative {
  T value;      ///< analytic when registered, else the central difference
  T fd_value;   ///< central difference, always computed
  bool analytic = false;
};

/// Central difference (f(x+sh) - f(x-sh)) / 2s; step <= 0 selects the chart default.
DirectionalDerivative<double> directional_derivative(const ScalarField& f, const Vec& x, const Vec& h,
                                                     const Chart& chart, double step = 0.0);
DirectionalDerivative<Vec> directional_derivative(const VectorField& f, const Vec& x, const Vec& h,
                                                  const Chart& chart, double step = 0.0);

/// X'(x): analytic when registered, else central differences column by column.
Mat field_jacobian(const VectorField& X, const Vec& x, const Chart& chart);

/// X'(x)Y(x) - Y'(x)X(x).
Vec lie_bracket(const VectorField& X, const VectorField& Y, const Vec& x, const Chart& chart);

/// Result of following an ODE trajectory on an output grid.
struct IntegralCurve {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  ExitReason reason = ExitReason::horizon;
  double t_reached = 0.0;
  Vec x_reached;
  std::size_t steps = 0;
  std::size_t rejected = 0;

  bool completed() const { return reason == ExitReason::horizon; }
  /// Path over the reached outputs, reordered to increasing time.
  CurvePath path() const;
  nlohmann::json stats_json() const;
};

/// Solves l' = X(l), l(0) = x0 on a uniform grid of `grid_count` outputs over [0, t_end].
IntegralCurve integrate_vector_field(const VectorField& X, const Vec& x0, double t_end, const Chart& chart,
                                     const OdeOptions& opts = {}, int grid_count = 101);

struct LocalFlowTable {
  std::vector<double> times;                   ///< symmetric grid strictly inside (-a, a)
  std::vector<std::vector<std::optional<Vec>>> values;  ///< [point][time]
  double group_law_max = 0.0;    ///< max ||F_t(F_s(x)) - F_{s+t}(x)||^N
  double inverse_law_max = 0.0;  ///< max ||F_{-t}(F_t(x)) - x||^N
  bool identity_at_zero = true;  ///< F_0 = id exactly
  std::size_t exits = 0;         ///< (point, time) entries not reached

  nlohmann::json to_json() const;
};

/// Flow table of X on sample points for 2k+1 times j*a/(k+1), |j| <= k.
LocalFlowTable local_flow(const VectorField& X, const std::vector<Vec>& points, double a, const Chart& chart,
                          const OdeOptions& opts = {}, int k = 4);

struct FlowEnd {
  double t = 0.0;
  ExitReason reason = ExitReason::horizon;
  double bracket_lo = 0.0;  ///< blow-up: last time the solution was reached
  double bracket_hi = 0.0;  ///< blow-up: first time continuation failed
};

struct FlowDomain {
  Vec x;
  FlowEnd minus;
  FlowEnd plus;

  nlohmann::json to_json() const;
};

/// Maximal existence interval of the integral curve through x, capped at
/// +-horizon; blow-up times are bracketed to relative width 1e-6.
FlowDomain flow_domain(const VectorField& X, const Vec& x, double horizon, const Chart& chart,
                       const OdeOptions& opts = {});

}  // namespace gradedgeo
