#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gradedgeo/linalg.hpp"

namespace gradedgeo {

enum class OdeMethod {
  adaptive_dp45,  ///< embedded Dormand-Prince 5(4), error-controlled
  fixed_dp5,      ///< Dormand-Prince 5th-order stages on a uniform mesh
  fixed_rk4,      ///< classical RK4 on a uniform mesh (bit-reproducible fallback)
};

enum class ExitReason { horizon, left_domain, blow_up, max_steps };

std::string to_string(ExitReason r);
std::string to_string(OdeMethod m);

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  OdeMethod method = OdeMethod::adaptive_dp45;
  /// Fixed methods: steps per unit time; every output interval gets at least one.
  double fixed_steps_per_unit = 256.0;
  std::size_t max_steps = 5'000'000;
  /// Blow-up when |y|_inf exceeds this multiple of (1 + |y0|_inf).
  double blowup_norm = 1e12;
  /// Blow-up when the adaptive step falls below this fraction of |t_end - t0|.
  double min_step_fraction = 1e-13;
};

using OdeRhs = std::function<Vec(double t, const Vec& y)>;
using StatePredicate = std::function<bool(const Vec& y)>;

struct OdeResult {
  std::vector<double> t;   ///< output times actually reached
  std::vector<Vec> y;
  std::vector<Vec> dy;     ///< rhs at the outputs (for Hermite interpolation)
  ExitReason reason = ExitReason::horizon;
  double t_reached = 0.0;  ///< time of the last valid state (exit time on early stop)
  Vec y_reached;
  std::size_t steps = 0;
  std::size_t rejected = 0;

  bool completed() const { return reason == ExitReason::horizon; }
};

/// Integrates y' = f(t, y) from (t0, y0) through the monotone list of output
/// times (all on the same side of t0; the last one is the end time). Steps
/// never straddle an output time. `inside`, when given, is checked after each
/// step; a crossing is located on the step's Hermite interpolant.
OdeResult integrate_ode(const OdeRhs& f, const Vec& y0, double t0,
                        const std::vector<double>& out_times, const OdeOptions& opts,
                        const StatePredicate& inside = {});

/// Uniform grid of `count` points from a to b inclusive (count >= 2).
std::vector<double> uniform_grid(double a, double b, int count);

}  // namespace gradedgeo
