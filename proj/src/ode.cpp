#include "gradedgeo/ode.hpp"

#include "gradedgeo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gradedgeo {

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::horizon: return "horizon";
    case ExitReason::left_domain: return "left_domain";
    case ExitReason::blow_up: return "blow_up";
    case ExitReason::max_steps: return "max_steps";
  }
  return "unknown";
}

std::string to_string(OdeMethod m) {
  switch (m) {
    case OdeMethod::adaptive_dp45: return "adaptive_dp45";
    case OdeMethod::fixed_dp5: return "fixed_dp5";
    case OdeMethod::fixed_rk4: return "fixed_rk4";
  }
  return "unknown";
}

std::vector<double> uniform_grid(double a, double b, int count) {
  if (count < 2) throw std::invalid_argument("uniform_grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double h = (b - a) / (count - 1);
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = a + h * i;
  g.back() = b;
  return g;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b*, the embedded 4th-order difference
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Step {
  Vec y;
  Vec f;    // rhs at the new point
  Vec err;  // embedded error estimate (adaptive only)
};

Step dp_step(const OdeRhs& f, double t, const Vec& y, const Vec& k1, double h, bool want_err) {
  const Vec k2 = f(t + c2 * h, y + h * (a21 * k1));
  const Vec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Vec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vec k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Step s;
  s.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  s.f = f(t + h, s.y);
  if (want_err) s.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * s.f);
  return s;
}

Step rk4_step(const OdeRhs& f, double t, const Vec& y, const Vec& k1, double h) {
  const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vec k4 = f(t + h, y + h * k3);
  Step s;
  s.y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  s.f = f(t + h, s.y);
  return s;
}

Vec hermite(double t0, const Vec& y0, const Vec& f0, double t1, const Vec& y1, const Vec& f1,
            double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * f1;
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

bool finite(const Vec& y) { return y.allFinite(); }

double initial_step(const OdeRhs& f, double t0, const Vec& y0, const Vec& f0, double span,
                    const OdeOptions& o) {
  // Hairer-Norsett-Wanner starting step heuristic.
  Vec sc = (o.atol + o.rtol * y0.cwiseAbs().array()).matrix();
  const double d0 = (y0.cwiseQuotient(sc)).norm() / std::sqrt(double(std::max<Eigen::Index>(1, y0.size())));
  const double d1 = (f0.cwiseQuotient(sc)).norm() / std::sqrt(double(std::max<Eigen::Index>(1, y0.size())));
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, std::abs(span));
  const double dir = span >= 0 ? 1.0 : -1.0;
  const Vec y1 = y0 + dir * h0 * f0;
  double d2 = std::numeric_limits<double>::quiet_NaN();
  try {
    const Vec f1 = f(t0 + dir * h0, y1);
    d2 = ((f1 - f0).cwiseQuotient(sc)).norm() / std::sqrt(double(std::max<Eigen::Index>(1, y0.size()))) / h0;
  } catch (const DomainError&) {
    // probe point outside the domain: fall back to the conservative branch
  }
  double h1;
  if (!std::isfinite(d2) || std::max(d1, d2) <= 1e-15) {
    h1 = std::max(1e-6, h0 * 1e-3);
  } else {
    h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
  }
  return std::min({100 * h0, h1, std::abs(span)});
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& f, const Vec& y0, double t0,
                        const std::vector<double>& out_times, const OdeOptions& opts,
                        const StatePredicate& inside) {
  OdeResult res;
  res.t_reached = t0;
  res.y_reached = y0;
  if (out_times.empty()) return res;
  const double t_end = out_times.back();
  const double span = t_end - t0;
  const double dir = span >= 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < out_times.size(); ++i) {
    const double prev = i == 0 ? t0 : out_times[i - 1];
    if (dir * (out_times[i] - prev) < 0) {
      throw std::invalid_argument("integrate_ode: output times must be monotone away from t0");
    }
  }
  if (inside && !inside(y0)) {
    res.reason = ExitReason::left_domain;
    return res;
  }

  const double blowup_limit = opts.blowup_norm * (1.0 + y0.cwiseAbs().maxCoeff());
  const double min_step = opts.min_step_fraction * std::abs(span);

  double t = t0;
  Vec y = y0;
  Vec fy = f(t, y);
  std::size_t next = 0;
  auto emit_outputs = [&] {
    while (next < out_times.size() && out_times[next] == t) {
      res.t.push_back(t);
      res.y.push_back(y);
      res.dy.push_back(fy);
      ++next;
    }
  };
  emit_outputs();

  const bool adaptive = opts.method == OdeMethod::adaptive_dp45;
  double h_prop = adaptive && span != 0.0 ? initial_step(f, t0, y0, fy, span, opts) : 0.0;

  // set when a rejected step had a stage outside the domain
  bool stage_left_domain = false;
  while (next < out_times.size()) {
    const double target = out_times[next];
    int fixed_n = 1;
    if (!adaptive) {
      fixed_n = std::max(1, static_cast<int>(std::ceil(std::abs(target - t) * opts.fixed_steps_per_unit - 1e-9)));
    }
    for (int k = 0; k < fixed_n || adaptive; ++k) {
      if (t == target) break;
      if (res.steps + res.rejected >= opts.max_steps) {
        res.reason = ExitReason::max_steps;
        res.t_reached = t;
        res.y_reached = y;
        return res;
      }
      double h;
      bool to_target = true;
      if (adaptive) {
        to_target = h_prop >= std::abs(target - t);
        if (!to_target && h_prop < min_step) {
          res.reason = stage_left_domain ? ExitReason::left_domain : ExitReason::blow_up;
          res.t_reached = t;
          res.y_reached = y;
          return res;
        }
        h = to_target ? target - t : dir * h_prop;
      } else {
        to_target = k + 1 == fixed_n;
        h = to_target ? target - t : (target - t) / (fixed_n - k);
      }

      Step s;
      try {
        s = opts.method == OdeMethod::fixed_rk4 ? rk4_step(f, t, y, fy, h) : dp_step(f, t, y, fy, h, adaptive);
      } catch (const DomainError&) {
        // a stage left the domain: shrink the step, or stop at the last good state
        if (adaptive && std::abs(h) > min_step) {
          ++res.rejected;
          stage_left_domain = true;
          h_prop = 0.2 * std::abs(h);
          continue;
        }
        res.reason = ExitReason::left_domain;
        res.t_reached = t;
        res.y_reached = y;
        return res;
      }
      if (adaptive) {
        const double en = finite(s.y) && finite(s.err) ? error_norm(s.err, y, s.y, opts.rtol, opts.atol)
                                                         : std::numeric_limits<double>::infinity();
        if (!(en <= 1.0)) {
          ++res.rejected;
          const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
          h_prop = std::abs(h) * fac;
          continue;
        }
        const double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        // a step clipped to an output time says little about the natural step size
        if (!to_target || fac < 1.0) h_prop = std::abs(h) * fac;
      }
      ++res.steps;
      stage_left_domain = false;

      const double t_new = to_target ? target : t + h;
      if (!finite(s.y) || s.y.cwiseAbs().maxCoeff() > blowup_limit) {
        res.reason = ExitReason::blow_up;
        res.t_reached = t;
        res.y_reached = y;
        return res;
      }
      if (inside && !inside(s.y)) {
        // locate the crossing on the step interpolant
        double lo = t, hi = t_new;
        Vec ylo = y;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          const Vec ym = hermite(t, y, fy, t_new, s.y, s.f, mid);
          if (inside(ym)) {
            lo = mid;
            ylo = ym;
          } else {
            hi = mid;
          }
        }
        res.reason = ExitReason::left_domain;
        res.t_reached = lo;
        res.y_reached = ylo;
        return res;
      }
      t = t_new;
      y = std::move(s.y);
      fy = std::move(s.f);
    }
    emit_outputs();
  }
  res.reason = ExitReason::horizon;
  res.t_reached = t;
  res.y_reached = y;
  return res;
}

}  // namespace gradedgeo
