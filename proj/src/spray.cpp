#include "gradedgeo/spray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "gradedgeo/parallel.hpp"

namespace gradedgeo {

Spray::Spray(Chart chart, CoeffFn coefficients, Provenance provenance, int level, std::string name)
    : chart_(std::move(chart)),
      coeffs_(std::move(coefficients)),
      provenance_(provenance),
      level_(level),
      name_(std::move(name)) {}

Spray Spray::zero(Chart chart) {
  const int d = chart.dim();
  return Spray(
      std::move(chart), [d](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(d), Mat::Zero(d, d)); },
      Provenance::zero, 0, "zero");
}

std::vector<Mat> Spray::coefficients(const Vec& x) const { return coeffs_(x); }

Vec Spray::operator()(const Vec& x, const Vec& u, const Vec& v) const {
  const auto c = coeffs_(x);
  Vec out(dim());
  for (int k = 0; k < dim(); ++k) out(k) = u.dot(c[static_cast<std::size_t>(k)] * v);
  return out;
}

Vec Spray::quadratic(const Vec& x, const Vec& v) const { return (*this)(x, v, v); }

Spray Spray::scaled(double factor) const {
  auto inner = coeffs_;
  return Spray(
      chart_,
      [inner, factor](const Vec& x) {
        auto c = inner(x);
        for (auto& m : c) m *= factor;
        return c;
      },
      Provenance::catalog, level_, name_ + "*" + std::to_string(factor));
}

std::string to_string(Spray::Provenance p) {
  switch (p) {
    case Spray::Provenance::from_metric: return "from_metric";
    case Spray::Provenance::catalog: return "catalog";
    case Spray::Provenance::zero: return "zero";
  }
  return "unknown";
}

namespace {

std::string point_string(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x(i);
  os << ')';
  return os.str();
}

}  // namespace

Spray spray_from_metric(const LevelMetricFamily& family, int n) {
  if (n < 1 || n > family.levels()) throw DimensionError("spray_from_metric: level out of range");
  const int d = family.dim();
  auto coeffs = [family, n, d](const Vec& x) {
    const auto p = family.gram_partials(n, x);
    std::vector<Mat> c(static_cast<std::size_t>(d), Mat::Zero(d, d));
    bool flat = true;
    for (const auto& m : p) flat = flat && m.isZero(0.0);
    if (flat) return c;
    const Mat g = family.gram(n, x);
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success || min_eigenvalue(g) <= 0.0) {
      throw NumericalError("singular_gram", "G_" + std::to_string(n) + " is singular at " + point_string(x));
    }
    const Mat ginv = llt.solve(Mat::Identity(d, d));
    // first-kind symbols T_l(i, j) = d_i G_lj + d_j G_li - d_l G_ij
    std::vector<Mat> t(static_cast<std::size_t>(d), Mat(d, d));
    for (int l = 0; l < d; ++l) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          t[static_cast<std::size_t>(l)](i, j) = p[static_cast<std::size_t>(i)](l, j) +
                                                 p[static_cast<std::size_t>(j)](l, i) -
                                                 p[static_cast<std::size_t>(l)](i, j);
        }
      }
    }
    for (int k = 0; k < d; ++k) {
      Mat& ck = c[static_cast<std::size_t>(k)];
      for (int l = 0; l < d; ++l) ck -= 0.5 * ginv(k, l) * t[static_cast<std::size_t>(l)];
    }
    return c;
  };
  return Spray(family.chart(), coeffs, Spray::Provenance::from_metric, n,
               family.name() + ":level" + std::to_string(n));
}

CurvePath GeodesicSolution::path() const {
  if (t.size() < 2) throw std::runtime_error("geodesic solution has fewer than two output points");
  if (t.back() >= t.front()) return CurvePath(t, x, v);
  return CurvePath(std::vector<double>(t.rbegin(), t.rend()), std::vector<Vec>(x.rbegin(), x.rend()),
                   std::vector<Vec>(v.rbegin(), v.rend()));
}

nlohmann::json GeodesicSolution::stats_json() const {
  return {{"exit_reason", to_string(reason)},
          {"t_reached", t_reached},
          {"steps", steps},
          {"rejected", rejected},
          {"outputs", t.size()}};
}

namespace {

OdeResult run_geodesic(const Spray& spray, const Vec& x0, const Vec& v0, const std::vector<double>& times,
                       const OdeOptions& opts) {
  const int d = spray.dim();
  Vec y0(2 * d);
  y0 << x0, v0;
  auto rhs = [&](double, const Vec& y) {
    Vec dy(2 * d);
    dy.head(d) = y.tail(d);
    dy.tail(d) = spray.quadratic(y.head(d), y.tail(d));
    return dy;
  };
  auto inside = [&](const Vec& y) { return spray.domain().contains(y.head(d)); };
  return integrate_ode(rhs, y0, 0.0, times, opts, inside);
}

}  // namespace

GeodesicSolution integrate_geodesic(const Spray& spray, const Vec& x0, const Vec& v0, double t_end,
                                    const OdeOptions& opts, int grid_count) {
  spray.domain().require(x0, "integrate_geodesic");
  require_dim(v0, spray.dim(), "integrate_geodesic v0");
  const int d = spray.dim();
  const auto r = run_geodesic(spray, x0, v0, uniform_grid(0.0, t_end, std::max(2, grid_count)), opts);
  GeodesicSolution s;
  s.x0 = x0;
  s.v0 = v0;
  s.t = r.t;
  for (const auto& y : r.y) {
    s.x.push_back(y.head(d));
    s.v.push_back(y.tail(d));
  }
  s.reason = r.reason;
  s.t_reached = r.t_reached;
  s.x_reached = r.y_reached.head(d);
  s.v_reached = r.y_reached.tail(d);
  s.steps = r.steps;
  s.rejected = r.rejected;
  return s;
}

GeodesicState geodesic_state(const Spray& spray, const Vec& x, const Vec& v, double t, const OdeOptions& opts) {
  spray.domain().require(x, "geodesic_state");
  require_dim(v, spray.dim(), "geodesic_state v");
  if (t == 0.0) return {x, v};
  const int d = spray.dim();
  const auto r = run_geodesic(spray, x, v, {t}, opts);
  if (!r.completed()) {
    throw NumericalError("domain_exit", "geodesic stopped at t=" + std::to_string(r.t_reached) + " (" +
                                            to_string(r.reason) + ") before t=" + std::to_string(t));
  }
  return {r.y.back().head(d), r.y.back().tail(d)};
}

OdeOptions fixed_mesh_options(double steps_per_unit) {
  OdeOptions o;
  o.method = OdeMethod::fixed_dp5;
  o.fixed_steps_per_unit = steps_per_unit;
  return o;
}

Vec exp_map(const Spray& spray, const Vec& x, const Vec& v, const OdeOptions& opts) {
  return geodesic_state(spray, x, v, 1.0, opts).x;
}

Mat exp_jacobian(const Spray& spray, const Vec& x, const Vec& v, const OdeOptions& opts, double step) {
  const int d = spray.dim();
  const double s = step > 0.0 ? step : std::cbrt(std::numeric_limits<double>::epsilon()) *
                                           (1.0 + spray.chart().top_norm(v));
  Mat J(d, d);
  for (int k = 0; k < d; ++k) {
    Vec e = Vec::Zero(d);
    e(k) = s;
    J.col(k) = (exp_map(spray, x, v + e, opts) - exp_map(spray, x, v - e, opts)) / (2.0 * s);
  }
  return J;
}

HomogeneityError check_homogeneity(const Spray& spray, const Vec& x, const Vec& v, double s, double t,
                                   const OdeOptions& opts) {
  const auto scaled = geodesic_state(spray, x, s * v, t, opts);
  const auto base = geodesic_state(spray, x, v, s * t, opts);
  HomogeneityError e;
  e.position = spray.chart().top_norm(scaled.x - base.x);
  e.velocity = spray.chart().top_norm(scaled.v - s * base.v);
  return e;
}

nlohmann::json ShootingReport::to_json() const {
  return {{"v", to_std(v)},
          {"converged", converged},
          {"iterations", iterations},
          {"residuals", residuals},
          {"jacobian_condition", jacobian_condition},
          {"conjugate_warning", conjugate_warning},
          {"failure", failure}};
}

ShootingReport connect(const Spray& spray, const Vec& x, const Vec& y, const std::optional<Vec>& v_init,
                       const ShootingOptions& opts) {
  spray.domain().require(x, "connect x");
  spray.domain().require(y, "connect y");
  const auto& chart = spray.chart();
  ShootingReport rep;
  rep.v = v_init ? *v_init : Vec(y - x);
  require_dim(rep.v, spray.dim(), "connect v_init");

  auto residual = [&](const Vec& v) -> std::optional<Vec> {
    try {
      return Vec(exp_map(spray, x, v, opts.ode) - y);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  };
  auto r = residual(rep.v);
  if (!r) {
    rep.failure = "initial_guess_leaves_domain";
    return rep;
  }
  double rn = chart.top_norm(*r);
  rep.residuals.push_back(rn);
  for (int it = 0; it < opts.max_iter && rn > opts.tol; ++it) {
    rep.iterations = it + 1;
    Mat J;
    try {
      J = exp_jacobian(spray, x, rep.v, opts.ode);
    } catch (const NumericalError&) {
      rep.failure = "jacobian_stencil_leaves_domain";
      return rep;
    }
    rep.jacobian_condition = condition_number(J);
    if (!(rep.jacobian_condition < opts.singular_condition)) {
      rep.conjugate_warning = true;
      rep.failure = "singular_jacobian";
      return rep;
    }
    const Vec delta = J.colPivHouseholderQr().solve(-*r);
    bool accepted = false;
    for (double lam = 1.0; lam >= opts.damping_floor; lam *= 0.5) {
      const Vec trial = rep.v + lam * delta;
      const auto rt = residual(trial);
      if (!rt) continue;
      const double tn = chart.top_norm(*rt);
      if (tn <= (1.0 - opts.armijo * lam) * rn) {
        rep.v = trial;
        r = rt;
        rn = tn;
        accepted = true;
        break;
      }
    }
    rep.residuals.push_back(rn);
    if (!accepted) {
      rep.failure = "line_search_failed";
      return rep;
    }
  }
  rep.converged = rn <= opts.tol;
  if (!rep.converged) {
    rep.failure = "max_iter";
    return rep;
  }
  try {
    rep.jacobian_condition = condition_number(exp_jacobian(spray, x, rep.v, opts.ode));
    rep.conjugate_warning = !(rep.jacobian_condition < opts.singular_condition);
  } catch (const NumericalError&) {
    rep.jacobian_condition = std::numeric_limits<double>::infinity();
  }
  return rep;
}

nlohmann::json InjectivityEstimate::to_json() const {
  return {{"radius", radius},
          {"bracket", {lo, hi}},
          {"certificate", certificate},
          {"directions", directions},
          {"skipped_directions", skipped_directions}};
}

InjectivityEstimate injectivity_radius_estimate(const Spray& spray, const LevelMetricFamily& family, const Vec& x,
                                                double r_max, int samples, const InjectivityOptions& opts) {
  if (!(r_max > 0.0)) throw std::invalid_argument("injectivity_radius_estimate: r_max must be positive");
  if (samples < 1) throw std::invalid_argument("injectivity_radius_estimate: samples must be positive");
  spray.domain().require(x, "injectivity_radius_estimate");
  const int d = spray.dim();
  const int top = family.levels();

  std::vector<Vec> dirs;
  std::mt19937_64 rng(opts.seed);
  if (d == 1) {
    dirs = {Vec::Ones(1), -Vec::Ones(1)};
  } else if (d == 2) {
    const double offset = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (int i = 0; i < samples; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + offset) / samples;
      dirs.push_back((Vec(2) << std::cos(a), std::sin(a)).finished());
    }
  } else {
    std::normal_distribution<double> g;
    for (int i = 0; i < samples; ++i) {
      Vec u(d);
      for (int k = 0; k < d; ++k) u(k) = g(rng);
      dirs.push_back(u / u.norm());
    }
  }
  for (auto& u : dirs) u /= family.norm(top, x, u);

  struct Probe {
    std::string failure;
    int skipped = 0;
  };
  auto probe = [&](double r) {
    const std::size_t n = dirs.size();
    std::vector<std::optional<Vec>> ends(n);
    std::vector<std::string> fail(n);
    parallel_for(n, [&](std::size_t i) {
      const Vec v = r * dirs[i];
      try {
        ends[i] = exp_map(spray, x, v, opts.ode);
        const Mat J = exp_jacobian(spray, x, v, opts.ode);
        // J(0) = I, so a non-positive determinant means a conjugate point was crossed
        if (!(J.determinant() > 0.0) || !(condition_number(J) <= opts.condition_threshold)) fail[i] = "conjugate";
      } catch (const NumericalError&) {
        ends[i].reset();
      }
    });
    Probe p;
    for (std::size_t i = 0; i < n; ++i) {
      if (!ends[i]) ++p.skipped;
      if (p.failure.empty() && !fail[i].empty()) p.failure = fail[i];
    }
    if (p.failure.empty()) {
      for (std::size_t i = 0; i < n && p.failure.empty(); ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (ends[i] && ends[j] && spray.chart().top_norm(*ends[i] - *ends[j]) < opts.collision_distance) {
            p.failure = "collision";
            break;
          }
        }
      }
    }
    return p;
  };

  InjectivityEstimate est;
  est.directions = static_cast<int>(dirs.size());
  const Probe at_max = probe(r_max);
  if (at_max.failure.empty()) {
    est.radius = est.lo = est.hi = r_max;
    est.skipped_directions = at_max.skipped;
    return est;
  }
  double lo = 0.0, hi = r_max;
  Probe at_hi = at_max;
  for (int it = 0; it < opts.bisection_steps && hi - lo > opts.relative_width * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    Probe p = probe(mid);
    if (p.failure.empty()) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = std::move(p);
    }
  }
  est.lo = lo;
  est.hi = hi;
  est.radius = 0.5 * (lo + hi);
  est.certificate = at_hi.failure;
  est.skipped_directions = at_hi.skipped;
  return est;
}

double geodesic_equation_residual(const Spray& spray, const GeodesicSolution& sol) {
  const std::size_t n = sol.t.size();
  if (n < 5) return 0.0;
  const double h = sol.t[1] - sol.t[0];
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const Vec acc = (-sol.v[i + 2] + 8.0 * sol.v[i + 1] - 8.0 * sol.v[i - 1] + sol.v[i - 2]) / (12.0 * h);
    worst = std::max(worst, (acc - spray.quadratic(sol.x[i], sol.v[i])).norm());
  }
  return worst;
}

}  // namespace gradedgeo
