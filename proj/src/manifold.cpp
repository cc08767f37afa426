#include "gradedgeo/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gradedgeo/parallel.hpp"

namespace gradedgeo {

ChartDomain ChartDomain::whole(int dim) {
  ChartDomain d;
  d.kind_ = Kind::whole;
  d.dim_ = dim;
  return d;
}

ChartDomain ChartDomain::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw DimensionError("box bounds differ in dimension");
  if (!(lo.array() < hi.array()).all()) throw std::invalid_argument("box is empty");
  ChartDomain d;
  d.kind_ = Kind::box;
  d.dim_ = static_cast<int>(lo.size());
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

ChartDomain ChartDomain::ball(Vec center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  ChartDomain d;
  d.kind_ = Kind::ball;
  d.dim_ = static_cast<int>(center.size());
  d.lo_ = std::move(center);
  d.radius_ = radius;
  return d;
}

ChartDomain ChartDomain::spd_cone(int m, double floor) {
  ChartDomain d;
  d.kind_ = Kind::spd_cone;
  d.dim_ = spd_dim(m);
  d.m_ = m;
  d.floor_ = floor;
  return d;
}

bool ChartDomain::contains(const Vec& x) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  switch (kind_) {
    case Kind::whole: return true;
    case Kind::box: return (x.array() > lo_.array()).all() && (x.array() < hi_.array()).all();
    case Kind::ball: return (x - lo_).norm() < radius_;
    case Kind::spd_cone: return min_eigenvalue(sym_from_coords(x, m_)) > floor_;
  }
  return false;
}

bool ChartDomain::contains_ball(const Vec& x0, double r) const {
  if (!contains(x0)) return false;
  switch (kind_) {
    case Kind::whole: return true;
    case Kind::box: return ((x0.array() - r) > lo_.array()).all() && ((x0.array() + r) < hi_.array()).all();
    case Kind::ball: return (x0 - lo_).norm() + r < radius_;
    // spectral norm of a coordinate perturbation is at most sqrt(2) times its length
    case Kind::spd_cone: return min_eigenvalue(sym_from_coords(x0, m_)) - std::sqrt(2.0) * r > floor_;
  }
  return false;
}

void ChartDomain::require(const Vec& x, const char* what) const {
  require_dim(x, dim_, what);
  if (!contains(x)) throw DomainError(std::string(what) + ": point outside chart domain");
}

Vec ChartDomain::reference_point() const {
  switch (kind_) {
    case Kind::whole: return Vec::Zero(dim_);
    case Kind::box: return 0.5 * (lo_ + hi_);
    case Kind::ball: return lo_;
    case Kind::spd_cone: return coords_from_sym(Mat::Identity(m_, m_));
  }
  return Vec::Zero(dim_);
}

double ChartDomain::typical_scale() const {
  switch (kind_) {
    case Kind::whole: return 1.0;
    case Kind::box: return 0.5 * (hi_ - lo_).minCoeff();
    case Kind::ball: return radius_;
    case Kind::spd_cone: return 0.5;
  }
  return 1.0;
}

nlohmann::json ChartDomain::to_json() const {
  switch (kind_) {
    case Kind::whole: return {{"kind", "whole"}, {"dim", dim_}};
    case Kind::box: return {{"kind", "box"}, {"lo", to_std(lo_)}, {"hi", to_std(hi_)}};
    case Kind::ball: return {{"kind", "ball"}, {"center", to_std(lo_)}, {"radius", radius_}};
    case Kind::spd_cone: return {{"kind", "spd_cone"}, {"m", m_}, {"floor", floor_}};
  }
  return {};
}

double Chart::fd_step(const Vec& x) const {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + top_norm(x));
}

namespace {

double pick_step(const Chart& chart, const Vec& x, double step) {
  return step > 0.0 ? step : chart.fd_step(x);
}

}  // namespace

DirectionalDerivative<double> directional_derivative(const ScalarField& f, const Vec& x, const Vec& h,
                                                     const Chart& chart, double step) {
  require_dim(h, chart.dim(), "directional_derivative direction");
  const double s = pick_step(chart, x, step);
  const Vec xp = x + s * h, xm = x - s * h;
  chart.domain.require(x, "directional_derivative");
  chart.domain.require(xp, "directional_derivative (x + step h)");
  chart.domain.require(xm, "directional_derivative (x - step h)");
  DirectionalDerivative<double> d;
  d.fd_value = (f(xp) - f(xm)) / (2.0 * s);
  if (f.gradient) {
    d.value = f.gradient(x).dot(h);
    d.analytic = true;
  } else {
    d.value = d.fd_value;
  }
  return d;
}

DirectionalDerivative<Vec> directional_derivative(const VectorField& f, const Vec& x, const Vec& h,
                                                  const Chart& chart, double step) {
  require_dim(h, chart.dim(), "directional_derivative direction");
  const double s = pick_step(chart, x, step);
  const Vec xp = x + s * h, xm = x - s * h;
  chart.domain.require(x, "directional_derivative");
  chart.domain.require(xp, "directional_derivative (x + step h)");
  chart.domain.require(xm, "directional_derivative (x - step h)");
  DirectionalDerivative<Vec> d;
  d.fd_value = (f(xp) - f(xm)) / (2.0 * s);
  if (f.has_jacobian()) {
    d.value = f.jacobian(x) * h;
    d.analytic = true;
  } else {
    d.value = d.fd_value;
  }
  return d;
}

Mat field_jacobian(const VectorField& X, const Vec& x, const Chart& chart) {
  chart.domain.require(x, "field_jacobian");
  if (X.has_jacobian()) return X.jacobian(x);
  const int d = chart.dim();
  const double s = chart.fd_step(x);
  Mat J(X(x).size(), d);
  for (int k = 0; k < d; ++k) {
    Vec e = Vec::Zero(d);
    e(k) = 1.0;
    const Vec xp = x + s * e, xm = x - s * e;
    if (!chart.domain.contains(xp) || !chart.domain.contains(xm)) {
      throw DomainError("field_jacobian: difference stencil leaves the chart domain");
    }
    J.col(k) = (X(xp) - X(xm)) / (2.0 * s);
  }
  return J;
}

Vec lie_bracket(const VectorField& X, const VectorField& Y, const Vec& x, const Chart& chart) {
  chart.domain.require(x, "lie_bracket");
  return field_jacobian(X, x, chart) * Y(x) - field_jacobian(Y, x, chart) * X(x);
}

CurvePath IntegralCurve::path() const {
  if (t.size() < 2) throw std::runtime_error("integral curve has fewer than two output points");
  if (t.back() >= t.front()) return CurvePath(t, x, v);
  return CurvePath(std::vector<double>(t.rbegin(), t.rend()), std::vector<Vec>(x.rbegin(), x.rend()),
                   std::vector<Vec>(v.rbegin(), v.rend()));
}

nlohmann::json IntegralCurve::stats_json() const {
  return {{"exit_reason", to_string(reason)},
          {"t_reached", t_reached},
          {"steps", steps},
          {"rejected", rejected},
          {"outputs", t.size()}};
}

IntegralCurve integrate_vector_field(const VectorField& X, const Vec& x0, double t_end, const Chart& chart,
                                     const OdeOptions& opts, int grid_count) {
  chart.domain.require(x0, "integrate_vector_field");
  const auto grid = uniform_grid(0.0, t_end, std::max(2, grid_count));
  const auto res = integrate_ode([&](double, const Vec& y) { return X(y); }, x0, 0.0, grid, opts,
                                 [&](const Vec& y) { return chart.domain.contains(y); });
  IntegralCurve c;
  c.t = res.t;
  c.x = res.y;
  c.v = res.dy;
  c.reason = res.reason;
  c.t_reached = res.t_reached;
  c.x_reached = res.y_reached;
  c.steps = res.steps;
  c.rejected = res.rejected;
  return c;
}

nlohmann::json LocalFlowTable::to_json() const {
  return {{"times", times},
          {"group_law_max", group_law_max},
          {"inverse_law_max", inverse_law_max},
          {"identity_at_zero", identity_at_zero},
          {"exits", exits}};
}

LocalFlowTable local_flow(const VectorField& X, const std::vector<Vec>& points, double a, const Chart& chart,
                          const OdeOptions& opts, int k) {
  if (!(a > 0.0)) throw std::invalid_argument("local_flow: a must be positive");
  LocalFlowTable table;
  const double dt = a / (k + 1);
  for (int j = -k; j <= k; ++j) table.times.push_back(j * dt);
  const std::size_t nt = table.times.size();
  const auto zero = static_cast<std::size_t>(k);
  auto rhs = [&](double, const Vec& y) { return X(y); };
  auto inside = [&](const Vec& y) { return chart.domain.contains(y); };

  // values at times j*dt for j = 0..k (forward) and 0..-k (backward) from start
  auto flow_from = [&](const Vec& start, std::vector<std::optional<Vec>>& out) {
    out.assign(2 * static_cast<std::size_t>(k) + 1, std::nullopt);
    out[zero] = start;
    for (int sgn : {1, -1}) {
      std::vector<double> ts;
      for (int j = 1; j <= k; ++j) ts.push_back(sgn * j * dt);
      const auto r = integrate_ode(rhs, start, 0.0, ts, opts, inside);
      for (std::size_t i = 0; i < r.t.size(); ++i) {
        out[static_cast<std::size_t>(static_cast<int>(zero) + sgn * static_cast<int>(i + 1))] = r.y[i];
      }
    }
  };

  table.values.resize(points.size());
  std::vector<double> group(points.size(), 0.0), inverse(points.size(), 0.0);
  std::vector<std::size_t> exits(points.size(), 0);
  std::vector<char> ident(points.size(), 1);
  parallel_for(points.size(), [&](std::size_t p) {
    chart.domain.require(points[p], "local_flow");
    auto& row = table.values[p];
    flow_from(points[p], row);
    if (!(row[zero].has_value() && *row[zero] == points[p])) ident[p] = 0;
    for (const auto& v : row) exits[p] += v.has_value() ? 0 : 1;
    for (std::size_t s = 0; s < nt; ++s) {
      if (!row[s]) continue;
      std::vector<std::optional<Vec>> second;
      flow_from(*row[s], second);
      const int js = static_cast<int>(s) - k;
      for (std::size_t t = 0; t < second.size(); ++t) {
        const int jt = static_cast<int>(t) - k;
        const int jsum = js + jt;
        if (std::abs(jsum) > k || !second[t]) continue;
        const auto& direct = row[static_cast<std::size_t>(jsum + k)];
        if (!direct) continue;
        const double err = chart.top_norm(*second[t] - *direct);
        group[p] = std::max(group[p], err);
        if (jsum == 0) inverse[p] = std::max(inverse[p], err);
      }
    }
  });
  for (std::size_t p = 0; p < points.size(); ++p) {
    table.group_law_max = std::max(table.group_law_max, group[p]);
    table.inverse_law_max = std::max(table.inverse_law_max, inverse[p]);
    table.identity_at_zero = table.identity_at_zero && ident[p];
    table.exits += exits[p];
  }
  return table;
}

nlohmann::json FlowDomain::to_json() const {
  auto end = [](const FlowEnd& e) {
    return nlohmann::json{{"t", e.t},
                          {"exit_reason", to_string(e.reason)},
                          {"bracket", {e.bracket_lo, e.bracket_hi}}};
  };
  return {{"x", to_std(x)}, {"t_minus", end(minus)}, {"t_plus", end(plus)}};
}

FlowDomain flow_domain(const VectorField& X, const Vec& x, double horizon, const Chart& chart,
                       const OdeOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("flow_domain: horizon must be positive");
  chart.domain.require(x, "flow_domain");
  auto rhs = [&](double, const Vec& y) { return X(y); };
  auto inside = [&](const Vec& y) { return chart.domain.contains(y); };
  FlowDomain fd;
  fd.x = x;
  for (int sgn : {1, -1}) {
    FlowEnd e;
    const double target = sgn * horizon;
    const auto r = integrate_ode(rhs, x, 0.0, {target}, opts, inside);
    e.reason = r.reason;
    e.t = r.reason == ExitReason::horizon ? target : r.t_reached;
    if (r.reason == ExitReason::blow_up) {
      // bisection on the end time: a run that completes certifies existence up to it
      double lo = std::abs(r.t_reached), hi = horizon;
      while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        const auto rm = integrate_ode(rhs, x, 0.0, {sgn * mid}, opts, inside);
        if (rm.completed()) {
          lo = mid;
        } else {
          hi = mid;
          lo = std::max(lo, std::abs(rm.t_reached));
        }
      }
      e.bracket_lo = sgn * lo;
      e.bracket_hi = sgn * hi;
      e.t = sgn * 0.5 * (lo + hi);
    } else {
      e.bracket_lo = e.bracket_hi = e.t;
    }
    (sgn > 0 ? fd.plus : fd.minus) = e;
  }
  return fd;
}

}  // namespace gradedgeo
