#include "gradedgeo/variational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>

#include "gradedgeo/parallel.hpp"

namespace gradedgeo {

namespace {

// 5-point Gauss-Legendre rule on [-1, 1]
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

template <typename F>
double integrate_segments(const CurvePath& curve, F&& integrand) {
  const auto& t = curve.times();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double mid = 0.5 * (t[i] + t[i + 1]);
    const double half = 0.5 * (t[i + 1] - t[i]);
    double seg = 0.0;
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) seg += kGlWeights[q] * integrand(mid + half * kGlNodes[q]);
    total += half * seg;
  }
  return total;
}

}  // namespace

double length_n(const LevelMetricFamily& family, int n, const CurvePath& curve) {
  return integrate_segments(curve,
                            [&](double s) { return family.norm(n, curve.position(s), curve.velocity(s)); });
}

double energy_n(const LevelMetricFamily& family, int n, const CurvePath& curve) {
  return 0.5 * integrate_segments(curve, [&](double s) {
           const Vec v = curve.velocity(s);
           return family.product(n, curve.position(s), v, v);
         });
}

CurvePath straight_segment(const Vec& x, const Vec& y, int nodes) {
  const Vec d = y - x;
  return CurvePath::sample(
      uniform_grid(0.0, 1.0, std::max(2, nodes)), [&](double t) { return Vec(x + t * d); },
      [&](double) { return d; });
}

nlohmann::json LevelDistance::to_json() const {
  return {{"level", level}, {"value", value}, {"method", method}, {"certified", certified}, {"status", status}};
}

namespace {

// Dijkstra over a lattice covering the bounding box of x and y (padded),
// with straight edges between neighboring lattice nodes; all chart domains
// are convex, so the direct edge x -> y is always admissible.
double polygonal_upper_bound(const LevelMetricFamily& family, int n, const Vec& x, const Vec& y,
                             const DistanceOptions& opts) {
  const int d = family.dim();
  const ChartDomain& dom = family.domain();
  auto edge = [&](const Vec& a, const Vec& b) { return length_n(family, n, straight_segment(a, b, 3)); };
  double best = edge(x, y);
  if (d > 3) return best;

  int cells = opts.fallback_cells;
  while (cells > 1 && std::pow(cells + 1, d) > opts.fallback_max_nodes) --cells;
  const double pad = 0.5 * (y - x).norm() + 1e-3;
  const Vec lo = x.cwiseMin(y).array() - pad;
  const Vec hi = x.cwiseMax(y).array() + pad;
  const Vec h = (hi - lo) / cells;

  int total = 1;
  for (int k = 0; k < d; ++k) total *= cells + 1;
  std::vector<Vec> pts(static_cast<std::size_t>(total) + 2);
  std::vector<bool> ok(pts.size(), false);
  auto index_to_point = [&](int idx) {
    Vec p(d);
    for (int k = 0; k < d; ++k) {
      p(k) = lo(k) + h(k) * (idx % (cells + 1));
      idx /= cells + 1;
    }
    return p;
  };
  for (int i = 0; i < total; ++i) {
    pts[static_cast<std::size_t>(i)] = index_to_point(i);
    ok[static_cast<std::size_t>(i)] = dom.contains(pts[static_cast<std::size_t>(i)]);
  }
  const int ix = total, iy = total + 1;
  pts[static_cast<std::size_t>(ix)] = x;
  pts[static_cast<std::size_t>(iy)] = y;
  ok[static_cast<std::size_t>(ix)] = ok[static_cast<std::size_t>(iy)] = true;

  auto neighbors = [&](int i) {
    std::vector<int> out;
    if (i >= total) {
      // x and y attach to the lattice nodes of their cell neighborhood
      const Vec& p = pts[static_cast<std::size_t>(i)];
      for (int j = 0; j < total; ++j) {
        if (((pts[static_cast<std::size_t>(j)] - p).array().abs() <= 1.5 * h.array()).all()) out.push_back(j);
      }
      out.push_back(i == ix ? iy : ix);
      return out;
    }
    std::vector<int> coord(static_cast<std::size_t>(d));
    int rest = i;
    for (int k = 0; k < d; ++k) {
      coord[static_cast<std::size_t>(k)] = rest % (cells + 1);
      rest /= cells + 1;
    }
    int combos = 1;
    for (int k = 0; k < d; ++k) combos *= 3;
    for (int c = 0; c < combos; ++c) {
      int code = c, j = 0, stride = 1;
      bool valid = true, self = true;
      for (int k = 0; k < d; ++k) {
        const int off = code % 3 - 1;
        code /= 3;
        const int ck = coord[static_cast<std::size_t>(k)] + off;
        if (ck < 0 || ck > cells) valid = false;
        if (off != 0) self = false;
        j += ck * stride;
        stride *= cells + 1;
      }
      if (valid && !self) out.push_back(j);
    }
    for (int e : {ix, iy}) {
      if (((pts[static_cast<std::size_t>(e)] - pts[static_cast<std::size_t>(i)]).array().abs() <= 1.5 * h.array())
              .all()) {
        out.push_back(e);
      }
    }
    return out;
  };

  std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(ix)] = 0.0;
  queue.push({0.0, ix});
  while (!queue.empty()) {
    const auto [du, u] = queue.top();
    queue.pop();
    if (du > dist[static_cast<std::size_t>(u)]) continue;
    if (u == iy) break;
    for (int v : neighbors(u)) {
      if (!ok[static_cast<std::size_t>(v)]) continue;
      const double nd = du + edge(pts[static_cast<std::size_t>(u)], pts[static_cast<std::size_t>(v)]);
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        queue.push({nd, v});
      }
    }
  }
  return std::min(best, dist[static_cast<std::size_t>(iy)]);
}

}  // namespace

namespace {

// Shooting result shared by all levels: the connecting geodesic depends only on the spray.
struct Connection {
  ShootingReport shot;
  std::optional<CurvePath> path;
};

Connection connect_points(const Spray& spray, const Vec& x, const Vec& y, const DistanceOptions& opts) {
  Connection c{connect(spray, x, y, std::nullopt, opts.shooting), std::nullopt};
  if (c.shot.converged) {
    const auto sol = integrate_geodesic(spray, x, c.shot.v, 1.0, opts.shooting.ode, opts.geodesic_nodes);
    if (sol.completed()) c.path = sol.path();
  }
  return c;
}

LevelDistance level_distance(const LevelMetricFamily& family, const Spray& spray, int n, const Vec& x,
                             const Vec& y, const Connection& c, const DistanceOptions& opts) {
  LevelDistance out;
  out.level = n;
  if (x == y) {
    out.method = "geodesic";
    out.certified = true;
    out.status = "identical points";
    return out;
  }
  const bool compatible = family.structure() == LevelMetricFamily::Structure::scalar_scaled ||
                          spray.provenance() == Spray::Provenance::zero || spray.level() == n;
  if (c.path) {
    out.value = length_n(family, n, *c.path);
    out.method = "geodesic";
    out.certified = compatible && !c.shot.conjugate_warning;
    out.status = out.certified ? "converged" : (compatible ? "conjugate warning" : "spray of another level");
    return out;
  }
  if (!opts.allow_fallback) {
    throw NumericalError("no_certificate", "distance_n: shooting failed (" + c.shot.failure + ")");
  }
  const double bound = polygonal_upper_bound(family, n, x, y, opts);
  if (!std::isfinite(bound)) {
    throw NumericalError("no_certificate", "distance_n: shooting and polygonal fallback both failed");
  }
  out.value = bound;
  out.method = "polygonal-upper-bound";
  out.certified = false;
  out.status = "shooting failed: " + c.shot.failure;
  return out;
}

}  // namespace

LevelDistance distance_n(const LevelMetricFamily& family, const Spray& spray, int n, const Vec& x, const Vec& y,
                         const DistanceOptions& opts) {
  if (n < 1 || n > family.levels()) throw DimensionError("distance_n: level out of range");
  family.domain().require(x, "distance_n x");
  family.domain().require(y, "distance_n y");
  const Connection c = x == y ? Connection{} : connect_points(spray, x, y, opts);
  return level_distance(family, spray, n, x, y, c, opts);
}

nlohmann::json DistanceReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) lv.push_back(l.to_json());
  return {{"levels", lv}, {"rho", rho}};
}

double combine_level_distances(const std::vector<double>& rho_n) {
  double rho = 0.0, w = 0.5;
  for (double r : rho_n) {
    rho += w * r / (1.0 + r);
    w *= 0.5;
  }
  return rho;
}

DistanceReport finsler_distance(const LevelMetricFamily& family, const Spray& spray, const Vec& x, const Vec& y,
                                const DistanceOptions& opts) {
  family.domain().require(x, "finsler_distance x");
  family.domain().require(y, "finsler_distance y");
  const Connection c = x == y ? Connection{} : connect_points(spray, x, y, opts);
  DistanceReport rep;
  std::vector<double> values;
  for (int n = 1; n <= family.levels(); ++n) {
    rep.levels.push_back(level_distance(family, spray, n, x, y, c, opts));
    values.push_back(rep.levels.back().value);
  }
  rep.rho = combine_level_distances(values);
  return rep;
}

nlohmann::json ElResidual::to_json() const {
  return {{"sup", sup}, {"dx_term_sup", dx_term_sup}, {"dt_term_sup", dt_term_sup}, {"points", times.size()}};
}

void ElResidual::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  const auto d = residual.empty() ? 0 : residual.front().size();
  os << 't';
  for (Eigen::Index k = 0; k < d; ++k) os << ",r_" << k + 1;
  os << '\n';
  char buf[64];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", times[i]);
    os << buf;
    for (Eigen::Index k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", residual[i](k));
      os << buf;
    }
    os << '\n';
  }
}

ElResidual el_residual(const LevelMetricFamily& family, int n, const CurvePath& curve, double rel_step) {
  const auto& t = curve.times();
  ElResidual out;
  auto momentum = [&](double s) { return Vec(family.gram(n, curve.position(s)) * curve.velocity(s)); };
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const Vec& x = curve.nodes()[i];
    const Vec& v = curve.velocities()[i];
    const auto dg = family.gram_partials(n, x);
    Vec dx(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) dx(k) = 0.5 * v.dot(dg[static_cast<std::size_t>(k)] * v);
    const double delta = rel_step * std::min(t[i] - t[i - 1], t[i + 1] - t[i]);
    const Vec dt = (momentum(t[i] + delta) - momentum(t[i] - delta)) / (2.0 * delta);
    out.times.push_back(t[i]);
    out.residual.push_back(dx - dt);
    out.sup = std::max(out.sup, out.residual.back().norm());
    out.dx_term_sup = std::max(out.dx_term_sup, dx.norm());
    out.dt_term_sup = std::max(out.dt_term_sup, dt.norm());
  }
  return out;
}

nlohmann::json FirstVariation::to_json() const {
  return {{"fd", fd}, {"formula", formula}, {"difference", difference}};
}

FirstVariation first_variation(const LevelMetricFamily& family, int n, const CurvePath& curve,
                               const CurvePath& variation, double h) {
  if (!curve.same_grid(variation)) throw std::invalid_argument("first_variation: variation grid differs from curve");
  const double scale = 1.0 + variation.nodes().front().norm() + variation.nodes().back().norm();
  if (variation.nodes().front().norm() > 1e-12 * scale || variation.nodes().back().norm() > 1e-12 * scale) {
    throw std::invalid_argument("first_variation: variation is not proper (nonzero at an endpoint)");
  }
  const Spray spray = spray_from_metric(family, n);
  FirstVariation out;
  out.fd = (energy_n(family, n, curve.plus_scaled(variation, h)) -
            energy_n(family, n, curve.plus_scaled(variation, -h))) /
           (2.0 * h);
  // the acceleration is evaluated inside each segment, where the Hermite
  // interpolant is smooth
  out.formula = -integrate_segments(curve, [&](double s) {
    const Vec x = curve.position(s);
    const Vec v = curve.velocity(s);
    const Vec cov = curve.acceleration(s) - spray.quadratic(x, v);
    return family.product(n, x, variation.position(s), cov);
  });
  out.difference = std::abs(out.fd - out.formula);
  return out;
}

nlohmann::json MinimalityReport::to_json() const {
  return {{"base_lengths", base_lengths}, {"trials", trials},       {"violations", violations},
          {"trials_beaten", trials_beaten}, {"resamples", resamples}, {"skipped", skipped},
          {"min_margin", min_margin},     {"pass", pass}};
}

MinimalityReport minimality_test(const LevelMetricFamily& family, const CurvePath& geodesic, int trials,
                                 double amplitude, std::uint64_t seed, const MinimalityOptions& opts) {
  if (trials < 1) throw std::invalid_argument("minimality_test: trials must be positive");
  const int levels = family.levels();
  const int d = family.dim();
  MinimalityReport rep;
  rep.trials = trials;
  for (int n = 1; n <= levels; ++n) rep.base_lengths.push_back(length_n(family, n, geodesic));
  rep.min_margin.assign(static_cast<std::size_t>(levels), std::numeric_limits<double>::infinity());

  struct TrialResult {
    std::vector<double> margin;  // min over the pair, per level
    bool violation = false;
    bool beaten = false;
    int resamples = 0;
    bool skipped = false;
  };
  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  const double t0 = geodesic.t_begin(), span = geodesic.t_end() - geodesic.t_begin();
  const auto& times = geodesic.times();

  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    std::mt19937_64 rng(mix_seed(seed + trial));
    std::normal_distribution<double> gauss;
    TrialResult& res = results[trial];
    for (int attempt = 0; attempt <= opts.max_resamples; ++attempt) {
      Vec d1(d), d2(d);
      for (int k = 0; k < d; ++k) {
        d1(k) = gauss(rng);
        d2(k) = gauss(rng);
      }
      d1.normalize();
      d2.normalize();
      const double a0 = gauss(rng), a1 = gauss(rng), b0 = gauss(rng), b1 = gauss(rng);
      std::vector<Vec> bump(times.size()), dbump(times.size());
      double peak = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double tau = (times[i] - t0) / span;
        const Vec p = (a0 + a1 * tau) * d1 + (b0 + b1 * tau) * d2;
        const Vec dp = a1 * d1 + b1 * d2;
        bump[i] = tau * (1.0 - tau) * p;
        dbump[i] = ((1.0 - 2.0 * tau) * p + tau * (1.0 - tau) * dp) / span;
        peak = std::max(peak, bump[i].norm());
      }
      if (peak == 0.0) continue;
      for (std::size_t i = 0; i < times.size(); ++i) {
        bump[i] /= peak;
        dbump[i] /= peak;
      }
      const CurvePath lift(times, bump, dbump);
      bool inside = true;
      for (double sign : {1.0, -1.0}) {
        const CurvePath c = geodesic.plus_scaled(lift, sign * amplitude);
        for (const auto& x : c.nodes()) inside = inside && family.domain().contains_ball(x, 1e-9);
      }
      if (!inside) {
        ++res.resamples;
        continue;
      }
      res.margin.assign(static_cast<std::size_t>(levels), std::numeric_limits<double>::infinity());
      for (double sign : {1.0, -1.0}) {
        const CurvePath c = geodesic.plus_scaled(lift, sign * amplitude);
        for (int n = 1; n <= levels; ++n) {
          const double margin = length_n(family, n, c) - rep.base_lengths[static_cast<std::size_t>(n - 1)];
          auto& m = res.margin[static_cast<std::size_t>(n - 1)];
          m = std::min(m, margin);
          if (margin < -opts.slack) res.violation = true;
          if (margin < 0.0) res.beaten = true;
        }
      }
      return;
    }
    res.skipped = true;
  });

  for (const auto& r : results) {
    rep.resamples += r.resamples;
    if (r.skipped) {
      ++rep.skipped;
      continue;
    }
    if (r.violation) ++rep.violations;
    if (r.beaten) ++rep.trials_beaten;
    for (int n = 0; n < levels; ++n) {
      rep.min_margin[static_cast<std::size_t>(n)] =
          std::min(rep.min_margin[static_cast<std::size_t>(n)], r.margin[static_cast<std::size_t>(n)]);
    }
  }
  rep.pass = rep.violations == 0 && rep.skipped < trials;
  return rep;
}

nlohmann::json GaussReport::to_json() const {
  return {{"epsilon", epsilon},
          {"orthogonality_defect", orthogonality_defect},
          {"radial_speed_defect", radial_speed_defect},
          {"s_samples", s_samples},
          {"t_samples", t_samples}};
}

GaussReport gauss_check(const LevelMetricFamily& family, const Spray& spray, const Vec& x, double epsilon,
                        int s_samples, int t_samples, const OdeOptions& opts) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gauss_check: epsilon must be positive");
  if (s_samples < 1 || t_samples < 1) throw std::invalid_argument("gauss_check: sample counts must be positive");
  const int d = family.dim();
  if (d < 2) throw DimensionError("gauss_check needs dimension >= 2");
  family.domain().require(x, "gauss_check");
  const int lead = family.driving_level();
  const Mat g = family.gram(lead, x);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw NumericalError("singular_gram", "gauss_check: driving level singular");
  const Mat lt = llt.matrixU();  // g = lt^T lt

  // driving-level unit circle in the plane of the first two coordinates
  auto j = [&](double t) {
    Vec u = Vec::Zero(d);
    u(0) = std::cos(t);
    u(1) = std::sin(t);
    return Vec(lt.triangularView<Eigen::Upper>().solve(u));
  };
  auto radial = [&](const Vec& v) {
    const auto sol = integrate_geodesic(spray, x, v, epsilon, opts, s_samples + 1);
    if (!sol.completed()) {
      throw NumericalError("domain_exit", "gauss_check: radial geodesic stopped (" + to_string(sol.reason) +
                                              "); epsilon too large");
    }
    return sol;
  };

  const double delta = 1e-4;
  std::vector<std::pair<double, double>> per_t(static_cast<std::size_t>(t_samples));
  parallel_for(static_cast<std::size_t>(t_samples), [&](std::size_t k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / t_samples;
    const Vec jt = j(t);
    const auto base = radial(jt);
    const auto plus = radial(j(t + delta));
    const auto minus = radial(j(t - delta));
    double ortho = 0.0, speed = 0.0;
    for (int n = 1; n <= family.levels(); ++n) {
      const double jj = family.product(n, x, jt, jt);
      for (int i = 1; i <= s_samples; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const Vec& p = base.x[ii];
        const Vec& d1 = base.v[ii];
        const Vec d2 = (plus.x[ii] - minus.x[ii]) / (2.0 * delta);
        const double prod = family.product(n, p, d1, d2);
        ortho = std::max(ortho, std::abs(prod) / (family.norm(n, p, d1) * family.norm(n, p, d2) + 1e-30));
        speed = std::max(speed, std::abs(family.product(n, p, d1, d1) - jj) / jj);
      }
    }
    per_t[k] = {ortho, speed};
  });

  GaussReport rep;
  rep.epsilon = epsilon;
  rep.s_samples = s_samples;
  rep.t_samples = t_samples;
  for (const auto& [o, s] : per_t) {
    rep.orthogonality_defect = std::max(rep.orthogonality_defect, o);
    rep.radial_speed_defect = std::max(rep.radial_speed_defect, s);
  }
  return rep;
}

}  // namespace gradedgeo
