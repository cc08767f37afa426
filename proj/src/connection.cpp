#include "gradedgeo/connection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gradedgeo {

namespace {

VectorField coordinate_field(int d, int k) {
  Vec e = Vec::Zero(d);
  e(k) = 1.0;
  return {"e" + std::to_string(k + 1), [e](const Vec&) { return e; },
          [d](const Vec&) { return Mat(Mat::Zero(d, d)); }};
}

// [A,B] = B'A - A'B, the bracket of the derivation convention
Vec derivation_bracket(const VectorField& A, const VectorField& B, const Vec& x, const Chart& chart) {
  return -lie_bracket(A, B, x, chart);
}

// A<B,C>_n at x
double lie_of_product(const LevelMetricFamily& family, int n, const VectorField& A, const VectorField& B,
                      const VectorField& C, const Vec& x) {
  ScalarField f{"product", [&](const Vec& p) { return family.product(n, p, B(p), C(p)); }, {}};
  return directional_derivative(f, x, A(x), family.chart()).value;
}

}  // namespace

Vec koszul_covariant(const LevelMetricFamily& family, int n, const VectorField& X, const VectorField& Y,
                     const Vec& x) {
  const int d = family.dim();
  const Chart& chart = family.chart();
  const Mat g = family.gram(n, x);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success || min_eigenvalue(g) <= 0.0) {
    throw NumericalError("singular_gram", "koszul_covariant: G_" + std::to_string(n) + " is not definite");
  }
  const Vec xv = X(x), yv = Y(x);
  const Vec xy = derivation_bracket(X, Y, x, chart);
  Vec K(d);
  for (int k = 0; k < d; ++k) {
    const VectorField Z = coordinate_field(d, k);
    const Vec zv = Z(x);
    K(k) = lie_of_product(family, n, X, Y, Z, x) + lie_of_product(family, n, Y, Z, X, x) -
           lie_of_product(family, n, Z, X, Y, x) + zv.dot(g * xy) -
           xv.dot(g * derivation_bracket(Y, Z, x, chart)) + yv.dot(g * derivation_bracket(Z, X, x, chart));
  }
  return llt.solve(0.5 * K);
}

Vec chart_covariant(const Spray& spray, const VectorField& X, const VectorField& Y, const Vec& x) {
  const Vec xv = X(x);
  return field_jacobian(Y, x, spray.chart()) * xv - spray(x, xv, Y(x));
}

Vec covariant_along_curve(const Spray& spray, const CurvePath& curve, const CurvePath& lift, double t) {
  if (!curve.same_grid(lift)) throw std::invalid_argument("covariant_along_curve: grid mismatch");
  if (t < curve.t_begin() || t > curve.t_end()) {
    throw std::invalid_argument("covariant_along_curve: t outside the curve's time range");
  }
  return lift.velocity(t) - spray(curve.position(t), curve.velocity(t), lift.position(t));
}

CurveFunction CurveFunction::from_path(const CurvePath& path) {
  return {[path](double t) { return path.position(t); }, [path](double t) { return path.velocity(t); },
          path.t_begin(), path.t_end()};
}

nlohmann::json TransportResult::to_json() const {
  return {{"exit_reason", to_string(reason)},
          {"start", to_std(lift.nodes().front())},
          {"end", to_std(lift.nodes().back())},
          {"norm_drift", norm_drift}};
}

TransportResult parallel_transport(const Spray& spray, const LevelMetricFamily& family, const CurveFunction& curve,
                                   const Vec& v0, const OdeOptions& opts, int grid_count) {
  require_dim(v0, spray.dim(), "parallel_transport v0");
  auto rhs = [&](double t, const Vec& g) { return spray(curve.position(t), curve.velocity(t), g); };
  const auto grid = uniform_grid(curve.t0, curve.t1, std::max(2, grid_count));
  for (double t : grid) spray.domain().require(curve.position(t), "parallel_transport curve");
  const auto r = integrate_ode(rhs, v0, curve.t0, grid, opts);
  if (r.t.size() < 2) throw NumericalError(to_string(r.reason), "parallel_transport: integration failed");
  TransportResult out{CurvePath(r.t, r.y, r.dy), r.reason, {}};
  for (int n = 1; n <= family.levels(); ++n) {
    const double n0 = family.norm(n, curve.position(r.t.front()), v0);
    double drift = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      const double ni = family.norm(n, curve.position(r.t[i]), r.y[i]);
      drift = std::max(drift, std::abs(ni - n0) / (n0 > 0.0 ? n0 : 1.0));
    }
    out.norm_drift.push_back(drift);
  }
  return out;
}

TransportResult parallel_transport(const Spray& spray, const LevelMetricFamily& family, const CurvePath& curve,
                                   const Vec& v0, const OdeOptions& opts) {
  return parallel_transport(spray, family, CurveFunction::from_path(curve), v0, opts,
                            static_cast<int>(curve.size()));
}

VectorField random_polynomial_field(int dim, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec a(dim), c(dim);
  Mat B(dim, dim);
  for (int i = 0; i < dim; ++i) {
    a(i) = g(rng);
    c(i) = 0.5 * g(rng);
    for (int j = 0; j < dim; ++j) B(i, j) = g(rng);
  }
  return {"poly" + std::to_string(seed),
          [=](const Vec& x) { return Vec(scale * (a + B * x + c * x.squaredNorm())); },
          [=](const Vec& x) { return Mat(scale * (B + 2.0 * c * x.transpose())); }};
}

nlohmann::json ConnectionReport::to_json() const {
  return {{"level", level},
          {"samples", samples},
          {"compatibility_max", compatibility_max},
          {"torsion_max", torsion_max},
          {"koszul_vs_chart_max", koszul_vs_chart_max},
          {"tolerance", tolerance},
          {"compatible", compatible},
          {"torsion_free", torsion_free},
          {"koszul_agrees", koszul_agrees}};
}

ConnectionReport connection_property_report(const LevelMetricFamily& family, int n, const Spray& spray,
                                            int samples, std::uint64_t seed, double tolerance) {
  const int d = family.dim();
  const Chart& chart = family.chart();
  const ChartDomain& dom = family.domain();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Vec ref = dom.reference_point();
  const double scale = 0.5 * dom.typical_scale();

  ConnectionReport rep;
  rep.level = n;
  rep.samples = samples;
  rep.tolerance = tolerance;
  for (int s = 0; s < samples; ++s) {
    Vec x(d);
    do {
      for (int i = 0; i < d; ++i) x(i) = ref(i) + scale * uni(rng);
    } while (!dom.contains_ball(x, 1e-3));
    const std::uint64_t base = mix_seed(seed + 3 * static_cast<std::uint64_t>(s));
    // unit-size fields keep the residuals comparable across problems
    const VectorField X = random_polynomial_field(d, base, 0.5);
    const VectorField Y = random_polynomial_field(d, mix_seed(base + 1), 0.5);
    const VectorField Z = random_polynomial_field(d, mix_seed(base + 2), 0.5);

    const Vec nzx = chart_covariant(spray, Z, X, x);
    const Vec nzy = chart_covariant(spray, Z, Y, x);
    const double lhs = lie_of_product(family, n, Z, X, Y, x);
    const double compat = lhs - family.product(n, x, nzx, Y(x)) - family.product(n, x, X(x), nzy);
    rep.compatibility_max = std::max(rep.compatibility_max, std::abs(compat));

    const Vec nxy = chart_covariant(spray, X, Y, x);
    const Vec nyx = chart_covariant(spray, Y, X, x);
    rep.torsion_max = std::max(rep.torsion_max, (nxy - nyx - derivation_bracket(X, Y, x, chart)).norm());

    const Vec kz = koszul_covariant(family, n, X, Y, x);
    rep.koszul_vs_chart_max = std::max(rep.koszul_vs_chart_max, (kz - nxy).norm());
  }
  rep.compatible = rep.compatibility_max <= tolerance;
  rep.torsion_free = rep.torsion_max <= tolerance;
  rep.koszul_agrees = rep.koszul_vs_chart_max <= tolerance;
  return rep;
}

}  // namespace gradedgeo
