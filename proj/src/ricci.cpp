#include "gradedgeo/ricci.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gradedgeo/spray.hpp"

namespace gradedgeo {

std::string to_string(SpdKind k) {
  switch (k) {
    case SpdKind::flat: return "flat";
    case SpdKind::affine_invariant: return "affine_invariant";
    case SpdKind::ebin: return "ebin";
  }
  return "unknown";
}

SpdKind spd_kind_from_string(const std::string& s) {
  if (s == "flat") return SpdKind::flat;
  if (s == "affine_invariant") return SpdKind::affine_invariant;
  if (s == "ebin") return SpdKind::ebin;
  throw std::invalid_argument("unknown SPD family kind '" + s + "' (expected flat, affine_invariant or ebin)");
}

LevelMetricFamily SpdMetricSpace::family() const {
  if (m < 1) throw std::invalid_argument("SPD space needs m >= 1");
  const int d = dim();
  const int mm = m;
  std::vector<Mat> basis;
  for (int a = 0; a < d; ++a) basis.push_back(sym_basis(a, mm));
  Chart chart{ChartDomain::spd_cone(mm), GradedSeminormSpace::scaled_identity(d, weights)};

  LevelMetricFamily::GramFn base;
  LevelMetricFamily::GramPartialsFn partials;
  switch (kind) {
    case SpdKind::flat: {
      Mat g(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) g(a, b) = (basis[a] * basis[b]).trace();
      base = [g](const Vec&) { return g; };
      partials = [d](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(d), Mat::Zero(d, d)); };
      break;
    }
    case SpdKind::affine_invariant:
    case SpdKind::ebin: {
      const bool volume = kind == SpdKind::ebin;
      auto pieces = [basis, mm, d](const Vec& x) {
        const Mat g = sym_from_coords(x, mm);
        const Mat ginv = g.ldlt().solve(Mat::Identity(mm, mm));
        std::vector<Mat> a(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) a[k] = ginv * basis[k];
        return std::make_pair(g, a);
      };
      base = [pieces, d, volume](const Vec& x) {
        const auto [g, a] = pieces(x);
        const double vol = volume ? std::sqrt(g.determinant()) : 1.0;
        Mat out(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) out(i, j) = vol * (a[i] * a[j]).trace();
        return out;
      };
      partials = [pieces, d, volume](const Vec& x) {
        const auto [g, a] = pieces(x);
        const double vol = volume ? std::sqrt(g.determinant()) : 1.0;
        std::vector<Mat> out(static_cast<std::size_t>(d), Mat(d, d));
        for (int c = 0; c < d; ++c) {
          const double dlogvol = volume ? 0.5 * a[c].trace() : 0.0;
          for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
              const double t = (a[i] * a[j]).trace();
              const double dt = -(a[c] * a[i] * a[j]).trace() - (a[i] * a[c] * a[j]).trace();
              out[c](i, j) = vol * (dt + dlogvol * t);
            }
          }
        }
        return out;
      };
      break;
    }
  }
  return LevelMetricFamily::scalar_scaled("spd_" + to_string(kind), chart, base, partials, weights);
}

CurvePath einstein_ricci_curve(double lambda, const Mat& g0, double T, int grid_size) {
  if (g0.rows() != g0.cols()) throw DimensionError("einstein_ricci_curve: g0 must be square");
  if (max_asymmetry(g0) > 1e-12 || min_eigenvalue(g0) <= 0.0) {
    throw DomainError("einstein_ricci_curve: g0 is not positive-definite");
  }
  if (!(T > 0.0)) throw std::invalid_argument("einstein_ricci_curve: horizon T must be positive");
  if (lambda > 0.0 && !(T < 1.0 / (2.0 * lambda))) {
    throw DomainError("einstein_ricci_curve: horizon violates positivity (need T < 1/(2 lambda))");
  }
  const Vec x0 = coords_from_sym(g0);
  const Vec v = -2.0 * lambda * x0;
  return CurvePath::sample(
      uniform_grid(0.0, T, std::max(2, grid_size)), [&](double t) { return Vec((1.0 - 2.0 * lambda * t) * x0); },
      [&](double) { return v; });
}

nlohmann::json RicciLevelResult::to_json() const {
  return {{"level", level},
          {"residual_sup", residual.sup},
          {"dx_term_sup", residual.dx_term_sup},
          {"dt_term_sup", residual.dt_term_sup},
          {"first_variation", variation.to_json()},
          {"control_residual_sup", control_residual},
          {"control_first_variation", control_variation},
          {"theta", theta},
          {"theta_v", theta_v},
          {"residual_exceeds", residual_exceeds},
          {"variation_exceeds", variation_exceeds}};
}

nlohmann::json RicciAssessment::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) lv.push_back(l.to_json());
  return {{"kind", kind}, {"levels", lv}, {"verdict", verdict}};
}

nlohmann::json RicciReport::to_json() const {
  return {{"lambda", lambda},
          {"T", T},
          {"m", m},
          {"weights", weights},
          {"assessment", assessment.to_json()},
          {"flat_control", flat_control.to_json()},
          {"verdict", verdict}};
}

namespace {

RicciAssessment assess(const SpdMetricSpace& space, const CurvePath& curve, const CurvePath& variation,
                       const RicciOptions& opts) {
  const LevelMetricFamily family = space.family();
  const Spray spray = spray_from_metric(family, family.driving_level());
  const double T = curve.t_end() - curve.t_begin();
  const auto control =
      integrate_geodesic(spray, curve.nodes().front(), curve.velocities().front(), T, opts.ode,
                         static_cast<int>(curve.size()));
  if (!control.completed()) {
    throw NumericalError(to_string(control.reason), "ricci report: control geodesic did not reach the horizon");
  }
  const CurvePath control_path = control.path();
  for (const auto& x : curve.nodes()) family.domain().require(x, "ricci curve node");

  RicciAssessment out;
  out.kind = to_string(space.kind);
  bool residual_any = false, variation_any = false;
  for (int n = 1; n <= family.levels(); ++n) {
    RicciLevelResult r;
    r.level = n;
    r.residual = el_residual(family, n, curve);
    r.variation = first_variation(family, n, curve, variation);
    r.control_residual = el_residual(family, n, control_path).sup;
    r.control_variation = std::abs(first_variation(family, n, control_path, variation).fd);
    r.theta = std::max(opts.margin * r.control_residual, opts.floor);
    r.theta_v = std::max(opts.margin * r.control_variation, opts.floor);
    r.residual_exceeds = r.residual.sup >= r.theta;
    r.variation_exceeds = std::abs(r.variation.fd) >= r.theta_v;
    residual_any = residual_any || r.residual_exceeds;
    variation_any = variation_any || r.variation_exceeds;
    out.levels.push_back(std::move(r));
  }
  out.verdict = residual_any && variation_any ? "not geodesic" : "geodesic";
  return out;
}

}  // namespace

RicciReport ricci_nongeodesic_report(const SpdMetricSpace& space, double lambda, const Mat& g0, double T,
                                     const RicciOptions& opts) {
  if (g0.rows() != space.m) throw DimensionError("ricci report: g0 size differs from the space's m");
  const CurvePath curve = einstein_ricci_curve(lambda, g0, T, opts.grid_size);

  // seeded proper variation sin(pi t / T) H with H dominated by g0
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  Mat r(space.m, space.m);
  for (int i = 0; i < space.m; ++i)
    for (int j = 0; j < space.m; ++j) r(i, j) = gauss(rng);
  const Vec h = coords_from_sym(g0 + 0.125 * (r + r.transpose()));
  const double pi = std::numbers::pi;
  const CurvePath variation = CurvePath::sample(
      curve.times(), [&](double t) { return Vec(std::sin(pi * t / T) * h); },
      [&](double t) { return Vec(pi / T * std::cos(pi * t / T) * h); });

  RicciReport rep;
  rep.lambda = lambda;
  rep.T = T;
  rep.m = space.m;
  rep.weights = space.weights;
  rep.assessment = assess(space, curve, variation, opts);
  SpdMetricSpace flat = space;
  flat.kind = SpdKind::flat;
  rep.flat_control = space.kind == SpdKind::flat ? rep.assessment : assess(flat, curve, variation, opts);
  rep.verdict = rep.assessment.verdict;
  return rep;
}

}  // namespace gradedgeo
