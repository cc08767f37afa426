#include "gradedgeo/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "gradedgeo/connection.hpp"
#include "gradedgeo/ricci.hpp"

namespace gradedgeo {

namespace {

using json = nlohmann::json;

void reject_unknown(const std::string& what, const json& params, const std::vector<std::string>& keys) {
  if (!params.is_object()) throw std::invalid_argument(what + ": params must be a JSON object");
  for (const auto& [key, value] : params.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw std::invalid_argument(what + ": unknown parameter '" + key + "'");
    }
  }
}

template <typename T>
T param(const json& params, const std::string& key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("parameter '" + key + "' has the wrong type");
  }
}

Vec param_vec(const json& params, const std::string& key, const Vec& fallback) {
  if (!params.contains(key)) return fallback;
  const auto v = param<std::vector<double>>(params, key, {});
  if (static_cast<Eigen::Index>(v.size()) != fallback.size()) {
    throw std::invalid_argument("parameter '" + key + "' must have " + std::to_string(fallback.size()) + " entries");
  }
  return to_vec(v);
}

Mat json_matrix(const json& j, int rows, int cols, const std::string& key) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw std::invalid_argument("parameter '" + key + "' must be a " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " matrix");
  }
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("parameter '" + key + "' has a malformed row");
    }
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

// levels, weights and driving level shared by all problems
struct LevelParams {
  int levels = 2;
  std::vector<double> weights;
  int driving = 2;
};

LevelParams level_params(const json& params) {
  LevelParams lp;
  if (params.contains("weights")) {
    lp.weights = param<std::vector<double>>(params, "weights", {});
    lp.levels = static_cast<int>(lp.weights.size());
    if (params.contains("levels") && param<int>(params, "levels", 0) != lp.levels) {
      throw std::invalid_argument("parameter 'levels' disagrees with the length of 'weights'");
    }
  } else {
    lp.levels = param<int>(params, "levels", 2);
    if (lp.levels < 1) throw std::invalid_argument("parameter 'levels' must be >= 1");
    for (int n = 1; n <= lp.levels; ++n) lp.weights.push_back(n);
  }
  if (lp.levels < 1) throw std::invalid_argument("at least one level is required");
  for (std::size_t i = 0; i < lp.weights.size(); ++i) {
    if (!(lp.weights[i] > 0.0)) throw std::invalid_argument("weights must be positive");
    if (i > 0 && lp.weights[i] < lp.weights[i - 1]) {
      throw std::invalid_argument("grading violated at level pair (" + std::to_string(i) + "," +
                                  std::to_string(i + 1) + "): weights must be nondecreasing");
    }
  }
  lp.driving = param<int>(params, "driving_level", lp.levels);
  if (lp.driving < 1 || lp.driving > lp.levels) throw std::invalid_argument("driving_level out of range");
  return lp;
}

json filled(const json& params, const LevelParams& lp) {
  json out = params;
  out["levels"] = lp.levels;
  out["weights"] = lp.weights;
  out["driving_level"] = lp.driving;
  return out;
}

ChartedProblem finish(std::string id, json params, LevelMetricFamily family,
                      std::optional<ChartTransition> second = std::nullopt) {
  Spray spray = spray_from_metric(family, family.driving_level());
  return ChartedProblem{std::move(id), std::move(params), std::move(family), std::move(spray), std::move(second)};
}

ChartedProblem make_flat(const json& params) {
  if (params.contains("grams")) {
    const int dim = param<int>(params, "dim", 0);
    json space_json = {{"grams", params.at("grams")}, {"psd_tol", param<double>(params, "psd_tol", 1e-10)}};
    space_json["dim"] = dim > 0 ? dim : static_cast<int>(params.at("grams").at(0).size());
    const GradedSeminormSpace space = GradedSeminormSpace::from_json(space_json);
    const GradingReport rep = check_grading(space);
    if (!rep.pass) throw std::invalid_argument(rep.failures.front());
    const int n = space.levels();
    const int driving = param<int>(params, "driving_level", n);
    if (driving < 1 || driving > n) throw std::invalid_argument("driving_level out of range");
    std::vector<LevelMetricFamily::GramFn> grams;
    std::vector<LevelMetricFamily::GramPartialsFn> partials;
    const int d = space.dim();
    for (int k = 1; k <= n; ++k) {
      const Mat g = space.gram(k);
      grams.push_back([g](const Vec&) { return g; });
      partials.push_back([d](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(d), Mat::Zero(d, d)); });
    }
    Chart chart{ChartDomain::whole(d), space};
    auto family = LevelMetricFamily::general("flat", chart, grams, partials, driving);
    json p = params;
    p["dim"] = d;
    p["levels"] = n;
    p["driving_level"] = driving;
    return ChartedProblem{"flat", p, family, Spray::zero(chart), std::nullopt};
  }
  const int d = param<int>(params, "dim", 2);
  if (d < 1) throw std::invalid_argument("parameter 'dim' must be >= 1");
  const LevelParams lp = level_params(params);
  Chart chart{ChartDomain::whole(d), GradedSeminormSpace::scaled_identity(d, lp.weights)};
  auto family = LevelMetricFamily::scalar_scaled(
      "flat", chart, [d](const Vec&) { return Mat(Mat::Identity(d, d)); },
      [d](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(d), Mat::Zero(d, d)); }, lp.weights);
  family.set_driving_level(lp.driving);
  json p = filled(params, lp);
  p["dim"] = d;
  return ChartedProblem{"flat", p, family, Spray::zero(chart), std::nullopt};
}

ChartedProblem make_conformal(const json& params) {
  const int d = param<int>(params, "dim", 2);
  if (d < 1) throw std::invalid_argument("parameter 'dim' must be >= 1");
  const LevelParams lp = level_params(params);
  Vec e1 = Vec::Zero(d);
  e1(0) = 1.0;
  const Vec a = param_vec(params, "direction", e1);
  const double half = param<double>(params, "half_width", 2.0);
  if (!(half > 0.0)) throw std::invalid_argument("parameter 'half_width' must be positive");
  Chart chart{ChartDomain::box(Vec::Constant(d, -half), Vec::Constant(d, half)),
              GradedSeminormSpace::scaled_identity(d, lp.weights)};
  auto base = [a, d](const Vec& x) { return Mat(std::exp(2.0 * a.dot(x)) * Mat::Identity(d, d)); };
  auto partials = [a, d](const Vec& x) {
    const double f = std::exp(2.0 * a.dot(x));
    std::vector<Mat> out;
    for (int k = 0; k < d; ++k) out.push_back(2.0 * a(k) * f * Mat::Identity(d, d));
    return out;
  };
  auto family = LevelMetricFamily::scalar_scaled("conformal", chart, base, partials, lp.weights);
  family.set_driving_level(lp.driving);
  json p = filled(params, lp);
  p["dim"] = d;
  p["direction"] = to_std(a);
  p["half_width"] = half;
  return finish("conformal", p, family);
}

ChartedProblem make_sphere(const json& params) {
  const int d = param<int>(params, "dim", 2);
  if (d < 1) throw std::invalid_argument("parameter 'dim' must be >= 1");
  const LevelParams lp = level_params(params);
  const double R = param<double>(params, "radius", 1.0);
  if (!(R > 0.0)) throw std::invalid_argument("parameter 'radius' must be positive");
  const double chart_radius = param<double>(params, "chart_radius", 10.0 * R);
  if (!(chart_radius > 0.0)) throw std::invalid_argument("parameter 'chart_radius' must be positive");
  Chart chart{ChartDomain::ball(Vec::Zero(d), chart_radius), GradedSeminormSpace::scaled_identity(d, lp.weights)};
  const double r2 = R * R, r4 = r2 * r2;
  auto base = [d, r2, r4](const Vec& x) {
    const double q = r2 + x.squaredNorm();
    return Mat(4.0 * r4 / (q * q) * Mat::Identity(d, d));
  };
  auto partials = [d, r2, r4](const Vec& x) {
    const double q = r2 + x.squaredNorm();
    std::vector<Mat> out;
    for (int k = 0; k < d; ++k) out.push_back(-16.0 * r4 * x(k) / (q * q * q) * Mat::Identity(d, d));
    return out;
  };
  auto family = LevelMetricFamily::scalar_scaled("sphere_stereographic", chart, base, partials, lp.weights);
  family.set_driving_level(lp.driving);
  // projection from the opposite pole: inversion in the sphere of radius R
  auto inversion = [r2](const Vec& x) { return Vec(r2 * x / x.squaredNorm()); };
  ChartTransition second{"inversion", inversion, inversion, [r2, chart_radius](const Vec& x) {
                           const double n2 = x.squaredNorm();
                           return n2 > r2 * r2 / (chart_radius * chart_radius) && n2 < chart_radius * chart_radius;
                         }};
  json p = filled(params, lp);
  p["dim"] = d;
  p["radius"] = R;
  p["chart_radius"] = chart_radius;
  return finish("sphere_stereographic", p, family, second);
}

ChartedProblem make_spd(const json& params) {
  const LevelParams lp = level_params(params);
  SpdMetricSpace space;
  space.m = param<int>(params, "m", 2);
  if (space.m < 1) throw std::invalid_argument("parameter 'm' must be >= 1");
  space.kind = spd_kind_from_string(param<std::string>(params, "kind", "ebin"));
  space.weights = lp.weights;
  auto family = space.family();
  family.set_driving_level(lp.driving);
  json p = filled(params, lp);
  p["m"] = space.m;
  p["kind"] = to_string(space.kind);
  return finish("spd", p, family);
}

}  // namespace

const std::vector<std::string>& catalog_problem_ids() {
  static const std::vector<std::string> ids{"flat", "conformal", "sphere_stereographic", "spd"};
  return ids;
}

const std::vector<std::string>& catalog_problem_keys(const std::string& id) {
  static const std::vector<std::string> flat{"dim", "levels", "weights", "driving_level", "grams", "psd_tol"};
  static const std::vector<std::string> conformal{"dim", "levels", "weights", "driving_level", "direction",
                                                  "half_width"};
  static const std::vector<std::string> sphere{"dim", "levels", "weights", "driving_level", "radius",
                                               "chart_radius"};
  static const std::vector<std::string> spd{"m", "levels", "weights", "driving_level", "kind"};
  if (id == "flat") return flat;
  if (id == "conformal") return conformal;
  if (id == "sphere_stereographic") return sphere;
  if (id == "spd") return spd;
  throw std::invalid_argument("unknown problem '" + id + "'");
}

ChartedProblem catalog_problem(const std::string& id, const nlohmann::json& params) {
  const json p = params.is_null() ? json::object() : params;
  reject_unknown("problem " + id, p, catalog_problem_keys(id));
  if (id == "flat") return make_flat(p);
  if (id == "conformal") return make_conformal(p);
  if (id == "sphere_stereographic") return make_sphere(p);
  return make_spd(p);
}

const std::vector<std::string>& catalog_field_names() {
  static const std::vector<std::string> names{"identity", "rotation", "square", "one_plus_square", "linear",
                                              "constant", "pair_a",   "pair_b", "poly"};
  return names;
}

VectorField catalog_field(const std::string& name, int dim, const nlohmann::json& params) {
  const json p = params.is_null() ? json::object() : params;
  if (dim < 1) throw std::invalid_argument("vector field dimension must be >= 1");
  auto need2 = [&] {
    if (dim != 2) throw std::invalid_argument("field '" + name + "' is defined in dimension 2 only");
  };
  if (name == "identity") {
    return {name, [](const Vec& x) { return x; }, [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); }};
  }
  if (name == "rotation") {
    need2();
    Mat a(2, 2);
    a << 0, -1, 1, 0;
    return {name, [a](const Vec& x) { return Vec(a * x); }, [a](const Vec&) { return a; }};
  }
  if (name == "square") {
    return {name, [](const Vec& x) { return Vec(x.array().square()); },
            [](const Vec& x) { return Mat((2.0 * x).asDiagonal()); }};
  }
  if (name == "one_plus_square") {
    return {name, [](const Vec& x) { return Vec(1.0 + x.array().square()); },
            [](const Vec& x) { return Mat((2.0 * x).asDiagonal()); }};
  }
  if (name == "linear") {
    Mat a = Mat::Identity(dim, dim);
    if (p.contains("matrix")) a = json_matrix(p.at("matrix"), dim, dim, "matrix");
    return {name, [a](const Vec& x) { return Vec(a * x); }, [a](const Vec&) { return a; }};
  }
  if (name == "constant") {
    const Vec c = param_vec(p, "vector", Vec::Ones(dim));
    return {name, [c](const Vec&) { return c; }, [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); }};
  }
  if (name == "pair_a") {
    need2();
    return {name, [](const Vec& x) { return Vec((Vec(2) << x(1) * x(1), 0.0).finished()); },
            [](const Vec& x) { return Mat((Mat(2, 2) << 0.0, 2.0 * x(1), 0.0, 0.0).finished()); }};
  }
  if (name == "pair_b") {
    need2();
    return {name, [](const Vec& x) { return Vec((Vec(2) << 0.0, x(0)).finished()); },
            [](const Vec&) { return Mat((Mat(2, 2) << 0.0, 0.0, 1.0, 0.0).finished()); }};
  }
  if (name == "poly") {
    return random_polynomial_field(dim, param<std::uint64_t>(p, "seed", 42), param<double>(p, "scale", 1.0));
  }
  throw std::invalid_argument("unknown vector field '" + name + "'");
}

ScalarField catalog_scalar(const std::string& name, int dim, const nlohmann::json& params) {
  const json p = params.is_null() ? json::object() : params;
  if (name == "linear") {
    const Vec c = param_vec(p, "c", Vec::Ones(dim));
    return {name, [c](const Vec& x) { return c.dot(x); }, [c](const Vec&) { return c; }};
  }
  if (name == "sqnorm") {
    return {name, [](const Vec& x) { return x.squaredNorm(); }, [](const Vec& x) { return Vec(2.0 * x); }};
  }
  if (name == "exp2x1") {
    return {name, [](const Vec& x) { return std::exp(2.0 * x(0)); },
            [dim](const Vec& x) {
              Vec g = Vec::Zero(dim);
              g(0) = 2.0 * std::exp(2.0 * x(0));
              return g;
            }};
  }
  throw std::invalid_argument("unknown scalar map '" + name + "'");
}

}  // namespace gradedgeo
