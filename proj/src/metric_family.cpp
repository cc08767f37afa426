#include "gradedgeo/metric_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gradedgeo {

LevelMetricFamily LevelMetricFamily::scalar_scaled(std::string name, Chart chart, GramFn base,
                                                   GramPartialsFn partials, std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("scalar_scaled family needs at least one weight");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("family weights must be positive");
    if (i > 0 && weights[i] < weights[i - 1]) {
      throw std::invalid_argument("family weights must be nondecreasing (levels " + std::to_string(i) + "," +
                                  std::to_string(i + 1) + ")");
    }
  }
  LevelMetricFamily f(std::move(chart));
  f.name_ = std::move(name);
  f.structure_ = Structure::scalar_scaled;
  f.levels_ = static_cast<int>(weights.size());
  f.driving_level_ = f.levels_;
  f.weights_ = std::move(weights);
  f.base_ = std::move(base);
  f.base_partials_ = std::move(partials);
  return f;
}

LevelMetricFamily LevelMetricFamily::general(std::string name, Chart chart, std::vector<GramFn> grams,
                                             std::vector<GramPartialsFn> partials, int driving_level) {
  if (grams.empty()) throw std::invalid_argument("general family needs at least one level");
  if (!partials.empty() && partials.size() != grams.size()) {
    throw DimensionError("general family: partials must be given for every level or none");
  }
  LevelMetricFamily f(std::move(chart));
  f.name_ = std::move(name);
  f.structure_ = Structure::general;
  f.levels_ = static_cast<int>(grams.size());
  f.grams_ = std::move(grams);
  f.partials_ = std::move(partials);
  f.set_driving_level(driving_level);
  return f;
}

void LevelMetricFamily::check_level(int n) const {
  if (n < 1 || n > levels_) {
    throw DimensionError("level " + std::to_string(n) + " outside 1.." + std::to_string(levels_));
  }
}

void LevelMetricFamily::set_driving_level(int n) {
  check_level(n);
  driving_level_ = n;
}

bool LevelMetricFamily::has_analytic_partials() const {
  return structure_ == Structure::scalar_scaled ? static_cast<bool>(base_partials_) : !partials_.empty();
}

Mat LevelMetricFamily::gram(int n, const Vec& x) const {
  check_level(n);
  chart_.domain.require(x, "gram");
  if (structure_ == Structure::scalar_scaled) return weights_[static_cast<std::size_t>(n - 1)] * base_(x);
  return grams_[static_cast<std::size_t>(n - 1)](x);
}

std::vector<Mat> LevelMetricFamily::gram_partials(int n, const Vec& x) const {
  check_level(n);
  chart_.domain.require(x, "gram_partials");
  if (has_analytic_partials()) {
    if (structure_ == Structure::scalar_scaled) {
      auto p = base_partials_(x);
      for (auto& m : p) m *= weights_[static_cast<std::size_t>(n - 1)];
      return p;
    }
    return partials_[static_cast<std::size_t>(n - 1)](x);
  }
  const int d = dim();
  const double s = chart_.fd_step(x);
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    Vec e = Vec::Zero(d);
    e(k) = s;
    out.push_back((gram(n, x + e) - gram(n, x - e)) / (2.0 * s));
  }
  return out;
}

GradedSeminormSpace LevelMetricFamily::fiber(const Vec& x) const {
  std::vector<Mat> g;
  for (int n = 1; n <= levels_; ++n) g.push_back(gram(n, x));
  return GradedSeminormSpace(std::move(g), chart_.space.psd_tol());
}

double LevelMetricFamily::product(int n, const Vec& x, const Vec& u, const Vec& v) const {
  require_dim(u, dim(), "product u");
  require_dim(v, dim(), "product v");
  return u.dot(gram(n, x) * v);
}

double LevelMetricFamily::norm(int n, const Vec& x, const Vec& u) const {
  return std::sqrt(std::max(0.0, product(n, x, u, u)));
}

double finsler_product(const LevelMetricFamily& family, int n, const Vec& x, const Vec& u, const Vec& v) {
  return family.product(n, x, u, v);
}

OrthogonalityResult f_orthogonal(const LevelMetricFamily& family, const Vec& x, const Vec& u, const Vec& v,
                                 double tol) {
  OrthogonalityResult r;
  r.orthogonal = true;
  for (int n = 1; n <= family.levels(); ++n) {
    const double p = family.product(n, x, u, v);
    r.values.push_back(p);
    if (std::abs(p) > tol * (1.0 + family.norm(n, x, u) * family.norm(n, x, v))) r.orthogonal = false;
  }
  return r;
}

nlohmann::json FinslerCheckReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    lv.push_back({{"level", i + 1},
                  {"max_ratio", l.max_ratio},
                  {"min_ratio", l.min_ratio},
                  {"worst_ratio", l.worst_ratio},
                  {"witness_point", to_std(l.witness_point)},
                  {"witness_direction", to_std(l.witness_direction)}});
  }
  return {{"k", k}, {"radius", radius}, {"x0", to_std(x0)}, {"levels", lv}, {"pass", pass}};
}

FinslerCheckReport finsler_check(const LevelMetricFamily& family, const Vec& x0, double k, double radius,
                                 int samples, std::uint64_t seed) {
  if (!(k > 1.0)) throw std::invalid_argument("finsler_check: k must exceed 1");
  if (!(radius > 0.0)) throw std::invalid_argument("finsler_check: radius must be positive");
  if (!family.domain().contains_ball(x0, radius)) {
    throw DomainError("finsler_check: ball of radius " + std::to_string(radius) + " exceeds the chart domain");
  }
  const int d = family.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto unit = [&] {
    Vec v(d);
    do {
      for (int i = 0; i < d; ++i) v(i) = gauss(rng);
    } while (v.norm() == 0.0);
    return Vec(v / v.norm());
  };

  std::vector<Vec> points, dirs;
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e(i) = radius;
    points.push_back(x0 + e);
    points.push_back(x0 - e);
    dirs.push_back(e / radius);
  }
  for (int s = 0; s < samples; ++s) {
    const double r = s % 2 == 0 ? radius : radius * std::pow(uni(rng), 1.0 / d);
    points.push_back(x0 + r * unit());
    dirs.push_back(unit());
  }

  FinslerCheckReport rep;
  rep.k = k;
  rep.radius = radius;
  rep.x0 = x0;
  rep.pass = true;
  for (int n = 1; n <= family.levels(); ++n) {
    const Mat g0 = family.gram(n, x0);
    FinslerLevelResult lr;
    lr.max_ratio = 0.0;
    lr.min_ratio = std::numeric_limits<double>::infinity();
    lr.worst_ratio = 1.0;
    lr.witness_point = x0;
    lr.witness_direction = dirs.front();
    for (const Vec& p : points) {
      const Mat gp = family.gram(n, p);
      for (const Vec& f : dirs) {
        const double base = std::sqrt(std::max(0.0, f.dot(g0 * f)));
        const double here = std::sqrt(std::max(0.0, f.dot(gp * f)));
        if (base == 0.0 && here == 0.0) continue;
        const double ratio = base == 0.0 ? std::numeric_limits<double>::infinity() : here / base;
        lr.max_ratio = std::max(lr.max_ratio, ratio);
        lr.min_ratio = std::min(lr.min_ratio, ratio);
        const double worst = ratio >= 1.0 ? ratio : 1.0 / ratio;
        if (worst > lr.worst_ratio) {
          lr.worst_ratio = worst;
          lr.witness_point = p;
          lr.witness_direction = f;
        }
      }
    }
    if (lr.max_ratio == 0.0) lr.max_ratio = 1.0;
    if (!std::isfinite(lr.min_ratio)) lr.min_ratio = 1.0;
    if (lr.worst_ratio > k) rep.pass = false;
    rep.levels.push_back(lr);
  }
  return rep;
}

}  // namespace gradedgeo
