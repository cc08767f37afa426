#include "gradedgeo/graded_space.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gradedgeo {

GradedSeminormSpace::GradedSeminormSpace(std::vector<Mat> grams, double psd_tol)
    : dim_(0), grams_(std::move(grams)), psd_tol_(psd_tol) {
  if (grams_.empty()) throw DimensionError("graded space needs at least one level");
  if (psd_tol_ < 0.0) throw std::invalid_argument("psd_tol must be nonnegative");
  dim_ = static_cast<int>(grams_.front().rows());
  if (dim_ <= 0) throw DimensionError("graded space dimension must be positive");
  for (std::size_t n = 0; n < grams_.size(); ++n) {
    const Mat& g = grams_[n];
    if (g.rows() != dim_ || g.cols() != dim_) {
      throw DimensionError("Gram matrix of level " + std::to_string(n + 1) + " is not " +
                           std::to_string(dim_) + "x" + std::to_string(dim_));
    }
    if (max_asymmetry(g) > 1e-12) {
      throw std::invalid_argument("Gram matrix of level " + std::to_string(n + 1) +
                                  " is not symmetric");
    }
  }
}

GradedSeminormSpace GradedSeminormSpace::scaled_identity(int dim, const std::vector<double>& weights,
                                                         double psd_tol) {
  std::vector<Mat> grams;
  for (double w : weights) grams.push_back(w * Mat::Identity(dim, dim));
  return GradedSeminormSpace(std::move(grams), psd_tol);
}

GradedSeminormSpace GradedSeminormSpace::from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  std::vector<Mat> grams;
  for (const auto& jg : j.at("grams")) {
    Mat g(dim, dim);
    if (static_cast<int>(jg.size()) != dim) throw DimensionError("Gram row count != dim");
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(jg[r].size()) != dim) throw DimensionError("Gram column count != dim");
      for (int c = 0; c < dim; ++c) g(r, c) = jg[r][c].get<double>();
    }
    grams.push_back(std::move(g));
  }
  return GradedSeminormSpace(std::move(grams), j.value("psd_tol", 1e-10));
}

const Mat& GradedSeminormSpace::gram(int n) const {
  if (n < 1 || n > levels()) {
    throw DimensionError("level " + std::to_string(n) + " outside 1.." + std::to_string(levels()));
  }
  return grams_[static_cast<std::size_t>(n - 1)];
}

nlohmann::json GradedSeminormSpace::to_json() const {
  nlohmann::json grams = nlohmann::json::array();
  for (const Mat& g : grams_) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < dim_; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < dim_; ++c) row.push_back(g(r, c));
      rows.push_back(row);
    }
    grams.push_back(rows);
  }
  return {{"dim", dim_}, {"grams", grams}, {"psd_tol", psd_tol_}};
}

LinearOperatorSample::LinearOperatorSample(Mat m, const GradedSeminormSpace& dom,
                                           const GradedSeminormSpace& cod)
    : matrix(std::move(m)), domain(&dom), codomain(&cod) {
  if (matrix.rows() != cod.dim() || matrix.cols() != dom.dim()) {
    throw DimensionError("operator shape does not match domain/codomain dimensions");
  }
}

double seminorm(const GradedSeminormSpace& space, int n, const Vec& x) {
  const Mat& g = space.gram(n);
  require_dim(x, space.dim(), "seminorm");
  // PSD rounding can leave a tiny negative quadratic form
  return std::sqrt(std::max(0.0, x.dot(g * x)));
}

double model_metric(const GradedSeminormSpace& space, const Vec& x, const Vec& y) {
  require_dim(x, space.dim(), "model_metric x");
  require_dim(y, space.dim(), "model_metric y");
  const Vec d = x - y;
  double best = 0.0;
  double weight = 0.5;
  for (int n = 1; n <= space.levels(); ++n, weight *= 0.5) {
    const double s = seminorm(space, n, d);
    best = std::max(best, weight * s / (1.0 + s));
  }
  return best;
}

nlohmann::json GradingReport::to_json() const {
  nlohmann::json jp = nlohmann::json::array();
  for (const auto& p : pairs) {
    jp.push_back({{"pair", {p.lower, p.lower + 1}}, {"min_eigenvalue", p.min_eigenvalue}, {"ok", p.ok}});
  }
  return {{"pass", pass},
          {"pairs", jp},
          {"level_min_eigenvalues", level_min_eigenvalues},
          {"top_min_eigenvalue", top_min_eigenvalue},
          {"top_definite", top_definite},
          {"failures", failures}};
}

GradingReport check_grading(const GradedSeminormSpace& space) {
  GradingReport report;
  const double tol = space.psd_tol();
  bool ok = true;
  for (int n = 1; n <= space.levels(); ++n) {
    const double lmin = min_eigenvalue(space.gram(n));
    report.level_min_eigenvalues.push_back(lmin);
    if (lmin < -tol) {
      ok = false;
      report.failures.push_back("level " + std::to_string(n) + " is not positive-semidefinite");
    }
  }
  for (int n = 1; n < space.levels(); ++n) {
    const double lmin = min_eigenvalue(space.gram(n + 1) - space.gram(n));
    const bool pair_ok = lmin >= -tol;
    report.pairs.push_back({n, lmin, pair_ok});
    if (!pair_ok) {
      ok = false;
      report.failures.push_back("grading violated at level pair (" + std::to_string(n) + "," +
                                std::to_string(n + 1) + "): min eigenvalue " +
                                std::to_string(lmin));
    }
  }
  report.top_min_eigenvalue = report.level_min_eigenvalues.back();
  report.top_definite = report.top_min_eigenvalue > tol;
  if (!report.top_definite) {
    ok = false;
    report.failures.push_back("top level " + std::to_string(space.levels()) +
                              " is not positive-definite");
  }
  report.pass = ok;
  return report;
}

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

}  // namespace

double lipschitz_gap(const LinearOperatorSample& L, const LinearOperatorSample& H,
                     int sample_count, std::uint64_t seed) {
  if (L.matrix.rows() != H.matrix.rows() || L.matrix.cols() != H.matrix.cols()) {
    throw DimensionError("lipschitz_gap: operator shapes differ");
  }
  if (sample_count < 1) throw std::invalid_argument("lipschitz_gap: sample_count must be >= 1");
  const GradedSeminormSpace& dom = *L.domain;
  const GradedSeminormSpace& cod = *L.codomain;
  const Mat diff = L.matrix - H.matrix;
  if (diff.isZero(0.0)) return 0.0;

  const int d = dom.dim();
  // The shift is symmetric in (L, H) because it depends on the seed only.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> shift(static_cast<std::size_t>(d));
  for (auto& s : shift) s = uni(rng);

  constexpr int kDecades = 16;
  constexpr int kPerDecade = 8;
  const Vec zero = Vec::Zero(d);
  const Vec zero_out = Vec::Zero(cod.dim());
  double best = 0.0;
  for (int k = 0; k < sample_count; ++k) {
    Vec dir(d);
    for (int i = 0; i < d; ++i) {
      const unsigned base = kPrimes[static_cast<std::size_t>(i) % std::size(kPrimes)];
      double u = radical_inverse(static_cast<std::uint64_t>(k) + 1, base) + shift[static_cast<std::size_t>(i)];
      u -= std::floor(u);
      dir(i) = 2.0 * u - 1.0;
    }
    if (d == 1) dir(0) = 1.0;
    const double nrm = dir.norm();
    if (nrm == 0.0) continue;
    dir /= nrm;
    for (int r = 0; r <= kDecades * kPerDecade; ++r) {
      const double radius = std::pow(10.0, -8.0 + static_cast<double>(r) / kPerDecade);
      const Vec x = radius * dir;
      const double denom = model_metric(dom, x, zero);
      if (denom <= 0.0) continue;
      best = std::max(best, model_metric(cod, diff * x, zero_out) / denom);
    }
  }
  return best;
}

}  // namespace gradedgeo
