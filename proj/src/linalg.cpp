#include "gradedgeo/linalg.hpp"

#include <cmath>
#include <limits>

namespace gradedgeo {

double min_eigenvalue(const Mat& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_asymmetry(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

namespace {

template <typename F>
Mat spectral_apply(const Mat& sym, F f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  Vec d = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Mat spd_sqrt(const Mat& spd) {
  return spectral_apply(spd, [](double l) { return std::sqrt(l); });
}

Mat spd_inv_sqrt(const Mat& spd) {
  return spectral_apply(spd, [](double l) { return 1.0 / std::sqrt(l); });
}

Mat sym_expm(const Mat& sym) {
  return spectral_apply(sym, [](double l) { return std::exp(l); });
}

int spd_dim(int m) { return m * (m + 1) / 2; }

int spd_size_from_dim(int d) {
  int m = 0;
  while (spd_dim(m) < d) ++m;
  if (spd_dim(m) != d) throw DimensionError("dimension " + std::to_string(d) + " is not m(m+1)/2");
  return m;
}

Mat sym_from_coords(const Vec& x, int m) {
  require_dim(x, spd_dim(m), "sym_from_coords");
  Mat s(m, m);
  int a = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j, ++a) {
      s(i, j) = x(a);
      s(j, i) = x(a);
    }
  }
  return s;
}

Vec coords_from_sym(const Mat& s) {
  const auto m = static_cast<int>(s.rows());
  Vec x(spd_dim(m));
  int a = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j, ++a) x(a) = 0.5 * (s(i, j) + s(j, i));
  }
  return x;
}

Mat sym_basis(int a, int m) {
  Vec e = Vec::Zero(spd_dim(m));
  e(a) = 1.0;
  return sym_from_coords(e, m);
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace gradedgeo
