#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradedgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when an argument has the wrong shape or an index is out of range.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a point lies outside the chart domain of a problem.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure where success was required (non-convergence, singular
/// solves, blow-up before the requested time).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

inline void require_dim(const Vec& v, Eigen::Index d, const char* what) {
  if (v.size() != d) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(d) +
                         ", got " + std::to_string(v.size()));
  }
}

double min_eigenvalue(const Mat& symmetric);
double max_asymmetry(const Mat& m);
/// Ratio of extreme singular values; infinity for a singular matrix.
double condition_number(const Mat& m);
/// Symmetric square root and its inverse for an SPD matrix.
Mat spd_sqrt(const Mat& spd);
Mat spd_inv_sqrt(const Mat& spd);
/// Matrix exponential of a symmetric matrix through its eigendecomposition.
Mat sym_expm(const Mat& sym);

/// Symmetric m x m matrices as m(m+1)/2 coordinates, upper triangle row by row.
/// Coordinate (i, j) equals the matrix entry, so off-diagonal basis elements
/// are E_ij + E_ji.
int spd_dim(int m);
int spd_size_from_dim(int d);
Mat sym_from_coords(const Vec& x, int m);
Vec coords_from_sym(const Mat& s);
/// Basis matrix of coordinate a.
Mat sym_basis(int a, int m);

Vec to_vec(const std::vector<double>& v);
std::vector<double> to_std(const Vec& v);

/// SplitMix64 mixing, used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace gradedgeo
