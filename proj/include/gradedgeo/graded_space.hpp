#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/linalg.hpp"

namespace gradedgeo {

/// Finite truncation of a graded Hilbertian seminorm space: D coordinates and
/// N Gram matrices G_1 <= ... <= G_N, with G_N positive-definite.
///
/// Construction validates shapes and symmetry only; grading is a separate
/// check so that ill-graded inputs can still be reported on.
class GradedSeminormSpace {
 public:
  GradedSeminormSpace(std::vector<Mat> grams, double psd_tol = 1e-10);

  /// N copies of the identity scaled by `weights`.
  static GradedSeminormSpace scaled_identity(int dim, const std::vector<double>& weights,
                                             double psd_tol = 1e-10);
  /// Reads {"dim": D, "grams": [[[..]..]..], "psd_tol": t}.
  static GradedSeminormSpace from_json(const nlohmann::json& j);

  int dim() const { return dim_; }
  int levels() const { return static_cast<int>(grams_.size()); }
  double psd_tol() const { return psd_tol_; }
  /// Level index is 1-based.
  const Mat& gram(int n) const;
  const std::vector<Mat>& grams() const { return grams_; }

  nlohmann::json to_json() const;

 private:
  int dim_;
  std::vector<Mat> grams_;
  double psd_tol_;
};

/// A matrix viewed as a linear map between two graded spaces.
struct LinearOperatorSample {
  Mat matrix;
  const GradedSeminormSpace* domain;
  const GradedSeminormSpace* codomain;

  LinearOperatorSample(Mat m, const GradedSeminormSpace& dom, const GradedSeminormSpace& cod);
};

/// ||x||^n = sqrt(x^T G_n x).
double seminorm(const GradedSeminormSpace& space, int n, const Vec& x);

/// Translation-invariant metric sup_n 2^-n ||x-y||^n / (1 + ||x-y||^n).
double model_metric(const GradedSeminormSpace& space, const Vec& x, const Vec& y);

struct GradingPair {
  int lower;                 // level n; the pair is (n, n+1)
  double min_eigenvalue;     // of G_{n+1} - G_n
  bool ok;
};

struct GradingReport {
  bool pass = false;
  std::vector<GradingPair> pairs;
  std::vector<double> level_min_eigenvalues;
  double top_min_eigenvalue = 0.0;
  bool top_definite = false;
  std::vector<std::string> failures;

  nlohmann::json to_json() const;
};

GradingReport check_grading(const GradedSeminormSpace& space);

/// Sampled lower bound of Lip(L - H) with respect to the model metrics of the
/// domain and codomain. Directions come from a seeded, shifted Halton
/// sequence; radii are geometric over [1e-8, 1e8].
double lipschitz_gap(const LinearOperatorSample& L, const LinearOperatorSample& H,
                     int sample_count, std::uint64_t seed);

}  // namespace gradedgeo
