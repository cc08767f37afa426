#include "gradedgeo/oracles.hpp"

#include <cmath>
#include <numbers>

namespace gradedgeo::oracle {

Vec conformal_spray(const Vec& dphi, const Vec& u, const Vec& v) {
  return -(u * dphi.dot(v) + v * dphi.dot(u) - u.dot(v) * dphi);
}

Vec stereographic_spray(double R, const Vec& x, const Vec& u, const Vec& v) {
  // phi = log(2R^2) - log(R^2 + |x|^2)
  const Vec dphi = -2.0 * x / (R * R + x.squaredNorm());
  return conformal_spray(dphi, u, v);
}

double stereographic_radius(double R, double s) { return R * std::tan(s / (2.0 * R)); }

double stereographic_distance(double R, double r) { return 2.0 * R * std::atan(r / R); }

Mat affine_invariant_geodesic(const Mat& g0, const Mat& V, double t) {
  const Mat h = spd_sqrt(g0);
  const Mat hi = spd_inv_sqrt(g0);
  return h * sym_expm(t * (hi * V * hi)) * h;
}

double sphere_holonomy_angle(double theta) { return 2.0 * std::numbers::pi * (1.0 - std::cos(theta)); }

}  // namespace gradedgeo::oracle
