#pragma once

#include "gradedgeo/linalg.hpp"

/// Closed-form reference values for the catalog problems. These are written
/// from the formulas directly and share no code with the numerical engine
/// beyond the matrix helpers.
namespace gradedgeo::oracle {

/// S(x)(u, v) = -Gamma(u, v) for the conformal metric e^{2 phi} I with
/// gradient `dphi` at x: -(u <dphi, v> + v <dphi, u> - <u, v> dphi).
Vec conformal_spray(const Vec& dphi, const Vec& u, const Vec& v);

/// Spray of the stereographic round sphere of radius R, G = 4R^4/(R^2+|x|^2)^2 I.
Vec stereographic_spray(double R, const Vec& x, const Vec& u, const Vec& v);

/// Chart radius of the point at sphere distance s from the chart center: R tan(s / 2R).
double stereographic_radius(double R, double s);

/// Sphere distance from the chart center to a point of chart radius r: 2R atan(r / R).
double stereographic_distance(double R, double r);

/// Affine-invariant geodesic g0^{1/2} exp(t M) g0^{1/2}, M = g0^{-1/2} V g0^{-1/2}.
Mat affine_invariant_geodesic(const Mat& g0, const Mat& V, double t);

/// Rotation angle of parallel transport once around the circle of polar angle theta.
double sphere_holonomy_angle(double theta);

}  // namespace gradedgeo::oracle
