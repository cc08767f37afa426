#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gradedgeo/catalog.hpp"
#include "gradedgeo/connection.hpp"
#include "gradedgeo/oracles.hpp"
#include "gradedgeo/spray.hpp"

using namespace gradedgeo;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// constant scalar-scaled family G_n = w_n c I
LevelMetricFamily constant_family(double c, std::vector<double> weights) {
  Chart chart{ChartDomain::whole(2), GradedSeminormSpace::scaled_identity(2, weights)};
  return LevelMetricFamily::scalar_scaled(
      "constant", chart, [c](const Vec&) { return Mat(c * Mat::Identity(2, 2)); },
      [](const Vec&) { return std::vector<Mat>(2, Mat::Zero(2, 2)); }, weights);
}

VectorField product_field(const ScalarField& phi, const VectorField& Y) {
  return {"phiY", [=](const Vec& x) { return Vec(phi(x) * Y(x)); }, {}};
}

}  // namespace

TEST_SUITE("riemann-finsler") {
  TEST_CASE("finsler product examples") {
    const auto fam = constant_family(1.0, {1.0, 2.0});
    const Vec x = v2(0.3, 0.1);
    CHECK(finsler_product(fam, 2, x, Vec::Zero(2), v2(1, 4)) == 0.0);
    CHECK(finsler_product(fam, 1, x, v2(1, 0), v2(0, 1)) == 0.0);
    CHECK(finsler_product(fam, 2, x, v2(1, 0), v2(1, 0)) == 2.0);
    CHECK_THROWS_AS(finsler_product(fam, 3, x, v2(1, 0), v2(1, 0)), DimensionError);
    const auto sphere = catalog_problem("sphere_stereographic");
    CHECK_THROWS_AS(finsler_product(sphere.family, 1, v2(20, 0), v2(1, 0), v2(1, 0)), DomainError);
  }

  TEST_CASE("finsler product is symmetric and bilinear") {
    const auto p = catalog_problem("conformal");
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int i = 0; i < 100; ++i) {
      const Vec x = v2(0.5 * g(rng), 0.5 * g(rng));
      const Vec u = v2(g(rng), g(rng)), v = v2(g(rng), g(rng)), w = v2(g(rng), g(rng));
      const double a = g(rng);
      for (int n = 1; n <= 2; ++n) {
        const double uv = finsler_product(p.family, n, x, u, v);
        CHECK(uv == doctest::Approx(finsler_product(p.family, n, x, v, u)).epsilon(1e-14));
        const double lin = finsler_product(p.family, n, x, Vec(a * u + w), v);
        CHECK(std::abs(lin - (a * uv + finsler_product(p.family, n, x, w, v))) <= 1e-12 * (1.0 + std::abs(lin)));
      }
    }
  }

  TEST_CASE("F-orthogonality examples") {
    const auto p = catalog_problem("conformal");
    const Vec x = v2(0.4, -0.3);
    CHECK(f_orthogonal(p.family, x, v2(1, 2), Vec::Zero(2)).orthogonal);
    const auto perp = f_orthogonal(p.family, x, v2(1, 2), v2(-2, 1));
    CHECK(perp.orthogonal);
    CHECK(perp.values.size() == 2);
    CHECK_FALSE(f_orthogonal(p.family, x, v2(1, 2), v2(1, 2)).orthogonal);
  }

  TEST_CASE("finsler_check examples") {
    const auto fam = constant_family(3.0, {1.0, 2.0});
    const auto c = finsler_check(fam, v2(0, 0), 1.01, 5.0, 100, 1);
    CHECK(c.pass);
    for (const auto& l : c.levels) CHECK(l.worst_ratio == doctest::Approx(1.0).epsilon(1e-14));

    const auto p = catalog_problem("conformal");
    for (double r : {0.5, 1.0}) {
      const auto ok = finsler_check(p.family, v2(0, 0), std::exp(r) + 1e-3, r, 400, 3);
      CHECK(ok.pass);
      for (const auto& l : ok.levels) CHECK(std::abs(l.worst_ratio - std::exp(r)) <= 1e-3 * std::exp(r));
    }
    const auto bad = finsler_check(p.family, v2(0, 0), 1.1, 1.0, 400, 3);
    CHECK_FALSE(bad.pass);
    for (const auto& l : bad.levels) {
      CHECK(l.worst_ratio > 1.1);
      CHECK(l.witness_point.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS(finsler_check(p.family, v2(0, 0), 2.0, 5.0, 10, 1));
    CHECK_THROWS(finsler_check(p.family, v2(0, 0), 1.0, 0.5, 10, 1));
  }

  TEST_CASE("Koszul derivative examples") {
    const auto fam = constant_family(2.0, {1.0, 2.0});
    const auto X = catalog_field("constant", 2, {{"vector", {1.0, -2.0}}});
    const auto Y = catalog_field("constant", 2, {{"vector", {0.5, 3.0}}});
    CHECK(koszul_covariant(fam, 1, X, Y, v2(0.2, 0.3)).norm() <= 1e-10);

    const auto p = catalog_problem("conformal");
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const auto A = random_polynomial_field(2, 100 + i, 0.5), B = random_polynomial_field(2, 200 + i, 0.5);
      const Vec x = v2(u(rng), u(rng));
      const Vec k = koszul_covariant(p.family, 1, A, B, x);
      CHECK((k - chart_covariant(p.spray, A, B, x)).norm() <= 1e-5);
      // scalar-scaled: every level has the same connection
      CHECK((k - koszul_covariant(p.family, 2, A, B, x)).norm() <= 1e-6);
    }
  }

  TEST_CASE("Koszul derivative obeys the Leibniz rule") {
    const auto p = catalog_problem("conformal");
    const auto phi = catalog_scalar("exp2x1", 2);
    const auto X = random_polynomial_field(2, 7, 0.5), Y = random_polynomial_field(2, 8, 0.5);
    for (const Vec& x : {v2(0.1, 0.2), v2(-0.5, 0.4), v2(0.7, -0.9)}) {
      const Vec lhs = koszul_covariant(p.family, 1, X, product_field(phi, Y), x);
      const double dphi = directional_derivative(phi, x, X(x), p.chart()).fd_value;
      const Vec rhs = dphi * Y(x) + phi(x) * koszul_covariant(p.family, 1, X, Y, x);
      CHECK((lhs - rhs).norm() <= 1e-5 * (1.0 + rhs.norm()));
    }
  }

  TEST_CASE("covariant derivative along curves") {
    const auto times = uniform_grid(0.0, 1.0, 101);
    const auto curve = CurvePath::sample(
        times, [](double t) { return v2(t, t * t); }, [](double t) { return v2(1.0, 2.0 * t); });
    const auto flat = catalog_problem("flat");
    const auto constant_lift = CurvePath::sample(
        times, [](double) { return v2(1.5, -2.0); }, [](double) { return Vec(Vec::Zero(2)); });
    CHECK(covariant_along_curve(flat.spray, curve, constant_lift, 0.37).norm() == 0.0);

    // conformal, phi = x_1: gamma' - S(lambda)(lambda', gamma) by hand
    const auto conf = catalog_problem("conformal");
    const auto lift = CurvePath::sample(
        times, [](double t) { return v2(1.0 + t, t * t * t); }, [](double t) { return v2(1.0, 3.0 * t * t); });
    for (double t : {0.2, 0.55, 0.9}) {
      const Vec dl = v2(1.0, 2.0 * t), g = v2(1.0 + t, t * t * t), dg = v2(1.0, 3.0 * t * t);
      const Vec s = v2(-(dl(0) * g(0) - dl(1) * g(1)), -(dl(0) * g(1) + dl(1) * g(0)));
      CHECK((covariant_along_curve(conf.spray, curve, lift, t) - (dg - s)).norm() <= 1e-6);
    }

    // a geodesic's velocity is self-parallel
    OdeOptions o;
    const auto sol = integrate_geodesic(conf.spray, v2(0.1, 0.2), v2(0.4, -0.3), 1.0, o, 201);
    const auto path = sol.path();
    std::vector<Vec> acc;
    for (std::size_t i = 0; i < sol.t.size(); ++i) acc.push_back(conf.spray.quadratic(sol.x[i], sol.v[i]));
    const CurvePath vel(sol.t, sol.v, acc);
    for (double t : {0.25, 0.5, 0.75}) CHECK(covariant_along_curve(conf.spray, path, vel, t).norm() <= 10 * o.rtol);

    const auto other = CurvePath::sample(
        uniform_grid(0.0, 1.0, 11), [](double) { return v2(0, 0); }, [](double) { return v2(0, 0); });
    CHECK_THROWS(covariant_along_curve(conf.spray, curve, other, 0.5));
  }

  TEST_CASE("mixed covariant derivatives commute on a surface") {
    // l(s, t) = (s + 0.3 t^2, t - 0.2 s t): compare nabla_s d_t l with nabla_t d_s l
    const auto p = catalog_problem("conformal");
    auto pos = [](double s, double t) { return v2(s + 0.3 * t * t, t - 0.2 * s * t); };
    auto ds = [](double, double t) { return v2(1.0, -0.2 * t); };
    auto dt = [](double s, double t) { return v2(0.6 * t, 1.0 - 0.2 * s); };
    auto dsdt = [](double, double) { return v2(0.0, -0.2); };
    const auto grid = uniform_grid(0.0, 1.0, 201);
    for (const auto& [s0, t0] : {std::pair{0.3, 0.4}, std::pair{0.7, 0.2}}) {
      const auto s_curve = CurvePath::sample(
          grid, [&](double s) { return pos(s, t0); }, [&](double s) { return ds(s, t0); });
      const auto s_lift = CurvePath::sample(
          grid, [&](double s) { return dt(s, t0); }, [&](double s) { return dsdt(s, t0); });
      const auto t_curve = CurvePath::sample(
          grid, [&](double t) { return pos(s0, t); }, [&](double t) { return dt(s0, t); });
      const auto t_lift = CurvePath::sample(
          grid, [&](double t) { return ds(s0, t); }, [&](double t) { return dsdt(s0, t); });
      const Vec a = covariant_along_curve(p.spray, s_curve, s_lift, s0);
      const Vec b = covariant_along_curve(p.spray, t_curve, t_lift, t0);
      CHECK((a - b).norm() <= 1e-6);
    }
  }

  TEST_CASE("parallel transport examples") {
    const auto flat = catalog_problem("flat");
    CurveFunction circle{[](double t) { return v2(std::cos(t), std::sin(t)); },
                         [](double t) { return v2(-std::sin(t), std::cos(t)); }, 0.0, 2.0};
    const auto still = parallel_transport(flat.spray, flat.family, circle, v2(0.3, 0.4));
    for (const auto& g : still.lift.nodes()) CHECK((g - v2(0.3, 0.4)).norm() <= 1e-14);

    const auto conf = catalog_problem("conformal");
    const OdeOptions tight{1e-11, 1e-13};
    const auto sol = integrate_geodesic(conf.spray, v2(0.1, 0.2), v2(0.4, -0.3), 1.0, tight, 101);
    const auto tr = parallel_transport(conf.spray, conf.family, sol.path(), sol.v.front(), tight);
    REQUIRE(tr.lift.size() == sol.t.size());
    // the interpolated path carries O(h^4) error, so the comparison is looser than rtol
    for (std::size_t i = 0; i < sol.t.size(); ++i) CHECK((tr.lift.nodes()[i] - sol.v[i]).norm() <= 1e-6);
  }

  TEST_CASE("parallel transport preserves norms at the driving level") {
    const auto p = catalog_problem("sphere_stereographic");
    CurveFunction loop{[](double t) { return v2(0.2 + 0.5 * std::cos(t), 0.3 * std::sin(2 * t)); },
                       [](double t) { return v2(-0.5 * std::sin(t), 0.6 * std::cos(2 * t)); }, 0.0, 6.0};
    const auto tr = parallel_transport(p.spray, p.family, loop, v2(0.7, -0.2), {1e-11, 1e-13});
    for (double d : tr.norm_drift) CHECK(d <= 1e-7);
  }

  TEST_CASE("sphere holonomy around a circle of latitude") {
    const auto p = catalog_problem("sphere_stereographic");
    for (double theta : {std::numbers::pi / 4, std::numbers::pi / 6, 1.2}) {
      const double r = std::tan(theta / 2);
      const double w = 2.0 * std::numbers::pi;
      CurveFunction c{[=](double t) { return v2(r * std::cos(w * t), r * std::sin(w * t)); },
                      [=](double t) { return v2(-w * r * std::sin(w * t), w * r * std::cos(w * t)); }, 0.0, 1.0};
      const Vec w0 = v2(1.0, 0.0);
      const auto tr = parallel_transport(p.spray, p.family, c, w0, {1e-11, 1e-13}, 401);
      const Vec w1 = tr.lift.nodes().back();
      // conformal metric: coordinate angles are metric angles
      const double angle = std::atan2(w0(0) * w1(1) - w0(1) * w1(0), w0.dot(w1));
      const double expected = oracle::sphere_holonomy_angle(theta);
      const double err = std::min(std::abs(wrap_angle(angle - expected)), std::abs(wrap_angle(angle + expected)));
      CHECK(err <= 1e-4);
    }
  }

  TEST_CASE("connection property report") {
    const auto fam = constant_family(1.5, {1.0, 2.0});
    const auto zero = connection_property_report(fam, 1, Spray::zero(fam.chart()), 50, 1);
    CHECK(zero.compatibility_max <= 1e-9);
    CHECK(zero.torsion_max <= 1e-9);
    CHECK(zero.compatible);
    CHECK(zero.torsion_free);

    for (const char* id : {"conformal", "sphere_stereographic"}) {
      const auto p = catalog_problem(id);
      const auto rep = connection_property_report(p.family, 1, p.spray, 100, 7);
      CHECK(rep.compatibility_max <= 1e-5);
      CHECK(rep.torsion_max <= 1e-5);
      CHECK(rep.koszul_vs_chart_max <= 1e-5);
      CHECK(rep.samples == 100);
    }

    const auto conf = catalog_problem("conformal");
    const auto bad = connection_property_report(conf.family, 1, conf.spray.scaled(-1.0), 100, 7);
    CHECK(bad.torsion_max <= 1e-5);
    CHECK(bad.compatibility_max >= 0.1);
    CHECK_FALSE(bad.compatible);
    CHECK(bad.torsion_free);
  }

  TEST_CASE("general families need a designated driving level") {
    const nlohmann::json grams = {{{1, 0}, {0, 1}}, {{2, 0.5}, {0.5, 3}}};
    const auto p = catalog_problem("flat", {{"grams", grams}, {"driving_level", 1}});
    CHECK(p.family.structure() == LevelMetricFamily::Structure::general);
    CHECK(p.family.driving_level() == 1);
    CHECK_THROWS(catalog_problem("flat", {{"grams", grams}, {"driving_level", 3}}));
  }
}
