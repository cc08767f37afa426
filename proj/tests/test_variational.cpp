#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gradedgeo/catalog.hpp"
#include "gradedgeo/oracles.hpp"
#include "gradedgeo/variational.hpp"

using namespace gradedgeo;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

CurvePath unit_circle(int nodes, double t_end) {
  return CurvePath::sample(
      uniform_grid(0.0, t_end, nodes), [](double t) { return v2(std::cos(t), std::sin(t)); },
      [](double t) { return v2(-std::sin(t), std::cos(t)); });
}

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("length examples") {
    const auto flat = catalog_problem("flat", {{"levels", 1}});
    const Vec x0 = v2(0.5, 1.0), v = v2(3.0, -4.0);
    CHECK(length_n(flat.family, 1, straight_segment(x0, x0 + v)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(length_n(flat.family, 1, straight_segment(x0, x0, 7)) == 0.0);
    const auto squared = CurvePath::sample(
        uniform_grid(0.0, 1.0, 33), [&](double t) { return Vec(x0 + t * t * v); },
        [&](double t) { return Vec(2.0 * t * v); });
    CHECK(std::abs(length_n(flat.family, 1, squared) - 5.0) <= 1e-9);
  }

  TEST_CASE("length reparametrization invariance on a curved family") {
    const auto p = catalog_problem("sphere_stereographic");
    auto pos = [](double u) { return v2(0.3 * std::cos(u), 0.5 * std::sin(u)); };
    auto vel = [](double u) { return v2(-0.3 * std::sin(u), 0.5 * std::cos(u)); };
    const auto grid = uniform_grid(0.0, 1.0, 201);
    const auto base = CurvePath::sample(grid, pos, vel);
    // phi(t) = (t + t^3) / 2 is monotone on [0, 1]
    const auto re = CurvePath::sample(
        grid, [&](double t) { return pos(0.5 * (t + t * t * t)); },
        [&](double t) { return Vec(0.5 * (1 + 3 * t * t) * vel(0.5 * (t + t * t * t))); });
    const auto half = CurvePath::sample(uniform_grid(0.0, 0.5, 201), pos, vel);
    for (int n = 1; n <= 2; ++n) CHECK(std::abs(length_n(p.family, n, re) - length_n(p.family, n, base)) <= 1e-9);
    CHECK(length_n(p.family, 1, base) > length_n(p.family, 1, half));
  }

  TEST_CASE("energy examples and the energy-length inequality") {
    const auto flat = catalog_problem("flat", {{"levels", 1}});
    const Vec x0 = v2(0.5, 1.0), v = v2(3.0, -4.0);
    CHECK(energy_n(flat.family, 1, straight_segment(x0, x0 + v)) == doctest::Approx(12.5).epsilon(1e-14));
    CHECK(energy_n(flat.family, 1, straight_segment(x0, x0, 3)) == 0.0);

    const auto p = catalog_problem("conformal");
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec a = v2(0.4 * g(rng), 0.4 * g(rng)), b = v2(0.4 * g(rng), 0.4 * g(rng));
      const double T = 2.0;
      const auto c = CurvePath::sample(
          uniform_grid(0.0, T, 101), [&](double t) { return Vec(a * std::sin(t) + b * t * t / 4); },
          [&](double t) { return Vec(a * std::cos(t) + b * t / 2); });
      for (int n = 1; n <= 2; ++n) {
        const double L = length_n(p.family, n, c), E = energy_n(p.family, n, c);
        CHECK(L * L <= 2 * T * E + 1e-9);
      }
    }
    // equality for constant speed
    const auto circle = unit_circle(101, 2.0);
    const double L = length_n(flat.family, 1, circle), E = energy_n(flat.family, 1, circle);
    CHECK(std::abs(L * L - 2 * 2.0 * E) <= 1e-9);
  }

  TEST_CASE("quadrature converges under grid refinement") {
    const auto p = catalog_problem("sphere_stereographic");
    auto pos = [](double t) { return v2(0.8 * std::cos(3 * t), 0.6 * std::sin(2 * t)); };
    auto vel = [](double t) { return v2(-2.4 * std::sin(3 * t), 1.2 * std::cos(2 * t)); };
    const auto ref = CurvePath::sample(uniform_grid(0.0, 1.0, 1601), pos, vel);
    const double L = length_n(p.family, 1, ref), E = energy_n(p.family, 1, ref);
    double prev_l = 0.0, prev_e = 0.0;
    for (int nodes : {11, 21, 41}) {
      const auto c = CurvePath::sample(uniform_grid(0.0, 1.0, nodes), pos, vel);
      const double el = std::abs(length_n(p.family, 1, c) - L), ee = std::abs(energy_n(p.family, 1, c) - E);
      if (prev_l > 0.0) {
        CHECK(prev_l / el >= 4.0);
        CHECK(prev_e / ee >= 4.0);
      }
      prev_l = el;
      prev_e = ee;
    }
  }

  TEST_CASE("distance examples") {
    const auto flat = catalog_problem("flat", {{"dim", 3}, {"levels", 3}, {"weights", {1.0, 2.0, 5.0}}});
    const Vec x = (Vec(3) << 0.1, 0.2, -0.3).finished(), y = (Vec(3) << 1.0, -0.5, 0.4).finished();
    for (int n = 1; n <= 3; ++n) {
      const auto d = distance_n(flat.family, flat.spray, n, x, y);
      CHECK(d.certified);
      CHECK(d.method == "geodesic");
      CHECK(std::abs(d.value - std::sqrt(flat.family.weights()[n - 1]) * (x - y).norm()) <= 1e-8);
    }
    const auto sphere = catalog_problem("sphere_stereographic");
    for (double r : {0.1, 0.5, 1.0}) {
      const auto d = distance_n(sphere.family, sphere.spray, 1, v2(0, 0), v2(r, 0));
      CHECK(std::abs(d.value - oracle::stereographic_distance(1.0, r)) <= 1e-6);
    }
    CHECK(distance_n(sphere.family, sphere.spray, 2, v2(0.3, 0.3), v2(0.3, 0.3)).value == 0.0);
    CHECK_THROWS_AS(distance_n(sphere.family, sphere.spray, 3, v2(0, 0), v2(1, 0)), DimensionError);
  }

  TEST_CASE("distance falls back to a flagged upper bound") {
    // one Newton iteration against an unreachable tolerance forces the fallback
    const auto sphere = catalog_problem("sphere_stereographic");
    DistanceOptions o;
    o.shooting.max_iter = 1;
    o.shooting.tol = 1e-300;
    const auto d = distance_n(sphere.family, sphere.spray, 1, v2(0, 0), v2(1.0, 0.5), o);
    CHECK(d.method == "polygonal-upper-bound");
    CHECK_FALSE(d.certified);
    CHECK(d.value >= oracle::stereographic_distance(1.0, std::hypot(1.0, 0.5)) - 1e-6);
    CHECK(d.value <= 1.2 * oracle::stereographic_distance(1.0, std::hypot(1.0, 0.5)));
    o.allow_fallback = false;
    CHECK_THROWS_AS(distance_n(sphere.family, sphere.spray, 1, v2(0, 0), v2(1.0, 0.5), o), NumericalError);
  }

  TEST_CASE("combined distance examples") {
    const auto sphere = catalog_problem("sphere_stereographic");
    CHECK(finsler_distance(sphere.family, sphere.spray, v2(0.2, 0.1), v2(0.2, 0.1)).rho == 0.0);
    CHECK(combine_level_distances({1.0}) == 0.25);
    CHECK(combine_level_distances({1.0, 2.0}) == doctest::Approx(0.25 + 0.25 * 2.0 / 3.0).epsilon(1e-15));
    const auto rep = finsler_distance(sphere.family, sphere.spray, v2(0.1, 0.0), v2(-0.4, 0.3));
    std::vector<double> values;
    for (const auto& l : rep.levels) values.push_back(l.value);
    CHECK(rep.rho == combine_level_distances(values));
    CHECK(rep.rho < 0.75);
    CHECK(rep.levels[0].value <= rep.levels[1].value);
  }

  TEST_CASE("distance symmetry and triangle inequality") {
    const auto p = catalog_problem("conformal");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x = v2(u(rng), u(rng)), y = v2(u(rng), u(rng)), z = v2(u(rng), u(rng));
      const auto xy = finsler_distance(p.family, p.spray, x, y);
      const auto yx = finsler_distance(p.family, p.spray, y, x);
      CHECK(std::abs(xy.rho - yx.rho) <= 1e-8);
      const auto yz = finsler_distance(p.family, p.spray, y, z);
      const auto xz = finsler_distance(p.family, p.spray, x, z);
      for (int n = 0; n < 2; ++n) {
        CHECK(xz.levels[n].value <= xy.levels[n].value + yz.levels[n].value + 1e-6);
      }
      CHECK(xz.rho <= xy.rho + yz.rho + 1e-6);
    }
  }

  TEST_CASE("Euler-Lagrange residual examples") {
    const auto flat = catalog_problem("flat", {{"levels", 1}});
    CHECK(el_residual(flat.family, 1, straight_segment(v2(0, 0), v2(1, 2), 11)).sup <= 1e-12);
    const auto circle = el_residual(flat.family, 1, unit_circle(1001, 1.0));
    CHECK(std::abs(circle.sup - 1.0) <= 1e-6);
    CHECK(circle.times.size() == 999);
    const auto conf = catalog_problem("conformal");
    const auto sol = integrate_geodesic(conf.spray, v2(0.1, 0.2), v2(0.6, -0.4), 1.0, {}, 1001);
    for (int n = 1; n <= 2; ++n) CHECK(el_residual(conf.family, n, sol.path()).sup <= 1e-5);
  }

  TEST_CASE("Euler-Lagrange residual of catalog geodesics") {
    for (const char* id : {"flat", "conformal", "sphere_stereographic"}) {
      const auto p = catalog_problem(id);
      const auto sol = integrate_geodesic(p.spray, v2(0.2, -0.1), v2(-0.3, 0.5), 1.0, {}, 1001);
      REQUIRE(sol.completed());
      for (int n = 1; n <= p.levels(); ++n) CHECK(el_residual(p.family, n, sol.path()).sup <= 1e-5);
    }
  }

  TEST_CASE("first variation examples") {
    const auto conf = catalog_problem("conformal");
    const auto grid = uniform_grid(0.0, 1.0, 401);
    const auto sol = integrate_geodesic(conf.spray, v2(0.1, 0.2), v2(0.6, -0.4), 1.0, {}, 401);
    const double pi = std::numbers::pi;
    const auto Y = CurvePath::sample(
        grid, [&](double s) { return v2(std::sin(pi * s), 0.5 * std::sin(2 * pi * s)); },
        [&](double s) { return v2(pi * std::cos(pi * s), pi * std::cos(2 * pi * s)); });
    const auto gv = first_variation(conf.family, 1, sol.path(), Y);
    CHECK(std::abs(gv.fd) <= 1e-5);
    CHECK(std::abs(gv.formula) <= 1e-5);

    const auto flat = catalog_problem("flat");
    const auto line = straight_segment(v2(0, 0), v2(1, 2), 401);
    const auto lv = first_variation(flat.family, 2, line, Y);
    CHECK(std::abs(lv.fd) <= 1e-9);
    CHECK(std::abs(lv.formula) <= 1e-9);

    const auto circle = CurvePath::sample(
        grid, [](double s) { return v2(std::cos(s), std::sin(s)); }, [](double s) { return v2(-std::sin(s), std::cos(s)); });
    const auto bump = CurvePath::sample(
        grid, [&](double s) { return Vec(std::sin(pi * s) * v2(std::cos(s), std::sin(s))); },
        [&](double s) {
          return Vec(pi * std::cos(pi * s) * v2(std::cos(s), std::sin(s)) +
                     std::sin(pi * s) * v2(-std::sin(s), std::cos(s)));
        });
    const auto cv = first_variation(flat.family, 1, circle, bump);
    CHECK(cv.difference <= 1e-4);
    CHECK(std::abs(cv.fd) > 0.1);

    const auto not_proper = CurvePath::sample(
        grid, [](double) { return v2(1, 0); }, [](double) { return v2(0, 0); });
    CHECK_THROWS_AS(first_variation(flat.family, 1, circle, not_proper), std::invalid_argument);
  }

  TEST_CASE("minimality examples") {
    const auto flat = catalog_problem("flat");
    const auto seg = straight_segment(v2(0, 0), v2(1, 0.5), 401);
    const auto f = minimality_test(flat.family, seg, 100, 0.05, 1);
    CHECK(f.pass);
    CHECK(f.violations == 0);
    CHECK(f.trials == 100);

    const auto sphere = catalog_problem("sphere_stereographic");
    const auto shot = connect(sphere.spray, v2(0.3, 0), v2(-0.5, 0.6));
    REQUIRE(shot.converged);
    const auto geo = integrate_geodesic(sphere.spray, v2(0.3, 0), shot.v, 1.0, {}, 401);
    const auto s = minimality_test(sphere.family, geo.path(), 100, 0.01, 2);
    CHECK(s.pass);
    CHECK(s.violations == 0);

    const auto bent = CurvePath::sample(
        uniform_grid(0.0, 1.0, 401), [](double t) { return v2(t, 0.3 * std::sin(std::numbers::pi * t)); },
        [](double t) { return v2(1.0, 0.3 * std::numbers::pi * std::cos(std::numbers::pi * t)); });
    const auto b = minimality_test(flat.family, bent, 100, 0.01, 3);
    CHECK_FALSE(b.pass);
    CHECK(b.trials_beaten >= 95);
    // the straight chord is shorter
    CHECK(length_n(flat.family, 1, straight_segment(v2(0, 0), v2(1, 0))) < b.base_lengths[0]);
  }

  TEST_CASE("minimality is reproducible for a fixed seed") {
    const auto p = catalog_problem("conformal");
    const auto geo = integrate_geodesic(p.spray, v2(0, 0), v2(0.5, 0.4), 1.0, {}, 201);
    const auto a = minimality_test(p.family, geo.path(), 30, 0.01, 77);
    const auto b = minimality_test(p.family, geo.path(), 30, 0.01, 77);
    CHECK(a.to_json() == b.to_json());
  }

  TEST_CASE("Gauss lemma examples") {
    const auto flat = catalog_problem("flat");
    const auto f = gauss_check(flat.family, flat.spray, v2(0, 0), 1.0, 6, 12);
    CHECK(f.orthogonality_defect <= 1e-5);
    CHECK(f.radial_speed_defect <= 1e-6);
    const auto sphere = catalog_problem("sphere_stereographic");
    const auto s = gauss_check(sphere.family, sphere.spray, v2(0.3, 0), 0.5, 6, 12);
    CHECK(s.orthogonality_defect <= 1e-5);
    CHECK(s.radial_speed_defect <= 1e-6);
    const auto conf = catalog_problem("conformal");
    const auto c = gauss_check(conf.family, conf.spray, v2(0, 0), 0.3, 6, 12);
    CHECK(c.orthogonality_defect <= 1e-5);
    CHECK(c.radial_speed_defect <= 1e-6);
    CHECK_THROWS_AS(gauss_check(sphere.family, sphere.spray, v2(0.3, 0), 40.0, 2, 4), NumericalError);
    CHECK_THROWS(gauss_check(flat.family, flat.spray, v2(0, 0), 0.0, 2, 4));
  }
}
