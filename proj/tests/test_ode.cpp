#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gradedgeo/linalg.hpp"
#include "gradedgeo/ode.hpp"

using namespace gradedgeo;

namespace {

Vec scalar(double x) { return Vec::Constant(1, x); }

}  // namespace

TEST_SUITE("ode") {
  TEST_CASE("exponential growth at the default tolerances") {
    const auto r = integrate_ode([](double, const Vec& y) { return y; }, scalar(1.0), 0.0, {0.5, 1.0}, {});
    REQUIRE(r.completed());
    CHECK(r.t.size() == 2);
    CHECK(std::abs(r.y.back()(0) - std::exp(1.0)) <= 1e-8);
    CHECK(std::abs(r.y.front()(0) - std::exp(0.5)) <= 1e-8);
  }

  TEST_CASE("integration backwards in time") {
    const auto r = integrate_ode([](double, const Vec& y) { return y; }, scalar(1.0), 0.0, {-1.0}, {});
    REQUIRE(r.completed());
    CHECK(std::abs(r.y.back()(0) - std::exp(-1.0)) <= 1e-9);
  }

  TEST_CASE("fixed-step methods converge on the harmonic oscillator") {
    auto f = [](double, const Vec& y) { return Vec((Vec(2) << y(1), -y(0)).finished()); };
    for (OdeMethod m : {OdeMethod::fixed_dp5, OdeMethod::fixed_rk4}) {
      OdeOptions o;
      o.method = m;
      o.fixed_steps_per_unit = 512;
      const auto r = integrate_ode(f, (Vec(2) << 1.0, 0.0).finished(), 0.0, {2.0 * std::numbers::pi}, o);
      REQUIRE(r.completed());
      CHECK((r.y.back() - (Vec(2) << 1.0, 0.0).finished()).norm() <= 1e-9);
    }
  }

  TEST_CASE("fixed-step runs are bit-reproducible") {
    auto f = [](double t, const Vec& y) { return Vec(std::sin(t) * y); };
    OdeOptions o;
    o.method = OdeMethod::fixed_rk4;
    const auto a = integrate_ode(f, scalar(1.0), 0.0, uniform_grid(0.0, 3.0, 7), o);
    const auto b = integrate_ode(f, scalar(1.0), 0.0, uniform_grid(0.0, 3.0, 7), o);
    REQUIRE(a.y.size() == b.y.size());
    for (std::size_t i = 0; i < a.y.size(); ++i) CHECK(a.y[i](0) == b.y[i](0));
  }

  TEST_CASE("blow-up is reported, not thrown") {
    const auto r = integrate_ode([](double, const Vec& y) { return Vec(y.array().square()); }, scalar(1.0), 0.0,
                                 {2.0}, {});
    CHECK(r.reason == ExitReason::blow_up);
    CHECK(r.t_reached < 1.0);
    CHECK(r.t_reached > 0.99);
  }

  TEST_CASE("domain exit is located on the step interpolant") {
    const auto r = integrate_ode([](double, const Vec&) { return scalar(1.0); }, scalar(0.0), 0.0, {5.0}, {},
                                 [](const Vec& y) { return y(0) < 1.0; });
    CHECK(r.reason == ExitReason::left_domain);
    CHECK(r.t_reached == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("a stage leaving the domain counts as a domain exit") {
    // no predicate: only the right-hand side refuses points beyond 1
    auto f = [](double, const Vec& y) {
      if (y(0) > 1.0) throw DomainError("outside");
      return scalar(1.0);
    };
    const auto adaptive = integrate_ode(f, scalar(0.0), 0.0, {5.0}, {});
    CHECK(adaptive.reason == ExitReason::left_domain);
    CHECK(adaptive.t_reached == doctest::Approx(1.0).epsilon(1e-6));
    OdeOptions fixed;
    fixed.method = OdeMethod::fixed_rk4;
    const auto r = integrate_ode(f, scalar(0.0), 0.0, {5.0}, fixed);
    CHECK(r.reason == ExitReason::left_domain);
    CHECK(r.t_reached <= 1.0);
  }

  TEST_CASE("outputs land exactly on the requested grid") {
    const auto grid = uniform_grid(0.0, 1.0, 11);
    const auto r = integrate_ode([](double, const Vec& y) { return Vec(-y); }, scalar(1.0), 0.0, grid, {});
    REQUIRE(r.t.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(r.t[i] == grid[i]);
    CHECK(r.y.front()(0) == 1.0);
  }

  TEST_CASE("non-monotone output times are rejected") {
    CHECK_THROWS_AS(integrate_ode([](double, const Vec& y) { return y; }, scalar(1.0), 0.0, {1.0, 0.5}, {}),
                    std::invalid_argument);
  }

  TEST_CASE("uniform grid endpoints are exact") {
    const auto g = uniform_grid(-1.0, 2.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == -1.0);
    CHECK(g.back() == 2.0);
    CHECK(g[1] == doctest::Approx(0.0));
  }
}
