#include <doctest.h>

#include <cmath>
#include <string>

#include "gradedgeo/catalog.hpp"
#include "gradedgeo/oracles.hpp"
#include "gradedgeo/ricci.hpp"

using namespace gradedgeo;

namespace {

Mat spd2(double a, double b, double c) { return (Mat(2, 2) << a, b, b, c).finished(); }

template <class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("case-studies") {
  TEST_CASE("Ricci curve examples") {
    const Mat g0 = Mat::Identity(2, 2);
    const auto c = einstein_ricci_curve(1.0, g0, 0.25, 5);
    REQUIRE(c.size() == 5);
    CHECK(c.times().back() == 0.25);
    CHECK((sym_from_coords(c.nodes()[4], 2) - 0.5 * g0).norm() <= 1e-15);
    CHECK((sym_from_coords(c.velocities()[2], 2) + 2.0 * g0).norm() <= 1e-15);
    CHECK(c.nodes()[0] == coords_from_sym(g0));

    const Mat g1 = spd2(2.0, 0.3, 1.0);
    const auto still = einstein_ricci_curve(0.0, g1, 3.0, 7);
    for (std::size_t i = 0; i < still.size(); ++i) {
      CHECK(still.nodes()[i] == coords_from_sym(g1));
      CHECK(still.velocities()[i].norm() == 0.0);
    }
    const auto neg = einstein_ricci_curve(-0.5, g1, 1.0, 3);
    CHECK((sym_from_coords(neg.nodes()[2], 2) - 2.0 * g1).norm() <= 1e-14);
  }

  TEST_CASE("Ricci curve rejects invalid input") {
    const Mat g0 = Mat::Identity(2, 2);
    CHECK_THROWS_AS(einstein_ricci_curve(1.0, g0, 0.5, 11), DomainError);
    CHECK_THROWS_AS(einstein_ricci_curve(1.0, g0, 0.7, 11), DomainError);
    CHECK_NOTHROW(einstein_ricci_curve(1.0, g0, 0.49, 11));
    CHECK_THROWS(einstein_ricci_curve(1.0, spd2(1.0, 2.0, 1.0), 0.1, 11));
  }

  TEST_CASE("Ricci verdicts by metric kind") {
    const Mat g0 = Mat::Identity(2, 2);
    for (SpdKind kind : {SpdKind::ebin, SpdKind::affine_invariant}) {
      SpdMetricSpace space;
      space.kind = kind;
      const auto rep = ricci_nongeodesic_report(space, 1.0, g0, 0.25);
      CHECK(rep.verdict == "not geodesic");
      REQUIRE(rep.assessment.levels.size() == 2);
      for (const auto& l : rep.assessment.levels) {
        CHECK(l.residual_exceeds);
        CHECK(l.variation_exceeds);
        CHECK(l.residual.sup > 1e4 * l.control_residual);
      }
      // the verdict does not depend on the level: levels differ by a constant factor
      const auto& a = rep.assessment.levels[0];
      const auto& b = rep.assessment.levels[1];
      CHECK(b.residual.sup == doctest::Approx(2.0 * a.residual.sup).epsilon(1e-6));
      CHECK(rep.flat_control.verdict == "geodesic");
      for (const auto& l : rep.flat_control.levels) CHECK(l.residual.sup <= 1e-8);
    }

    SpdMetricSpace flat;
    flat.kind = SpdKind::flat;
    const auto rep = ricci_nongeodesic_report(flat, 1.0, g0, 0.25);
    CHECK(rep.verdict == "geodesic");
    CHECK(rep.assessment.verdict == "geodesic");
  }

  TEST_CASE("Ricci report with a stationary curve") {
    SpdMetricSpace space;
    const auto rep = ricci_nongeodesic_report(space, 0.0, spd2(1.5, 0.2, 0.8), 1.0);
    CHECK(rep.verdict == "geodesic");
    for (const auto& l : rep.assessment.levels) CHECK(l.residual.sup == 0.0);
  }

  TEST_CASE("Ricci report serializes its parameters") {
    SpdMetricSpace space;
    const auto j = ricci_nongeodesic_report(space, 1.0, Mat::Identity(2, 2), 0.25).to_json();
    CHECK(j.at("verdict") == "not geodesic");
    CHECK(j.at("lambda") == 1.0);
    CHECK(j.at("m") == 2);
  }

  TEST_CASE("affine-invariant geodesics match the matrix exponential") {
    const auto p = catalog_problem("spd", {{"kind", "affine_invariant"}});
    const Mat g0 = spd2(2.0, 0.3, 1.0);
    const Mat V = spd2(0.4, -0.2, 0.1);
    const auto sol = integrate_geodesic(p.spray, coords_from_sym(g0), coords_from_sym(V), 1.0, {1e-11, 1e-13}, 11);
    REQUIRE(sol.completed());
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
      const Mat expect = oracle::affine_invariant_geodesic(g0, V, sol.t[i]);
      CHECK((sym_from_coords(sol.x[i], 2) - expect).norm() <= 1e-6);
    }
  }

  TEST_CASE("SPD coordinates round trip") {
    const Mat s = (Mat(3, 3) << 2, 0.1, -0.3, 0.1, 1, 0.2, -0.3, 0.2, 3).finished();
    CHECK(spd_dim(3) == 6);
    CHECK(sym_from_coords(coords_from_sym(s), 3) == s);
  }

  TEST_CASE("catalog examples") {
    for (const auto& id : catalog_problem_ids()) {
      const auto p = catalog_problem(id);
      CHECK(p.id == id);
      CHECK(p.levels() == 2);
      CHECK(p.family.driving_level() == 2);
      CHECK(p.params.at("weights") == nlohmann::json({1.0, 2.0}));
    }
    CHECK(catalog_problem("spd", {{"m", 3}}).dim() == 6);
    CHECK(catalog_problem("sphere_stereographic").second_chart.has_value());
    CHECK_THROWS_AS(catalog_problem("torus"), std::invalid_argument);
    CHECK_THROWS_AS(catalog_problem("flat", {{"gamma", 1}}), std::invalid_argument);
    CHECK(thrown_message([] { catalog_problem("flat", {{"weights", {2.0, 1.0}}}); }).find("(1,2)") !=
          std::string::npos);
    const nlohmann::json grams = {{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 0.5}}};
    CHECK(thrown_message([&] { catalog_problem("flat", {{"grams", grams}}); }).find("(1,2)") != std::string::npos);
    CHECK_THROWS_AS(catalog_problem("flat", {{"driving_level", 3}}), std::invalid_argument);
  }

  TEST_CASE("catalog fields carry consistent Jacobians") {
    const Vec x = (Vec(2) << 0.3, -0.6).finished(), h = (Vec(2) << 0.7, 0.2).finished();
    for (const auto& name : catalog_field_names()) {
      const auto X = catalog_field(name, 2);
      REQUIRE(X.jacobian);
      const double eps = 1e-6;
      const Vec fd = (X.eval(x + eps * h) - X.eval(x - eps * h)) / (2 * eps);
      CHECK((X.jacobian(x) * h - fd).norm() <= 1e-7);
    }
    CHECK_THROWS_AS(catalog_field("rotation", 3), std::invalid_argument);
    CHECK_THROWS_AS(catalog_field("nope", 2), std::invalid_argument);
  }
}
