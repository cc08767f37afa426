#include <doctest.h>

#include <cmath>
#include <random>

#include "gradedgeo/graded_space.hpp"

using namespace gradedgeo;

namespace {

Mat diag(std::initializer_list<double> d) {
  Vec v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

Vec random_vec(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * g(rng);
  return v;
}

// graded space with G_{n+1} = G_n + B^T B
GradedSeminormSpace random_graded(std::mt19937_64& rng, int d, int levels) {
  std::vector<Mat> grams;
  Mat acc = Mat::Identity(d, d);
  for (int n = 0; n < levels; ++n) {
    Mat b(d, d);
    for (int i = 0; i < d; ++i) b.row(i) = random_vec(rng, d).transpose();
    if (n > 0) acc += b.transpose() * b;
    grams.push_back(0.5 * (acc + acc.transpose()));
  }
  return GradedSeminormSpace(grams);
}

// independent 1-D oracle: sup over x > 0 of rho(c x, 0) / rho(x, 0) with
// rho(x, 0) = x / (2 (1 + x)), scanned on a fine logarithmic grid
double ratio_sup_1d(double c) {
  double best = 0.0;
  for (int k = -1200; k <= 1200; ++k) {
    const double x = std::pow(10.0, k / 100.0);
    const double r = (c * x / (1.0 + c * x)) / (x / (1.0 + x));
    best = std::max(best, r);
  }
  return best;
}

}  // namespace

TEST_SUITE("graded-space") {
  TEST_CASE("seminorm examples") {
    const auto s = GradedSeminormSpace::scaled_identity(2, {1.0, 2.0});
    CHECK(seminorm(s, 1, (Vec(2) << 3.0, 4.0).finished()) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(seminorm(s, 2, Vec::Zero(2)) == 0.0);
    CHECK(seminorm(s, 2, (Vec(2) << 1.0, 0.0).finished()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(seminorm(s, 0, Vec::Zero(2)), DimensionError);
    CHECK_THROWS_AS(seminorm(s, 3, Vec::Zero(2)), DimensionError);
  }

  TEST_CASE("model metric examples") {
    const auto one = GradedSeminormSpace::scaled_identity(1, {1.0});
    const Vec a = Vec::Constant(1, 0.2), b = Vec::Constant(1, 1.2);
    CHECK(model_metric(one, a, a) == 0.0);
    CHECK(model_metric(one, a, b) == doctest::Approx(0.25).epsilon(1e-14));
    const GradedSeminormSpace two({Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 4.0)});
    // max(1/2 * 1/2, 1/4 * 2/3)
    CHECK(model_metric(two, a, b) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(model_metric(two, a, Vec::Zero(2)), DimensionError);
  }

  TEST_CASE("check_grading examples") {
    const Mat I = Mat::Identity(2, 2);
    CHECK(check_grading(GradedSeminormSpace({I, 2.0 * I})).pass);
    const auto bad = check_grading(GradedSeminormSpace({2.0 * I, I}));
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.pairs.size() == 1);
    CHECK(bad.pairs[0].lower == 1);
    CHECK_FALSE(bad.pairs[0].ok);
    CHECK(bad.failures.front().find("(1,2)") != std::string::npos);
    const auto indef = check_grading(GradedSeminormSpace({diag({1.0, 3.0}), diag({2.0, 2.0})}));
    CHECK_FALSE(indef.pass);
    CHECK(indef.pairs[0].min_eigenvalue == doctest::Approx(-1.0));
  }

  TEST_CASE("grading requires a definite top level") {
    const Mat P = diag({1.0, 0.0});
    const auto rep = check_grading(GradedSeminormSpace({P, P}));
    CHECK_FALSE(rep.top_definite);
    CHECK_FALSE(rep.pass);
  }

  TEST_CASE("construction rejects bad shapes and asymmetry") {
    Mat a = Mat::Identity(2, 2);
    a(0, 1) = 0.5;
    CHECK_THROWS_AS(GradedSeminormSpace({a}), std::invalid_argument);
    CHECK_THROWS(GradedSeminormSpace({Mat::Identity(2, 2), Mat::Identity(3, 3)}));
    CHECK_THROWS(GradedSeminormSpace(std::vector<Mat>{}));
  }

  TEST_CASE("JSON round trip") {
    const nlohmann::json j = {{"dim", 2}, {"grams", {{{1, 0}, {0, 1}}, {{2, 0}, {0, 3}}}}, {"psd_tol", 1e-9}};
    const auto s = GradedSeminormSpace::from_json(j);
    CHECK(s.dim() == 2);
    CHECK(s.levels() == 2);
    CHECK(s.psd_tol() == 1e-9);
    CHECK(s.gram(2)(1, 1) == 3.0);
    const auto back = GradedSeminormSpace::from_json(s.to_json());
    CHECK(back.gram(2) == s.gram(2));
    CHECK_THROWS(GradedSeminormSpace::from_json({{"dim", 3}, {"grams", {{{1, 0}, {0, 1}}}}}));
  }

  TEST_CASE("lipschitz gap against the 1-D ratio oracle") {
    const auto s = GradedSeminormSpace::scaled_identity(1, {1.0});
    const LinearOperatorSample H(Mat::Zero(1, 1), s, s);
    const LinearOperatorSample L3(Mat::Constant(1, 1, 3.0), s, s);
    const LinearOperatorSample Lh(Mat::Constant(1, 1, 0.5), s, s);
    CHECK(lipschitz_gap(H, H, 64, 1) == 0.0);
    CHECK(lipschitz_gap(L3, H, 64, 1) == doctest::Approx(ratio_sup_1d(3.0)).epsilon(1e-3));
    CHECK(lipschitz_gap(L3, H, 64, 1) == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(lipschitz_gap(Lh, H, 64, 1) == doctest::Approx(ratio_sup_1d(0.5)).epsilon(1e-3));
    CHECK(lipschitz_gap(Lh, H, 64, 1) == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("lipschitz gap is symmetric and seeded") {
    std::mt19937_64 rng(5);
    const auto dom = random_graded(rng, 3, 2);
    const auto cod = random_graded(rng, 2, 3);
    Mat a(2, 3), b(2, 3);
    for (int i = 0; i < 2; ++i) {
      a.row(i) = random_vec(rng, 3).transpose();
      b.row(i) = random_vec(rng, 3).transpose();
    }
    const LinearOperatorSample L(a, dom, cod), H(b, dom, cod);
    CHECK(lipschitz_gap(L, H, 50, 9) == lipschitz_gap(H, L, 50, 9));
    CHECK(lipschitz_gap(L, H, 50, 9) == lipschitz_gap(L, H, 50, 9));
    CHECK_THROWS(LinearOperatorSample(Mat::Zero(3, 3), dom, cod));
    CHECK_THROWS(lipschitz_gap(L, H, 0, 1));
  }

  TEST_CASE("seminorms are monotone in the level") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto s = random_graded(rng, 4, 4);
      const Vec x = random_vec(rng, 4, 3.0);
      for (int n = 1; n < s.levels(); ++n) CHECK(seminorm(s, n, x) <= seminorm(s, n + 1, x) + 1e-10);
    }
  }

  TEST_CASE("triangle inequality for seminorms and the model metric") {
    std::mt19937_64 rng(13);
    const auto s = random_graded(rng, 3, 3);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec x = random_vec(rng, 3, 2.0), y = random_vec(rng, 3, 2.0), z = random_vec(rng, 3, 2.0);
      for (int n = 1; n <= 3; ++n) {
        CHECK(seminorm(s, n, x - z) <= seminorm(s, n, x - y) + seminorm(s, n, y - z) + 1e-10);
      }
      CHECK(model_metric(s, x, z) <= model_metric(s, x, y) + model_metric(s, y, z) + 1e-10);
    }
  }

  TEST_CASE("model metric invariances") {
    std::mt19937_64 rng(17);
    const auto s = random_graded(rng, 3, 3);
    for (int trial = 0; trial < 200; ++trial) {
      const Vec x = random_vec(rng, 3, 2.0), y = random_vec(rng, 3, 2.0), z = random_vec(rng, 3, 5.0);
      const double d = model_metric(s, x, y);
      CHECK(std::abs(model_metric(s, x + z, y + z) - d) <= 1e-12);
      CHECK(model_metric(s, y, x) == doctest::Approx(d).epsilon(1e-15));
      CHECK(d <= 0.5);
      CHECK(d > 0.0);
    }
  }
}
