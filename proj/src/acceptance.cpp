#include "gradedgeo/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "gradedgeo/catalog.hpp"
#include "gradedgeo/cli.hpp"
#include "gradedgeo/connection.hpp"
#include "gradedgeo/oracles.hpp"
#include "gradedgeo/ricci.hpp"
#include "gradedgeo/variational.hpp"

namespace gradedgeo {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "FAILED " << what << "; ";
    }
  }
};

// injectivity estimates shared by the Gauss and sphere criteria
struct SharedState {
  std::optional<InjectivityEstimate> sphere;
  std::optional<InjectivityEstimate> conformal;
  std::optional<InjectivityEstimate> flat;
};

const Vec kSphereBase = vec2(0.3, 0.0);

// top weight 1, so radii in the top-level norm are round-sphere lengths
const json kUnitTopSphere{{"weights", {0.5, 1.0}}};

InjectivityEstimate sphere_injectivity(SharedState& s) {
  if (!s.sphere) {
    const auto p = catalog_problem("sphere_stereographic", kUnitTopSphere);
    s.sphere = injectivity_radius_estimate(p.spray, p.family, kSphereBase, 4.0, 12);
  }
  return *s.sphere;
}

void flat_oracle(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  double worst_rho_n = 0.0, worst_rho = 0.0, worst_exp = 0.0, worst_connect = 0.0;
  for (int d : {1, 3, 10}) {
    for (int levels : {1, 4}) {
      // explicit graded Gram matrices: G_{n+1} = G_n + B^T B
      json grams = json::array();
      Mat acc = Mat::Zero(d, d);
      for (int n = 0; n < levels; ++n) {
        Mat b(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) b(i, j) = g(rng);
        acc += b.transpose() * b + (n == 0 ? Mat(Mat::Identity(d, d)) : Mat(Mat::Zero(d, d)));
        json m = json::array();
        for (int i = 0; i < d; ++i) {
          std::vector<double> row;
          for (int j = 0; j < d; ++j) row.push_back(0.5 * (acc(i, j) + acc(j, i)));
          m.push_back(row);
        }
        grams.push_back(m);
      }
      for (const json& params : {json{{"dim", d}, {"levels", levels}}, json{{"grams", grams}}}) {
        const auto p = catalog_problem("flat", params);
        Vec x(d), y(d);
        for (int i = 0; i < d; ++i) {
          x(i) = g(rng);
          y(i) = g(rng);
        }
        worst_exp = std::max(worst_exp, (exp_map(p.spray, x, y - x) - y).norm());
        const auto shot = connect(p.spray, x, y);
        worst_connect = std::max(worst_connect, shot.converged ? (shot.v - (y - x)).norm() : 1.0);
        const auto rep = finsler_distance(p.family, p.spray, x, y);
        double closed = 0.0, w = 0.5;
        for (int n = 1; n <= p.levels(); ++n) {
          const Vec diff = x - y;
          const double exact = std::sqrt(diff.dot(p.family.gram(n, x) * diff));
          worst_rho_n = std::max(worst_rho_n, std::abs(rep.levels[n - 1].value - exact));
          o.require(rep.levels[n - 1].method == "geodesic" && rep.levels[n - 1].certified, "certified geodesic");
          closed += w * exact / (1.0 + exact);
          w *= 0.5;
        }
        worst_rho = std::max(worst_rho, std::abs(rep.rho - closed));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(worst_exp <= 1e-8, "exp straight line");
  o.require(worst_connect <= 1e-8, "connect straight line");
  o.require(worst_rho_n <= 1e-8, "rho_n");
  o.require(worst_rho <= 1e-12, "rho weighted sum");
  o.require(secs < 1.0, "runtime < 1 s");
  o.detail << "max |rho_n - closed| " << fmt(worst_rho_n) << ", max |rho - closed| " << fmt(worst_rho)
           << ", exp " << fmt(worst_exp) << ", connect " << fmt(worst_connect) << ", " << fmt(secs) << " s";
}

void homogeneity(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  struct Case {
    const char* id;
    Vec x, v;
  };
  const std::vector<Case> cases{{"flat", vec2(0.2, -0.1), vec2(0.3, 0.4)},
                                {"conformal", vec2(0.1, -0.2), vec2(0.3, 0.2)},
                                {"sphere_stereographic", vec2(0.2, 0.1), vec2(0.3, -0.2)}};
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto p = catalog_problem(c.id);
    for (double s : {-2.0, 0.5, 3.0}) {
      const auto e = check_homogeneity(p.spray, c.x, c.v, s, 0.5);
      worst = std::max(worst, e.position);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(worst <= 5e-7, "base-path error");
  o.require(secs < 5.0, "runtime < 5 s");
  o.detail << "max base-path error " << fmt(worst) << " at rtol 1e-9, " << fmt(secs) << " s";
}

void exp_differential(Outcome& o) {
  struct Case {
    const char* id;
    json params;
    std::vector<Vec> points;
  };
  const Vec spd2 = coords_from_sym((Mat(2, 2) << 1.5, 0.3, 0.3, 0.8).finished());
  const std::vector<Case> cases{
      {"flat", json{{"dim", 3}}, {Vec::Zero(3), Vec::Constant(3, 0.7)}},
      {"conformal", json::object(), {vec2(0.0, 0.0), vec2(0.5, -0.3)}},
      {"sphere_stereographic", json::object(), {vec2(0.0, 0.0), vec2(1.5, -0.4)}},
      {"spd", json{{"kind", "ebin"}}, {coords_from_sym(Mat::Identity(2, 2)), spd2}},
      {"spd", json{{"kind", "affine_invariant"}}, {spd2}},
      {"spd", json{{"kind", "flat"}}, {spd2}},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto p = catalog_problem(c.id, c.params);
    for (const auto& x : c.points) {
      const Mat j = exp_jacobian(p.spray, x, Vec::Zero(p.dim()));
      worst = std::max(worst, (j - Mat::Identity(p.dim(), p.dim())).cwiseAbs().maxCoeff());
    }
  }
  o.require(worst <= 1e-6, "Jacobian vs identity");
  o.detail << "max |D exp_x(0) - I| " << fmt(worst) << " over 9 base points";
}

void connection_contract(Outcome& o) {
  double compat = 0.0, torsion = 0.0, koszul = 0.0;
  for (const char* id : {"conformal", "sphere_stereographic"}) {
    const auto p = catalog_problem(id);
    const auto rep = connection_property_report(p.family, p.family.driving_level(), p.spray, 200, 2024);
    compat = std::max(compat, rep.compatibility_max);
    torsion = std::max(torsion, rep.torsion_max);
    koszul = std::max(koszul, rep.koszul_vs_chart_max);
  }
  o.require(compat <= 1e-5, "compatibility");
  o.require(torsion <= 1e-5, "torsion");
  o.require(koszul <= 1e-5, "Koszul vs chart formula");
  o.detail << "compatibility " << fmt(compat) << ", torsion " << fmt(torsion) << ", Koszul vs chart " << fmt(koszul)
           << " (200 samples each)";
}

void affine_oracle(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int m : {2, 3}) {
    const auto p = catalog_problem("spd", {{"m", m}, {"kind", "affine_invariant"}});
    for (int trial = 0; trial < 3; ++trial) {
      Mat a(m, m), b(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          a(i, j) = g(rng);
          b(i, j) = g(rng);
        }
      const Mat g0 = a * a.transpose() + Mat::Identity(m, m);
      const Mat V = 0.5 * (b + b.transpose());
      const auto sol = integrate_geodesic(p.spray, coords_from_sym(g0), coords_from_sym(V), 1.0, {}, 21);
      o.require(sol.completed(), "geodesic completed");
      for (std::size_t i = 0; i < sol.t.size(); ++i) {
        const Mat exact = oracle::affine_invariant_geodesic(g0, V, sol.t[i]);
        worst = std::max(worst, (sym_from_coords(sol.x[i], m) - exact).cwiseAbs().maxCoeff());
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(worst <= 1e-6, "closed form");
  o.require(secs < 10.0, "runtime < 10 s");
  o.detail << "max entry error " << fmt(worst) << " over t in [0,1], m in {2,3}, " << fmt(secs) << " s";
}

void gauss_lemma(Outcome& o, SharedState& shared) {
  struct Case {
    const char* id;
    Vec x;
    double r_max;
  };
  const std::vector<Case> cases{{"flat", vec2(0.0, 0.0), 2.0},
                                {"conformal", vec2(0.0, 0.0), 1.0},
                                {"sphere_stereographic", kSphereBase, 4.0}};
  double ortho = 0.0, speed = 0.0;
  for (const auto& c : cases) {
    const bool sphere = std::string(c.id) == "sphere_stereographic";
    const auto p = catalog_problem(c.id, sphere ? kUnitTopSphere : json::object());
    const InjectivityEstimate est = sphere
                                        ? sphere_injectivity(shared)
                                        : injectivity_radius_estimate(p.spray, p.family, c.x, c.r_max, 12);
    const double eps = 0.5 * est.radius;
    const auto rep = gauss_check(p.family, p.spray, c.x, eps, 8, 16);
    ortho = std::max(ortho, rep.orthogonality_defect);
    speed = std::max(speed, rep.radial_speed_defect);
    o.detail << c.id << " eps " << fmt(eps) << "; ";
  }
  o.require(ortho <= 1e-5, "orthogonality");
  o.require(speed <= 1e-6, "radial speed");
  o.detail << "orthogonality defect " << fmt(ortho) << ", radial speed defect " << fmt(speed);
}

void minimality(Outcome& o) {
  struct Case {
    const char* id;
    Vec x, y;
  };
  const std::vector<Case> cases{{"flat", vec2(0.0, 0.0), vec2(1.0, 0.5)},
                                {"conformal", vec2(0.0, 0.0), vec2(0.5, 0.4)},
                                {"sphere_stereographic", kSphereBase, vec2(-0.5, 0.6)}};
  const double amplitude = 0.01;
  int violations = 0;
  for (const auto& c : cases) {
    const auto p = catalog_problem(c.id);
    const auto shot = connect(p.spray, c.x, c.y);
    o.require(shot.converged, std::string(c.id) + " connect");
    const auto sol = integrate_geodesic(p.spray, c.x, shot.v, 1.0, {}, 401);
    const auto rep = minimality_test(p.family, sol.path(), 100, amplitude, 99);
    violations += rep.violations + rep.skipped;
  }
  const auto flat = catalog_problem("flat");
  const double pi = std::numbers::pi;
  const CurvePath bent = CurvePath::sample(
      uniform_grid(0.0, 1.0, 401), [&](double t) { return vec2(t, 0.3 * std::sin(pi * t)); },
      [&](double t) { return vec2(1.0, 0.3 * pi * std::cos(pi * t)); });
  const auto control = minimality_test(flat.family, bent, 100, amplitude, 99);
  o.require(violations == 0, "no shorter competitor of a geodesic");
  o.require(control.trials_beaten >= 95, "bent control beaten");
  o.detail << "violations " << violations << " over 3 x 100 trials, all levels; bent control beaten in "
           << control.trials_beaten << "/100";
}

void euler_lagrange(Outcome& o) {
  double worst = 0.0;
  struct Case {
    const char* id;
    json params;
    Vec x, v;
  };
  const std::vector<Case> cases{
      {"flat", json::object(), vec2(0.1, 0.2), vec2(0.5, -0.3)},
      {"conformal", json::object(), vec2(0.1, 0.2), vec2(0.5, -0.3)},
      {"sphere_stereographic", json::object(), vec2(0.3, 0.0), vec2(0.4, 0.5)},
      {"spd", json{{"kind", "ebin"}}, coords_from_sym(Mat::Identity(2, 2)), (Vec(3) << 0.2, 0.1, -0.3).finished()},
      {"spd", json{{"kind", "affine_invariant"}}, coords_from_sym(Mat::Identity(2, 2)),
       (Vec(3) << 0.2, 0.1, -0.3).finished()},
  };
  for (const auto& c : cases) {
    const auto p = catalog_problem(c.id, c.params);
    const auto sol = integrate_geodesic(p.spray, c.x, c.v, 1.0, {}, 1001);
    o.require(sol.completed(), std::string(c.id) + " geodesic");
    for (int n = 1; n <= p.levels(); ++n) worst = std::max(worst, el_residual(p.family, n, sol.path()).sup);
  }
  const auto flat = catalog_problem("flat", {{"levels", 1}});
  const CurvePath circle = CurvePath::sample(
      uniform_grid(0.0, 1.0, 1001), [](double t) { return vec2(std::cos(t), std::sin(t)); },
      [](double t) { return vec2(-std::sin(t), std::cos(t)); });
  const double circle_sup = el_residual(flat.family, 1, circle).sup;
  const double pi = std::numbers::pi;
  const CurvePath bump = CurvePath::sample(
      circle.times(), [&](double s) { return Vec(std::sin(pi * s) * vec2(std::cos(s), std::sin(s))); },
      [&](double s) {
        return Vec(pi * std::cos(pi * s) * vec2(std::cos(s), std::sin(s)) +
                   std::sin(pi * s) * vec2(-std::sin(s), std::cos(s)));
      });
  const auto fv = first_variation(flat.family, 1, circle, bump);
  o.require(worst <= 1e-5, "geodesic residual");
  o.require(std::abs(circle_sup - 1.0) <= 1e-6, "unit circle residual");
  o.require(fv.difference <= 1e-4, "first variation");
  o.detail << "max geodesic residual " << fmt(worst) << ", circle sup - 1 = " << fmt(circle_sup - 1.0)
           << ", first variation |fd - formula| " << fmt(fv.difference);
}

void flow_laws(Outcome& o) {
  const auto flat = catalog_problem("flat");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vec> points;
  for (int i = 0; i < 6; ++i) points.push_back(vec2(u(rng), u(rng)));
  double group = 0.0, inverse = 0.0;
  for (const char* name : {"identity", "rotation", "square", "pair_a", "pair_b", "poly"}) {
    const auto table = local_flow(catalog_field(name, 2), points, 0.5, flat.chart());
    group = std::max(group, table.group_law_max);
    inverse = std::max(inverse, table.inverse_law_max);
  }
  const Chart line{ChartDomain::whole(1), GradedSeminormSpace::scaled_identity(1, {1.0})};
  const auto sq = flow_domain(catalog_field("square", 1), Vec::Constant(1, 2.0), 10.0, line);
  const auto tan = flow_domain(catalog_field("one_plus_square", 1), Vec::Zero(1), 10.0, line);
  const double e_sq = std::abs(sq.plus.t - 0.5);
  const double e_tan = std::abs(tan.plus.t - std::numbers::pi / 2);
  o.require(group <= 1e-7, "group law");
  o.require(inverse <= 1e-7, "inverse law");
  o.require(sq.plus.reason == ExitReason::blow_up && e_sq <= 1e-6, "x^2 blow-up");
  o.require(tan.plus.reason == ExitReason::blow_up && e_tan <= 1e-6, "1+x^2 blow-up");
  o.detail << "group law " << fmt(group) << ", inverse law " << fmt(inverse) << ", blow-up errors " << fmt(e_sq)
           << " (x^2), " << fmt(e_tan) << " (1+x^2)";
}

void sphere_checks(Outcome& o, SharedState& shared) {
  const auto est = sphere_injectivity(shared);
  const double rel = std::abs(est.radius - std::numbers::pi) / std::numbers::pi;
  const auto p = catalog_problem("sphere_stereographic");
  double worst = 0.0;
  for (double r : {0.1, 0.5, 1.0}) {
    const auto d = distance_n(p.family, p.spray, 1, vec2(0.0, 0.0), vec2(r, 0.0));
    worst = std::max(worst, std::abs(d.value - oracle::stereographic_distance(1.0, r)));
  }
  o.require(rel <= 0.05, "injectivity estimate");
  o.require(worst <= 1e-6, "distance");
  o.detail << "injectivity estimate " << fmt(est.radius) << " (" << est.certificate << ", rel. error " << fmt(rel)
           << "), max distance error " << fmt(worst);
}

void ricci(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const Mat g0 = Mat::Identity(2, 2);
  double min_ratio = std::numeric_limits<double>::infinity();
  for (SpdKind kind : {SpdKind::ebin, SpdKind::affine_invariant}) {
    SpdMetricSpace space;
    space.kind = kind;
    const auto rep = ricci_nongeodesic_report(space, 1.0, g0, 0.25);
    o.require(rep.verdict == "not geodesic", to_string(kind) + " verdict");
    for (const auto& l : rep.assessment.levels) {
      o.require(l.residual.sup > 1e4 * l.control_residual, to_string(kind) + " residual margin");
      o.require(std::abs(l.variation.fd) > 1e4 * l.control_variation, to_string(kind) + " variation margin");
      min_ratio = std::min(min_ratio, l.residual.sup / std::max(l.control_residual, 1e-300));
    }
    for (const auto& l : rep.flat_control.levels) o.require(l.residual.sup <= 1e-8, "flat control residual");
    o.require(rep.flat_control.verdict == "geodesic", "flat control verdict");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 5.0, "runtime < 5 s");
  o.detail << "min residual / control ratio " << fmt(min_ratio) << ", flat control geodesic, " << fmt(secs) << " s";
}

void finsler(Outcome& o) {
  const auto p = catalog_problem("conformal");
  const Vec x0 = vec2(0.0, 0.0);
  const auto ok = finsler_check(p.family, x0, std::exp(1.0) + 1e-3, 1.0, 400, 3);
  const auto bad = finsler_check(p.family, x0, 1.1, 1.0, 400, 3);
  o.require(ok.pass, "k = e + 1e-3 passes");
  o.require(!bad.pass, "k = 1.1 fails");
  const auto& w = bad.levels.front();
  o.detail << "worst ratio " << fmt(ok.levels.front().worst_ratio) << " vs k " << fmt(std::exp(1.0) + 1e-3)
           << "; k = 1.1 witness x = (" << fmt(w.witness_point(0)) << ", " << fmt(w.witness_point(1)) << ")";
}

void determinism(Outcome& o) {
  const std::vector<json> docs{
      {{"command", "geodesic"}, {"problem", "sphere_stereographic"}, {"args", {{"x0", {0.1, 0.2}}, {"v0", {0.5, 0}}}}},
      {{"command", "distance"}, {"problem", "conformal"}, {"args", {{"x", {0, 0}}, {"y", {0.5, 0.3}}}}},
      {{"command", "minimality"}, {"problem", "conformal"}, {"args", {{"trials", 20}}}},
      {{"command", "finsler-check"}, {"problem", "conformal"}, {"seed", 9}},
      {{"command", "gauss"}, {"problem", "sphere_stereographic"}},
  };
  const char* previous = std::getenv("GRADEDGEO_THREADS");
  const std::string saved = previous ? previous : "";
  int identical = 0;
  for (const auto& d : docs) {
    const RunConfig cfg = parse_config(d);
    setenv("GRADEDGEO_THREADS", "1", 1);
    const std::string a = run_command(cfg).summary.dump();
    setenv("GRADEDGEO_THREADS", "4", 1);
    const std::string b = run_command(cfg).summary.dump();
    const std::string c = run_command(cfg).summary.dump();
    if (a == b && b == c) ++identical;
  }
  if (previous) {
    setenv("GRADEDGEO_THREADS", saved.c_str(), 1);
  } else {
    unsetenv("GRADEDGEO_THREADS");
  }
  o.require(identical == static_cast<int>(docs.size()), "identical summaries");
  o.detail << identical << "/" << docs.size() << " configs byte-identical across 3 runs (1 and 4 threads)";
}

}  // namespace

json CriterionResult::to_json() const { return {{"id", id}, {"title", title}, {"pass", pass}, {"detail", detail}}; }

std::string CriterionResult::line() const {
  char head[16];
  std::snprintf(head, sizeof head, "%02d", id);
  return std::string(pass ? "[PASS] " : "[FAIL] ") + head + " " + title + ": " + detail + " (" + fmt(seconds) +
         " s)";
}

std::vector<CriterionResult> run_acceptance(const std::function<void(const CriterionResult&)>& on_result) {
  SharedState shared;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"flat oracle", flat_oracle},
      {"homogeneity", homogeneity},
      {"exp differential at zero", exp_differential},
      {"connection contract", connection_contract},
      {"affine-invariant SPD oracle", affine_oracle},
      {"Gauss lemma", [&](Outcome& o) { gauss_lemma(o, shared); }},
      {"minimality", minimality},
      {"Euler-Lagrange residual", euler_lagrange},
      {"flow laws", flow_laws},
      {"sphere injectivity and distance", [&](Outcome& o) { sphere_checks(o, shared); }},
      {"Ricci demonstration", ricci},
      {"Finsler compatibility", finsler},
      {"determinism", determinism},
  };
  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    CriterionResult r;
    r.id = static_cast<int>(i + 1);
    r.title = criteria[i].first;
    r.pass = o.pass;
    r.detail = o.detail.str();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace gradedgeo
