#include "gradedgeo/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "gradedgeo/acceptance.hpp"
#include "gradedgeo/catalog.hpp"
#include "gradedgeo/connection.hpp"
#include "gradedgeo/ricci.hpp"
#include "gradedgeo/variational.hpp"

namespace gradedgeo {

namespace {

using json = nlohmann::json;

Vec arg_vec(const RunConfig& cfg, const char* key) { return to_vec(cfg.args.at(key).get<std::vector<double>>()); }
double arg_num(const RunConfig& cfg, const char* key) { return cfg.args.at(key).get<double>(); }
int arg_int(const RunConfig& cfg, const char* key) { return cfg.args.at(key).get<int>(); }

OdeOptions ode_options(const RunConfig& cfg) {
  OdeOptions o;
  o.rtol = cfg.rtol;
  o.atol = cfg.atol;
  return o;
}

std::string artifact(const RunConfig& cfg, const std::string& name, CommandOutcome& out) {
  if (cfg.out.empty()) return {};
  std::filesystem::create_directories(cfg.out);
  const std::string path = (std::filesystem::path(cfg.out) / name).string();
  out.artifacts.push_back(path);
  return path;
}

void level_speeds(const LevelMetricFamily& family, const CurvePath& path, json& summary) {
  json drift = json::array();
  for (int n = 1; n <= family.levels(); ++n) {
    const double s0 = family.norm(n, path.nodes().front(), path.velocities().front());
    double worst = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      worst = std::max(worst, std::abs(family.norm(n, path.nodes()[i], path.velocities()[i]) - s0));
    }
    drift.push_back(worst);
  }
  summary["speed_drift"] = drift;
}

CommandOutcome cmd_geodesic(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const Vec x0 = arg_vec(cfg, "x0");
  const double t = arg_num(cfg, "t");
  Vec v0 = arg_vec(cfg, "v0");
  if (cfg.args.contains("y")) {
    const ShootingReport shot = connect(prob.spray, x0, arg_vec(cfg, "y"));
    out.summary["mode"] = "connect";
    out.summary["shooting"] = shot.to_json();
    if (!shot.converged) {
      out.exit_code = exit_numerical;
      out.summary["error"] = {{"reason", "shooting_failed"}, {"message", shot.failure}};
      return out;
    }
    v0 = shot.v;
  } else {
    out.summary["mode"] = "shoot";
  }
  const auto sol = integrate_geodesic(prob.spray, x0, v0, cfg.args.contains("y") ? 1.0 : t, ode_options(cfg),
                                      arg_int(cfg, "grid"));
  out.summary["x0"] = to_std(x0);
  out.summary["v0"] = to_std(v0);
  out.summary["endpoint"] = to_std(sol.x_reached);
  out.summary["end_velocity"] = to_std(sol.v_reached);
  out.summary["stats"] = sol.stats_json();
  if (!sol.completed()) {
    out.exit_code = exit_numerical;
    out.summary["error"] = {{"reason", to_string(sol.reason)}, {"message", "geodesic stopped before the horizon"}};
    return out;
  }
  out.summary["equation_residual"] = geodesic_equation_residual(prob.spray, sol);
  level_speeds(prob.family, sol.path(), out.summary);
  if (const auto p = artifact(cfg, "geodesic.csv", out); !p.empty()) sol.path().save_csv(p);
  return out;
}

CommandOutcome cmd_exp(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const Vec x = arg_vec(cfg, "x"), v = arg_vec(cfg, "v");
  out.summary["x"] = to_std(x);
  out.summary["v"] = to_std(v);
  out.summary["exp"] = to_std(exp_map(prob.spray, x, v, ode_options(cfg)));
  const Mat j = exp_jacobian(prob.spray, x, v);
  out.summary["jacobian_condition"] = condition_number(j);
  out.summary["jacobian_determinant"] = j.determinant();
  return out;
}

CommandOutcome cmd_flow(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const VectorField X = catalog_field(cfg.args.at("field").get<std::string>(), prob.dim(), cfg.args.at("field_params"));
  const Vec x0 = arg_vec(cfg, "x0");
  const auto opts = ode_options(cfg);
  const auto curve = integrate_vector_field(X, x0, arg_num(cfg, "t"), prob.chart(), opts);
  out.summary["field"] = X.name;
  out.summary["x0"] = to_std(x0);
  // stopping early is an answer here (the flow domain), not a failure
  out.summary["completed"] = curve.completed();
  out.summary[curve.completed() ? "endpoint" : "last_state"] = to_std(curve.x_reached);
  out.summary["stats"] = curve.stats_json();
  out.summary["flow_domain"] = flow_domain(X, x0, arg_num(cfg, "horizon"), prob.chart(), opts).to_json();
  out.summary["local_flow"] = local_flow(X, {x0}, arg_num(cfg, "a"), prob.chart(), opts).to_json();
  if (const auto p = artifact(cfg, "flow.csv", out); !p.empty() && curve.t.size() >= 2) curve.path().save_csv(p);
  return out;
}

CommandOutcome cmd_distance(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const Vec x = arg_vec(cfg, "x"), y = arg_vec(cfg, "y");
  DistanceOptions opts;
  opts.shooting.ode.rtol = cfg.rtol;
  opts.shooting.ode.atol = cfg.atol;
  const DistanceReport rep = finsler_distance(prob.family, prob.spray, x, y, opts);
  out.summary = rep.to_json();
  out.summary["x"] = to_std(x);
  out.summary["y"] = to_std(y);
  return out;
}

CurvePath curve_argument(const RunConfig& cfg, const ChartedProblem& prob, const char* from, const char* dir) {
  if (cfg.args.contains("curve")) return CurvePath::load_csv(cfg.args.at("curve").get<std::string>());
  if (std::string(from) == "x") return straight_segment(arg_vec(cfg, "x"), arg_vec(cfg, "y"), 65);
  const auto sol = integrate_geodesic(prob.spray, arg_vec(cfg, from), arg_vec(cfg, dir), arg_num(cfg, "t"),
                                      ode_options(cfg), arg_int(cfg, "grid"));
  if (!sol.completed()) throw NumericalError(to_string(sol.reason), "geodesic stopped before the horizon");
  return sol.path();
}

CommandOutcome cmd_length(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const CurvePath curve = curve_argument(cfg, prob, "x", "y");
  json levels = json::array();
  for (int n = 1; n <= prob.levels(); ++n) {
    const double L = length_n(prob.family, n, curve);
    const double E = energy_n(prob.family, n, curve);
    levels.push_back({{"level", n},
                      {"length", L},
                      {"energy", E},
                      {"cauchy_schwarz_slack", 2.0 * (curve.t_end() - curve.t_begin()) * E - L * L}});
  }
  out.summary["levels"] = levels;
  out.summary["nodes"] = curve.size();
  return out;
}

CommandOutcome cmd_el_residual(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const CurvePath curve = curve_argument(cfg, prob, "x0", "v0");
  json levels = json::array();
  for (int n = 1; n <= prob.levels(); ++n) {
    const ElResidual r = el_residual(prob.family, n, curve);
    json j = r.to_json();
    j["level"] = n;
    levels.push_back(j);
    if (n == prob.family.driving_level()) {
      if (const auto p = artifact(cfg, "el_residual.csv", out); !p.empty()) r.save_csv(p);
    }
  }
  out.summary["levels"] = levels;
  out.summary["nodes"] = curve.size();
  return out;
}

CommandOutcome cmd_gauss(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const GaussReport rep = gauss_check(prob.family, prob.spray, arg_vec(cfg, "x"), arg_num(cfg, "epsilon"),
                                      arg_int(cfg, "s_samples"), arg_int(cfg, "t_samples"));
  out.summary = rep.to_json();
  const bool pass = rep.orthogonality_defect <= 1e-5 && rep.radial_speed_defect <= 1e-6;
  out.summary["pass"] = pass;
  out.exit_code = pass ? exit_ok : exit_check_failed;
  return out;
}

CommandOutcome cmd_finsler_check(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const FinslerCheckReport rep = finsler_check(prob.family, arg_vec(cfg, "x0"), arg_num(cfg, "k"),
                                               arg_num(cfg, "radius"), arg_int(cfg, "samples"), cfg.seed);
  out.summary = rep.to_json();
  out.exit_code = rep.pass ? exit_ok : exit_check_failed;
  return out;
}

CommandOutcome cmd_minimality(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const Vec x = arg_vec(cfg, "x"), y = arg_vec(cfg, "y");
  const ShootingReport shot = connect(prob.spray, x, y);
  out.summary["shooting"] = shot.to_json();
  if (!shot.converged) {
    out.exit_code = exit_numerical;
    out.summary["error"] = {{"reason", "shooting_failed"}, {"message", shot.failure}};
    return out;
  }
  const auto sol = integrate_geodesic(prob.spray, x, shot.v, 1.0, ode_options(cfg), 401);
  if (!sol.completed()) throw NumericalError(to_string(sol.reason), "connecting geodesic left the chart");
  const MinimalityReport rep =
      minimality_test(prob.family, sol.path(), arg_int(cfg, "trials"), arg_num(cfg, "amplitude"), cfg.seed);
  out.summary["minimality"] = rep.to_json();
  out.exit_code = rep.pass ? exit_ok : exit_check_failed;
  if (const auto p = artifact(cfg, "geodesic.csv", out); !p.empty()) sol.path().save_csv(p);
  return out;
}

CommandOutcome cmd_transport(const RunConfig& cfg) {
  const ChartedProblem prob = catalog_problem(cfg.problem, cfg.params);
  CommandOutcome out;
  const Vec x0 = arg_vec(cfg, "x0"), w0 = arg_vec(cfg, "w0");
  const int grid = arg_int(cfg, "grid");
  const auto opts = ode_options(cfg);
  TransportResult res;
  if (cfg.args.contains("circle")) {
    if (prob.dim() != 2) throw DimensionError("transport around a circle needs a 2-dimensional problem");
    const double r = cfg.args.at("circle").get<double>();
    const double two_pi = 2.0 * std::numbers::pi;
    CurveFunction loop{
        [=](double t) { return Vec(x0 + r * (Vec(2) << std::cos(two_pi * t), std::sin(two_pi * t)).finished()); },
        [=](double t) {
          return Vec(r * two_pi * (Vec(2) << -std::sin(two_pi * t), std::cos(two_pi * t)).finished());
        },
        0.0, 1.0};
    res = parallel_transport(prob.spray, prob.family, loop, w0, opts, grid);
    out.summary["curve"] = {{"kind", "circle"}, {"center", to_std(x0)}, {"radius", r}};
    // rotation angle in a driving-level orthonormal frame at the start point
    const Mat g = prob.family.gram(prob.family.driving_level(), loop.position(0.0));
    const Mat u = Eigen::LLT<Mat>(g).matrixU();
    const Vec a = u * w0, b = u * res.lift.nodes().back();
    out.summary["rotation_angle"] = std::atan2(a(0) * b(1) - a(1) * b(0), a.dot(b));
  } else {
    const auto sol = integrate_geodesic(prob.spray, x0, arg_vec(cfg, "v0"), arg_num(cfg, "t"), opts, grid);
    if (!sol.completed()) throw NumericalError(to_string(sol.reason), "transport curve left the chart");
    res = parallel_transport(prob.spray, prob.family, sol.path(), w0, opts);
    out.summary["curve"] = {{"kind", "geodesic"}, {"x0", to_std(x0)}, {"v0", cfg.args.at("v0")}};
  }
  out.summary["transport"] = res.to_json();
  if (const auto p = artifact(cfg, "transport.csv", out); !p.empty()) res.lift.save_csv(p);
  return out;
}

CommandOutcome cmd_ricci(const RunConfig& cfg) {
  CommandOutcome out;
  SpdMetricSpace space;
  space.m = arg_int(cfg, "m");
  space.kind = spd_kind_from_string(cfg.args.at("kind").get<std::string>());
  space.weights = cfg.args.at("weights").get<std::vector<double>>();
  RicciOptions opts;
  opts.grid_size = arg_int(cfg, "grid");
  opts.seed = cfg.seed;
  const RicciReport rep = ricci_nongeodesic_report(space, arg_num(cfg, "lambda"), Mat::Identity(space.m, space.m),
                                                   arg_num(cfg, "T"), opts);
  out.summary = rep.to_json();
  return out;
}

CommandOutcome cmd_selftest(const std::function<void(const std::string&)>& progress) {
  CommandOutcome out;
  json criteria = json::array();
  bool all = true;
  for (const auto& r : run_acceptance([&](const CriterionResult& c) {
         if (progress) progress(c.line());
       })) {
    criteria.push_back(r.to_json());
    all = all && r.pass;
  }
  out.summary["criteria"] = criteria;
  out.summary["pass"] = all;
  out.exit_code = all ? exit_ok : exit_check_failed;
  return out;
}

CommandOutcome failure(int code, const std::string& reason, const std::string& message) {
  CommandOutcome out;
  out.exit_code = code;
  out.summary["error"] = {{"reason", reason}, {"message", message}};
  return out;
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << " = " << j.dump() << '\n';
  }
}

}  // namespace

CommandOutcome run_command(const RunConfig& cfg, const std::function<void(const std::string&)>& progress) {
  try {
    const std::string& c = cfg.command;
    if (c == "geodesic") return cmd_geodesic(cfg);
    if (c == "exp") return cmd_exp(cfg);
    if (c == "flow") return cmd_flow(cfg);
    if (c == "distance") return cmd_distance(cfg);
    if (c == "length") return cmd_length(cfg);
    if (c == "el-residual") return cmd_el_residual(cfg);
    if (c == "gauss") return cmd_gauss(cfg);
    if (c == "finsler-check") return cmd_finsler_check(cfg);
    if (c == "minimality") return cmd_minimality(cfg);
    if (c == "transport") return cmd_transport(cfg);
    if (c == "ricci-demo") return cmd_ricci(cfg);
    if (c == "selftest") return cmd_selftest(progress);
    return failure(exit_usage, "unknown_command", "unknown command '" + c + "'");
  } catch (const NumericalError& e) {
    return failure(exit_numerical, e.reason(), e.what());
  } catch (const DomainError& e) {
    return failure(exit_usage, "domain", e.what());
  } catch (const DimensionError& e) {
    return failure(exit_usage, "dimension", e.what());
  } catch (const std::invalid_argument& e) {
    return failure(exit_usage, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return failure(exit_numerical, "internal", e.what());
  }
}

json output_document(const RunConfig& cfg, const CommandOutcome& outcome, double seconds) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"envelope",
           {{"program", "gradedgeo"}, {"timestamp", stamp}, {"seconds", seconds}, {"artifacts", outcome.artifacts}}},
          {"header", {{"config", cfg.to_json()}}},
          {"summary", outcome.summary},
          {"exit_code", outcome.exit_code}};
}

std::string render_pretty(const json& doc) {
  std::ostringstream os;
  flatten(doc, "", os);
  return os.str();
}

}  // namespace gradedgeo
