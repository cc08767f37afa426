// gradedgeo: geodesics, covariant derivatives and Finsler lengths on graded
// seminorm model spaces.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gradedgeo/cli.hpp"
#include "gradedgeo/config.hpp"

namespace {

using json = nlohmann::json;
using gradedgeo::ConfigError;

enum class Kind { vec, num, integer, str };

struct Flag {
  std::string flag;
  std::string key;
  Kind kind;
  std::string help;
};

// subcommand options and the config args they fill
const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> help{
      {"geodesic", "integrate a geodesic, or connect x0 to y by shooting"},
      {"exp", "exponential map and the condition of its differential"},
      {"flow", "integral curve of a vector field with its flow-law checks"},
      {"distance", "level distances rho_n and the combined distance rho"},
      {"length", "level lengths and energies of a segment or a CSV curve"},
      {"el-residual", "Euler-Lagrange residual of a geodesic or a CSV curve at every level"},
      {"gauss", "orthogonality and radial speed defects of the Gauss lemma"},
      {"finsler-check", "compatibility ratio of consecutive level norms"},
      {"minimality", "randomized local minimality test of a connecting geodesic"},
      {"transport", "parallel transport along a geodesic or a coordinate circle"},
      {"ricci-demo", "checks whether a Ricci-flow curve of metrics is a geodesic"},
      {"selftest", "runs the acceptance criteria"},
  };
  return help;
}

const std::map<std::string, std::vector<Flag>>& flag_table() {
  static const std::map<std::string, std::vector<Flag>> table{
      {"geodesic",
       {{"--x0", "x0", Kind::vec, "start point"},
        {"--v0", "v0", Kind::vec, "initial velocity"},
        {"--t", "t", Kind::num, "end time"},
        {"--grid", "grid", Kind::integer, "output grid size"},
        {"--y", "y", Kind::vec, "target point (connect by shooting)"}}},
      {"exp", {{"--x", "x", Kind::vec, "base point"}, {"--v", "v", Kind::vec, "tangent vector"}}},
      {"flow",
       {{"--field", "field", Kind::str, "catalog vector field"},
        {"--x0", "x0", Kind::vec, "start point"},
        {"--t", "t", Kind::num, "end time"},
        {"--horizon", "horizon", Kind::num, "flow-domain horizon"},
        {"--a", "a", Kind::num, "local-flow half width"}}},
      {"distance", {{"--x", "x", Kind::vec, "first point"}, {"--y", "y", Kind::vec, "second point"}}},
      {"length",
       {{"--x", "x", Kind::vec, "segment start"},
        {"--y", "y", Kind::vec, "segment end"},
        {"--curve", "curve", Kind::str, "curve CSV (t,x_k..,v_k..)"}}},
      {"el-residual",
       {{"--x0", "x0", Kind::vec, "geodesic start"},
        {"--v0", "v0", Kind::vec, "geodesic velocity"},
        {"--t", "t", Kind::num, "end time"},
        {"--grid", "grid", Kind::integer, "grid size"},
        {"--curve", "curve", Kind::str, "curve CSV instead of a geodesic"}}},
      {"gauss",
       {{"--x", "x", Kind::vec, "base point"},
        {"--epsilon", "epsilon", Kind::num, "geodesic sphere radius"},
        {"--s-samples", "s_samples", Kind::integer, "radial samples"},
        {"--t-samples", "t_samples", Kind::integer, "angular samples"}}},
      {"finsler-check",
       {{"--x0", "x0", Kind::vec, "ball center"},
        {"--k", "k", Kind::num, "compatibility constant"},
        {"--radius", "radius", Kind::num, "ball radius"},
        {"--samples", "samples", Kind::integer, "sample count"}}},
      {"minimality",
       {{"--x", "x", Kind::vec, "geodesic start"},
        {"--y", "y", Kind::vec, "geodesic end"},
        {"--trials", "trials", Kind::integer, "perturbation trials"},
        {"--amplitude", "amplitude", Kind::num, "perturbation amplitude"}}},
      {"transport",
       {{"--x0", "x0", Kind::vec, "curve start (circle center with --circle)"},
        {"--v0", "v0", Kind::vec, "geodesic velocity of the curve"},
        {"--w0", "w0", Kind::vec, "vector to transport"},
        {"--t", "t", Kind::num, "end time"},
        {"--grid", "grid", Kind::integer, "grid size"},
        {"--circle", "circle", Kind::num, "transport once around a circle of this radius"}}},
      {"ricci-demo",
       {{"--kind", "kind", Kind::str, "flat | affine_invariant | ebin"},
        {"--lambda", "lambda", Kind::num, "Einstein constant"},
        {"--T", "T", Kind::num, "horizon"},
        {"--m", "m", Kind::integer, "matrix size"},
        {"--grid", "grid", Kind::integer, "grid size"},
        {"--weights", "weights", Kind::vec, "level weights"}}},
      {"selftest", {}},
  };
  return table;
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("flag " + flag + ": '" + text + "' is not a comma-separated list of numbers");
    }
  }
  if (out.empty()) throw ConfigError("flag " + flag + " needs at least one number");
  return out;
}

json convert(const Flag& f, const std::string& text) {
  try {
    switch (f.kind) {
      case Kind::vec: return parse_list(f.flag, text);
      case Kind::num: return std::stod(text);
      case Kind::integer: return std::stoll(text);
      case Kind::str: return text;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("flag " + f.flag + ": cannot parse '" + text + "'");
  }
  return text;
}

json param_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    if (text.find(',') != std::string::npos) return parse_list("--param", text);
    return text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradedgeo: geodesics and Finsler lengths on graded seminorm spaces"};
  app.require_subcommand(1);

  std::string config_path, problem, out;
  std::vector<std::string> params;
  double rtol = 0.0, atol = 0.0;
  std::uint64_t seed = 0;
  int levels = 0, driving = 0;
  bool pretty = false;
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_problem = app.add_option("--problem", problem, "catalog problem id");
  app.add_option("--param", params, "problem parameter key=value (JSON value)");
  auto* o_rtol = app.add_option("--rtol", rtol, "relative tolerance");
  auto* o_atol = app.add_option("--atol", atol, "absolute tolerance");
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_out = app.add_option("--out", out, "directory for CSV artifacts");
  auto* o_levels = app.add_option("--levels", levels, "number of levels N");
  auto* o_driving = app.add_option("--driving-level", driving, "level whose spray drives geodesics");
  app.add_flag("--pretty", pretty, "human-readable output instead of JSON");
  for (auto* o : {o_config, o_problem, o_rtol, o_atol, o_seed, o_out, o_levels, o_driving}) o->configurable(false);
  app.fallthrough();

  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, flags] : flag_table()) {
    auto* sub = app.add_subcommand(name, command_help().at(name));
    subs[name] = sub;
    for (const auto& f : flags) sub->add_option(f.flag, given[name][f.key], f.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gradedgeo::exit_usage;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }

  const auto start = std::chrono::steady_clock::now();
  gradedgeo::RunConfig cfg;
  try {
    json doc = json::object();
    if (*o_config) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot read config file '" + config_path + "'");
      try {
        doc = json::parse(is);
      } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + config_path + "' is not valid JSON: " + e.what());
      }
      if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    }
    doc["command"] = command;
    if (*o_problem || !params.empty()) {
      json p = doc.contains("problem") ? doc["problem"] : json::object();
      if (p.is_string()) p = json{{"id", p}};
      if (*o_problem) p["id"] = problem;
      for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
        p["params"][kv.substr(0, eq)] = param_value(kv.substr(eq + 1));
      }
      doc["problem"] = p;
    }
    if (*o_rtol) doc["rtol"] = rtol;
    if (*o_atol) doc["atol"] = atol;
    if (*o_seed) doc["seed"] = seed;
    if (*o_out) doc["out"] = out;
    if (*o_levels) doc["levels"] = levels;
    if (*o_driving) doc["driving_level"] = driving;
    if (pretty) doc["pretty"] = true;
    for (const auto& f : flag_table().at(command)) {
      if (subs.at(command)->count(f.flag) > 0) doc["args"][f.key] = convert(f, given[command][f.key]);
    }
    cfg = gradedgeo::parse_config(doc);
  } catch (const ConfigError& e) {
    const json err{{"exit_code", gradedgeo::exit_usage},
                   {"summary", {{"error", {{"reason", "config"}, {"message", e.what()}}}}}};
    std::cout << err.dump(2) << std::endl;
    std::cerr << "gradedgeo: " << e.what() << std::endl;
    return gradedgeo::exit_usage;
  }

  const auto outcome = gradedgeo::run_command(cfg, [](const std::string& line) { std::cerr << line << std::endl; });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json doc = gradedgeo::output_document(cfg, outcome, seconds);
  if (cfg.pretty) {
    std::cout << gradedgeo::render_pretty(doc);
  } else {
    std::cout << doc.dump(2) << std::endl;
  }
  return outcome.exit_code;
}
