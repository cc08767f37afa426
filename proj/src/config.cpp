#include "gradedgeo/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "gradedgeo/catalog.hpp"

namespace gradedgeo {

namespace {

using json = nlohmann::json;

enum class ArgType { vec, num, integer, str, boolean, object };

struct ArgSpec {
  std::string name;
  ArgType type;
  bool optional = false;  ///< no default; absent unless given
};

const std::map<std::string, std::vector<ArgSpec>>& arg_table() {
  using T = ArgType;
  static const std::map<std::string, std::vector<ArgSpec>> table{
      {"geodesic", {{"x0", T::vec}, {"v0", T::vec}, {"t", T::num}, {"grid", T::integer}, {"y", T::vec, true}}},
      {"exp", {{"x", T::vec}, {"v", T::vec}}},
      {"flow",
       {{"field", T::str},
        {"field_params", T::object},
        {"x0", T::vec},
        {"t", T::num},
        {"horizon", T::num},
        {"a", T::num}}},
      {"distance", {{"x", T::vec}, {"y", T::vec}}},
      {"length", {{"x", T::vec}, {"y", T::vec}, {"curve", T::str, true}}},
      {"el-residual",
       {{"x0", T::vec}, {"v0", T::vec}, {"t", T::num}, {"grid", T::integer}, {"curve", T::str, true}}},
      {"gauss", {{"x", T::vec}, {"epsilon", T::num}, {"s_samples", T::integer}, {"t_samples", T::integer}}},
      {"finsler-check", {{"x0", T::vec}, {"k", T::num}, {"radius", T::num}, {"samples", T::integer}}},
      {"minimality", {{"x", T::vec}, {"y", T::vec}, {"trials", T::integer}, {"amplitude", T::num}}},
      {"transport",
       {{"x0", T::vec}, {"v0", T::vec}, {"w0", T::vec}, {"t", T::num}, {"grid", T::integer},
        {"circle", T::num, true}}},
      {"ricci-demo",
       {{"kind", T::str}, {"lambda", T::num}, {"T", T::num}, {"m", T::integer}, {"grid", T::integer},
        {"weights", T::vec}}},
      {"selftest", {}},
  };
  return table;
}

const std::vector<std::string> kTopKeys{"command", "problem", "rtol", "atol", "seed", "out",
                                        "pretty",  "levels",  "driving_level", "args"};

bool type_ok(const json& v, ArgType t) {
  switch (t) {
    case ArgType::vec:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    case ArgType::num: return v.is_number();
    case ArgType::integer: return v.is_number_integer();
    case ArgType::str: return v.is_string();
    case ArgType::boolean: return v.is_boolean();
    case ArgType::object: return v.is_object();
  }
  return false;
}

const char* type_name(ArgType t) {
  switch (t) {
    case ArgType::vec: return "an array of numbers";
    case ArgType::num: return "a number";
    case ArgType::integer: return "an integer";
    case ArgType::str: return "a string";
    case ArgType::boolean: return "a boolean";
    case ArgType::object: return "an object";
  }
  return "?";
}

template <typename F>
auto field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + path + "' has the wrong type");
  }
}

json unit(int d, int k, double s = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(d), 0.0);
  v[static_cast<std::size_t>(std::min(k, d - 1))] = s;
  return v;
}

json shifted(const Vec& ref, int k, double s) {
  Vec p = ref;
  p(std::min<Eigen::Index>(k, p.size() - 1)) += s;
  return to_std(p);
}

json command_defaults(const std::string& cmd, const ChartedProblem& prob) {
  const int d = prob.dim();
  const Vec ref = prob.family.domain().reference_point();
  const json r = to_std(ref);
  if (cmd == "geodesic") return {{"x0", r}, {"v0", unit(d, 0)}, {"t", 1.0}, {"grid", 101}};
  if (cmd == "exp") return {{"x", r}, {"v", unit(d, 0, 0.5)}};
  if (cmd == "flow") {
    return {{"field", "identity"}, {"field_params", json::object()}, {"x0", shifted(ref, 0, 0.5)},
            {"t", 1.0},           {"horizon", 10.0},                {"a", 0.5}};
  }
  if (cmd == "distance" || cmd == "length") return {{"x", r}, {"y", shifted(ref, 0, 0.5)}};
  if (cmd == "el-residual") return {{"x0", r}, {"v0", unit(d, 0, 0.5)}, {"t", 1.0}, {"grid", 1001}};
  if (cmd == "gauss") return {{"x", r}, {"epsilon", 0.5}, {"s_samples", 8}, {"t_samples", 16}};
  if (cmd == "finsler-check") return {{"x0", r}, {"k", 2.0}, {"radius", 0.5}, {"samples", 400}};
  if (cmd == "minimality") return {{"x", r}, {"y", shifted(ref, 0, 0.5)}, {"trials", 100}, {"amplitude", 0.05}};
  if (cmd == "transport") {
    return {{"x0", r}, {"v0", unit(d, 0)}, {"w0", unit(d, 1)}, {"t", 1.0}, {"grid", 201}};
  }
  if (cmd == "ricci-demo") {
    return {{"kind", "ebin"}, {"lambda", 1.0}, {"T", 0.25}, {"m", 2}, {"grid", 101}, {"weights", {1.0, 2.0}}};
  }
  return json::object();
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : arg_table()) out.push_back(k);
    return out;
  }();
  return names;
}

json RunConfig::to_json() const {
  return {{"command", command}, {"problem", {{"id", problem}, {"params", params}}},
          {"rtol", rtol},       {"atol", atol},
          {"seed", seed},       {"out", out},
          {"pretty", pretty},   {"args", args}};
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kTopKeys.begin(), kTopKeys.end(), key) == kTopKeys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  RunConfig cfg;
  cfg.command = field("command", [&] { return doc.value("command", std::string("selftest")); });
  const auto& table = arg_table();
  if (!table.count(cfg.command)) throw ConfigError("unknown command '" + cfg.command + "'");

  if (doc.contains("problem")) {
    const json& p = doc.at("problem");
    if (p.is_string()) {
      cfg.problem = p.get<std::string>();
    } else if (p.is_object()) {
      for (const auto& [key, value] : p.items()) {
        if (key != "id" && key != "params") throw ConfigError("unknown config key 'problem." + key + "'");
      }
      cfg.problem = field("problem.id", [&] { return p.value("id", std::string("flat")); });
      if (p.contains("params")) {
        if (!p.at("params").is_object()) throw ConfigError("config field 'problem.params' must be an object");
        cfg.params = p.at("params");
      }
    } else {
      throw ConfigError("config field 'problem' must be a string or an object");
    }
  }
  const auto& ids = catalog_problem_ids();
  if (std::find(ids.begin(), ids.end(), cfg.problem) == ids.end()) {
    throw ConfigError("unknown problem '" + cfg.problem + "'");
  }
  cfg.rtol = field("rtol", [&] { return doc.value("rtol", cfg.rtol); });
  cfg.atol = field("atol", [&] { return doc.value("atol", cfg.atol); });
  if (!(cfg.rtol > 0.0)) throw ConfigError("config field 'rtol' must be positive");
  if (!(cfg.atol > 0.0)) throw ConfigError("config field 'atol' must be positive");
  if (doc.contains("seed")) {
    const auto& sd = doc.at("seed");
    const bool ok = sd.is_number_unsigned() || (sd.is_number_integer() && sd.get<long long>() >= 0);
    if (!ok) throw ConfigError("config field 'seed' must be a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  cfg.out = field("out", [&] { return doc.value("out", std::string()); });
  cfg.pretty = field("pretty", [&] { return doc.value("pretty", false); });

  if (doc.contains("levels")) {
    const int n = field("levels", [&] { return doc.at("levels").get<int>(); });
    if (n < 1) throw ConfigError("config field 'levels' must be >= 1");
    if (cfg.params.contains("weights") && static_cast<int>(cfg.params.at("weights").size()) != n) {
      throw ConfigError("config field 'levels' disagrees with problem.params.weights");
    }
    if (!cfg.params.contains("grams")) cfg.params["levels"] = n;
  }
  if (doc.contains("driving_level")) {
    cfg.params["driving_level"] = field("driving_level", [&] { return doc.at("driving_level").get<int>(); });
  }

  std::optional<ChartedProblem> prob;
  try {
    prob.emplace(catalog_problem(cfg.problem, cfg.params));
  } catch (const std::exception& e) {
    throw ConfigError("problem." + cfg.problem + ": " + e.what());
  }
  cfg.params = prob->params;

  const json args = doc.value("args", json::object());
  if (!args.is_object()) throw ConfigError("config field 'args' must be an object");
  const auto& specs = table.at(cfg.command);
  for (const auto& [key, value] : args.items()) {
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const ArgSpec& s) { return s.name == key; });
    if (it == specs.end()) throw ConfigError("unknown config key 'args." + key + "' for command " + cfg.command);
    if (!type_ok(value, it->type)) {
      throw ConfigError("config field 'args." + key + "' must be " + type_name(it->type));
    }
    if (it->type == ArgType::vec && cfg.command != "ricci-demo" &&
        static_cast<int>(value.size()) != prob->dim()) {
      throw ConfigError("config field 'args." + key + "' must have " + std::to_string(prob->dim()) + " entries");
    }
  }
  cfg.args = command_defaults(cfg.command, *prob);
  for (const auto& [key, value] : args.items()) cfg.args[key] = value;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace gradedgeo
