#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace dipolekit::cli {

using nlohmann::json;

namespace {

struct Overrides {
  std::optional<std::string> units, format, out, m1, m2, r, e_r, estimator, r_over_L;
  std::optional<double> L, omega, tol, phi_start, phi_end, omega_cut, s_max;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_phi, shell_max, n_s, count;
};

UnitMode parse_units(const std::string& s) {
  if (s == "natural") return UnitMode::Natural;
  if (s == "si") return UnitMode::SI;
  throw ConfigError("units", "expected natural or si, got '" + s + "'");
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("format", "expected csv or json, got '" + s + "'");
}

Estimator parse_estimator(const std::string& s) {
  if (s == "full") return Estimator::FullSum;
  if (s == "near") return Estimator::NearResonant;
  throw ConfigError("estimator", "expected full or near, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(field, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError(field, "expected a comma-separated list of numbers");
  return out;
}

Vector3 json_vector(const json& j, const std::string& field) {
  if (j.is_string()) return parse_vector(j.get<std::string>(), field);
  if (!j.is_array() || j.size() != 3) throw ConfigError(field, "expected an array of three numbers");
  Vector3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ConfigError(field, "expected an array of three numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

template <typename T>
T json_number(const json& j, const std::string& field) {
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  } else {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
  }
  return j.get<T>();
}

std::string json_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.units) cfg.units = parse_units(*o.units);
  if (o.format) cfg.format = parse_format(*o.format);
  if (o.out) cfg.out = *o.out;
  if (o.m1) cfg.m1 = parse_vector(*o.m1, "m1");
  if (o.m2) cfg.m2 = parse_vector(*o.m2, "m2");
  if (o.r) cfg.r = parse_vector(*o.r, "r");
  if (o.e_r) cfg.e_r = parse_vector(*o.e_r, "e_r");
  if (o.estimator) cfg.estimator = parse_estimator(*o.estimator);
  if (o.r_over_L) cfg.r_over_L = parse_list(*o.r_over_L, "r_over_L");
  if (o.L) cfg.L = *o.L;
  if (o.omega) cfg.omega = *o.omega;
  if (o.tol) cfg.tol = *o.tol;
  if (o.phi_start) cfg.phi_start = *o.phi_start;
  if (o.phi_end) cfg.phi_end = *o.phi_end;
  if (o.omega_cut) cfg.omega_cut = *o.omega_cut;
  if (o.s_max) cfg.s_max = *o.s_max;
  if (o.seed) cfg.seed = *o.seed;
  if (o.n_phi) cfg.n_phi = *o.n_phi;
  if (o.shell_max) cfg.shell_max = *o.shell_max;
  if (o.n_s) cfg.n_s = *o.n_s;
  if (o.count) cfg.count = *o.count;
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
}

void require_finite(const Vector3& v, const char* field) {
  if (!v.allFinite()) throw ConfigError(field, "must be finite");
}

} // namespace

const char* to_string(Command c) {
  switch (c) {
  case Command::Free: return "free";
  case Command::Box: return "box";
  case Command::Sweep: return "sweep";
  case Command::Kernel: return "kernel";
  case Command::Check: return "check";
  }
  return "?";
}

Vector3 parse_vector(const std::string& text, const std::string& field) {
  std::vector<double> v;
  try {
    v = parse_list(text, field);
  } catch (const ConfigError&) {
    throw ConfigError(field, "expected three comma-separated numbers, got '" + text + "'");
  }
  if (v.size() != 3) throw ConfigError(field, "expected three comma-separated numbers, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "units") cfg.units = parse_units(json_string(value, key));
    else if (key == "format") cfg.format = parse_format(json_string(value, key));
    else if (key == "out") cfg.out = json_string(value, key);
    else if (key == "m1") cfg.m1 = json_vector(value, key);
    else if (key == "m2") cfg.m2 = json_vector(value, key);
    else if (key == "r") cfg.r = json_vector(value, key);
    else if (key == "e_r") cfg.e_r = json_vector(value, key);
    else if (key == "estimator") cfg.estimator = parse_estimator(json_string(value, key));
    else if (key == "L") cfg.L = json_number<double>(value, key);
    else if (key == "omega") cfg.omega = json_number<double>(value, key);
    else if (key == "tol") cfg.tol = json_number<double>(value, key);
    else if (key == "phi_start") cfg.phi_start = json_number<double>(value, key);
    else if (key == "phi_end") cfg.phi_end = json_number<double>(value, key);
    else if (key == "omega_cut") cfg.omega_cut = json_number<double>(value, key);
    else if (key == "s_max") cfg.s_max = json_number<double>(value, key);
    else if (key == "seed") cfg.seed = json_number<std::uint64_t>(value, key);
    else if (key == "n_phi") cfg.n_phi = json_number<int>(value, key);
    else if (key == "shell_max") cfg.shell_max = json_number<int>(value, key);
    else if (key == "n_s") cfg.n_s = json_number<int>(value, key);
    else if (key == "count") cfg.count = json_number<int>(value, key);
    else if (key == "r_over_L") {
      if (!value.is_array() || value.empty()) throw ConfigError(key, "expected a non-empty array of numbers");
      cfg.r_over_L.clear();
      for (const auto& v : value) cfg.r_over_L.push_back(json_number<double>(v, key));
    } else {
      throw ConfigError("config", "unknown key '" + key + "'");
    }
  }
}

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& help_out) {
  CLI::App app{"Field-mediated magnetic dipole-dipole couplings in free space and in a periodic box", "dipolekit"};
  std::string command, config_path;
  Overrides o;
  app.add_option("command", command, "free | box | sweep | kernel | check")->required();
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--m1", o.m1, "moment of dipole 1, x,y,z");
  app.add_option("--m2", o.m2, "moment of dipole 2, x,y,z");
  app.add_option("--r", o.r, "separation x2 - x1, x,y,z");
  app.add_option("--L", o.L, "periodic box edge");
  app.add_option("--omega", o.omega, "transition frequency Omega");
  app.add_option("--units", o.units, "natural | si");
  app.add_option("--format", o.format, "csv | json");
  app.add_option("--out", o.out, "output file (default: standard output)");
  app.add_option("--seed", o.seed, "seed for random configurations");
  app.add_option("--tol", o.tol, "tolerance override");
  app.add_option("--estimator", o.estimator, "box transition estimator: full | near");
  app.add_option("--e-r", o.e_r, "sweep separation direction, x,y,z");
  app.add_option("--phi-start", o.phi_start, "sweep start angle");
  app.add_option("--phi-end", o.phi_end, "sweep end angle (excluded)");
  app.add_option("--n-phi", o.n_phi, "sweep angle count");
  app.add_option("--r-over-L", o.r_over_L, "sweep r/L values, comma-separated");
  app.add_option("--shell-max", o.shell_max, "largest image shell");
  app.add_option("--omega-cut", o.omega_cut, "kernel frequency cutoff");
  app.add_option("--n-s", o.n_s, "kernel grid size");
  app.add_option("--s-max", o.s_max, "kernel grid end in units of r/c");
  app.add_option("--count", o.count, "random configurations per check suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    help_out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError("arguments", e.what());
  }

  RunConfig cfg;
  if (command == "free") cfg.command = Command::Free;
  else if (command == "box") cfg.command = Command::Box;
  else if (command == "sweep") cfg.command = Command::Sweep;
  else if (command == "kernel") cfg.command = Command::Kernel;
  else if (command == "check") cfg.command = Command::Check;
  else throw ConfigError("command", "unknown command '" + command + "'");

  if (!config_path.empty()) apply_config_file(cfg, config_path);
  apply(cfg, o);
  return cfg;
}

void validate(const RunConfig& cfg) {
  for (const char* f : {"m1", "m2", "r"}) {
    const auto& v = f[0] == 'r' ? cfg.r : (f[1] == '1' ? cfg.m1 : cfg.m2);
    if (v) require_finite(*v, f);
  }
  const bool needs_pair = cfg.command == Command::Free || cfg.command == Command::Box ||
                          cfg.command == Command::Kernel;
  if (needs_pair) {
    if (!cfg.m1) throw ConfigError("m1", "required");
    if (!cfg.m2) throw ConfigError("m2", "required");
    if (!cfg.r) throw ConfigError("r", "required");
    if (!(cfg.r->norm() > 0.0)) throw ConfigError("r", "coincident dipoles (r = 0) are not supported");
  }
  if (cfg.L) {
    require_finite(*cfg.L, "L");
    if (!(*cfg.L > 0.0)) throw ConfigError("L", "must be positive");
  }
  if (cfg.command == Command::Box && !cfg.L) throw ConfigError("L", "required");
  if (cfg.omega) {
    require_finite(*cfg.omega, "omega");
    if (!(*cfg.omega > 0.0)) throw ConfigError("omega", "must be positive");
  }
  if (cfg.tol) {
    require_finite(*cfg.tol, "tol");
    if (!(*cfg.tol > 0.0)) throw ConfigError("tol", "must be positive");
  }
  if (cfg.command == Command::Sweep) {
    require_finite(cfg.e_r, "e_r");
    if (!(cfg.e_r.norm() > 0.0)) throw ConfigError("e_r", "must be non-zero");
    require_finite(cfg.phi_start, "phi_start");
    require_finite(cfg.phi_end, "phi_end");
    if (!(cfg.phi_end > cfg.phi_start)) throw ConfigError("phi_end", "must exceed phi_start");
    if (cfg.n_phi < 1) throw ConfigError("n_phi", "must be at least 1");
    for (double v : cfg.r_over_L)
      if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError("r_over_L", "values must be positive and finite");
  }
  if (cfg.shell_max < 2) throw ConfigError("shell_max", "must be at least 2");
  if (cfg.omega_cut) {
    require_finite(*cfg.omega_cut, "omega_cut");
    if (!(*cfg.omega_cut > 0.0)) throw ConfigError("omega_cut", "must be positive");
  }
  if (cfg.n_s < 1) throw ConfigError("n_s", "must be at least 1");
  if (!std::isfinite(cfg.s_max) || cfg.s_max < 0.0) throw ConfigError("s_max", "must be non-negative");
  if (cfg.count < 1) throw ConfigError("count", "must be at least 1");
}

} // namespace dipolekit::cli
