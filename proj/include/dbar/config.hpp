#pragma once

// Flat key = value run configuration with one section per module. Unknown
// keys are rejected; every referenced field is validated before any
// computation starts. The parsed file is echoed into output headers.

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbar/flow.hpp"

namespace dbar {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw config_error(key, "expected a number, got '" + v + "'");
  }
}

inline long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw config_error(key, "expected an integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error(key, "expected true/false, got '" + v + "'");
}

inline std::array<double, 4> parse_vec4(const std::string& key,
                                        const std::string& v) {
  std::array<double, 4> out{};
  std::istringstream ss(v);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',')) {
    if (i >= 4) throw config_error(key, "expected 4 comma-separated numbers");
    out[i++] = parse_double(key, trim(tok));
  }
  if (i != 4) throw config_error(key, "expected 4 comma-separated numbers");
  return out;
}

}  // namespace detail

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;

  std::string source_model = "hopf_torus";
  double source_alpha = 2.0;
  std::array<double, 4> source_lattice{1, 0, 0, 1};
  std::string target_model = "hopf_surface";
  double target_alpha = 2.0;
  double target_radius = 1.0;
  std::array<double, 4> target_lattice{1, 0, 0, 1};

  int n_s = 64, n_theta = 64;
  int stencil_order = 2;

  FlowConfig flow;
  std::string flow_init = "family";  // family | identity | constant | file
  std::string flow_init_file;
  std::array<double, 4> flow_init_value{1, 0, 0, 0};

  std::array<double, 4> frame_u{1, 0, 0, 0};
  std::array<double, 4> frame_v{0, 1, 0, 0};
  bool frames_random = false;
  double frames_dt = 0.01;
  double frames_t_max = 50.0;
  int frames_report_every = 10;

  double spectrum_radius = 1.0;
  int spectrum_resolution = 64;

  int basin_count = 100;
  double basin_dt = 0.01;
  double basin_t_max = 50.0;

  bool verify_negative_control = false;
  int verify_points = 100;

  std::vector<std::string> echo;  // provenance lines in file order

  ModelPtr make_source() const {
    ModelSpec s;
    s.name = source_model;
    s.alpha = source_alpha;
    s.lattice = source_lattice;
    s.as_source = true;
    return build_model(s);
  }
  ModelPtr make_target() const {
    ModelSpec s;
    s.name = target_model;
    s.alpha = target_alpha;
    s.radius = target_radius;
    s.lattice = target_lattice;
    s.as_source = false;
    return build_model(s);
  }
};

inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  auto key_error = [&](const std::string& key) {
    throw config_error(section.empty() ? key : section + "." + key,
                       "unknown key");
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw config_error("line " + std::to_string(lineno), "bad section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      cfg.echo.push_back(s);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno),
                         "expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    cfg.echo.push_back(section + "." + key + " = " + val);
    const std::string qual = section + "." + key;

    using namespace detail;
    if (section == "run") {
      if (key == "command") cfg.command = val;
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(qual, val));
      else key_error(key);
    } else if (section == "source") {
      if (key == "model") cfg.source_model = val;
      else if (key == "alpha") cfg.source_alpha = parse_double(qual, val);
      else if (key == "lattice") cfg.source_lattice = parse_vec4(qual, val);
      else key_error(key);
    } else if (section == "target") {
      if (key == "model") cfg.target_model = val;
      else if (key == "alpha") cfg.target_alpha = parse_double(qual, val);
      else if (key == "radius") cfg.target_radius = parse_double(qual, val);
      else if (key == "lattice") cfg.target_lattice = parse_vec4(qual, val);
      else key_error(key);
    } else if (section == "grid") {
      if (key == "n_s") cfg.n_s = static_cast<int>(parse_int(qual, val));
      else if (key == "n_theta") cfg.n_theta = static_cast<int>(parse_int(qual, val));
      else if (key == "stencil_order") {
        cfg.stencil_order = static_cast<int>(parse_int(qual, val));
        if (cfg.stencil_order != 2 && cfg.stencil_order != 4)
          throw config_error(qual, "stencil order must be 2 or 4");
      } else key_error(key);
    } else if (section == "flow") {
      if (key == "dt") cfg.flow.dt = (val == "auto") ? -1.0 : parse_double(qual, val);
      else if (key == "t_max") cfg.flow.t_max = parse_double(qual, val);
      else if (key == "a") cfg.flow.a = parse_double(qual, val);
      else if (key == "scheme") {
        if (val == "euler") cfg.flow.scheme = FlowScheme::euler;
        else if (val == "rk4") cfg.flow.scheme = FlowScheme::rk4;
        else throw config_error(qual, "scheme must be euler or rk4");
      } else if (key == "stop_tau_tol") cfg.flow.stop_tau_tol = parse_double(qual, val);
      else if (key == "blowup_threshold") cfg.flow.blowup_threshold = parse_double(qual, val);
      else if (key == "report_every") cfg.flow.report_every = static_cast<int>(parse_int(qual, val));
      else if (key == "cfl") cfg.flow.c_cfl = parse_double(qual, val);
      else if (key == "init") cfg.flow_init = val;
      else if (key == "init_file") cfg.flow_init_file = val;
      else if (key == "init_value") cfg.flow_init_value = parse_vec4(qual, val);
      else key_error(key);
    } else if (section == "frames") {
      if (key == "u") cfg.frame_u = parse_vec4(qual, val);
      else if (key == "v") cfg.frame_v = parse_vec4(qual, val);
      else if (key == "random") cfg.frames_random = parse_bool(qual, val);
      else if (key == "dt") cfg.frames_dt = parse_double(qual, val);
      else if (key == "t_max") cfg.frames_t_max = parse_double(qual, val);
      else if (key == "report_every") cfg.frames_report_every = static_cast<int>(parse_int(qual, val));
      else key_error(key);
    } else if (section == "spectrum") {
      if (key == "radius") cfg.spectrum_radius = parse_double(qual, val);
      else if (key == "resolution") cfg.spectrum_resolution = static_cast<int>(parse_int(qual, val));
      else key_error(key);
    } else if (section == "basin") {
      if (key == "count") cfg.basin_count = static_cast<int>(parse_int(qual, val));
      else if (key == "dt") cfg.basin_dt = parse_double(qual, val);
      else if (key == "t_max") cfg.basin_t_max = parse_double(qual, val);
      else key_error(key);
    } else if (section == "verify") {
      if (key == "negative_control") cfg.verify_negative_control = parse_bool(qual, val);
      else if (key == "points") cfg.verify_points = static_cast<int>(parse_int(qual, val));
      else key_error(key);
    } else {
      throw config_error(section.empty() ? key : qual, "unknown section");
    }
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config", "cannot open '" + path + "'");
  return parse_config(in);
}

// Everything the command will touch is constructed or range-checked here,
// before any numerics run.
inline void validate_config(const RunConfig& cfg) {
  static const std::set<std::string> commands = {"flow", "frames", "verify",
                                                 "spectrum", "basin"};
  if (!commands.count(cfg.command))
    throw config_error("run.command", "must be one of flow|frames|verify|spectrum|basin");
  if (cfg.command == "flow") {
    cfg.make_source();
    cfg.make_target();
    if (cfg.n_s < 8 || cfg.n_theta < 8)
      throw config_error("grid", "grid sizes must be at least 8");
    cfg.flow.validate();
    if (cfg.flow_init != "family" && cfg.flow_init != "identity" &&
        cfg.flow_init != "constant" && cfg.flow_init != "file")
      throw config_error("flow.init", "must be family|identity|constant|file");
    if (cfg.flow_init == "file" && cfg.flow_init_file.empty())
      throw config_error("flow.init_file", "required when init = file");
  } else if (cfg.command == "frames" || cfg.command == "basin") {
    if (!(cfg.target_alpha > 1)) throw config_error("target.alpha", "must be > 1");
    if (cfg.command == "frames" && !(cfg.frames_dt > 0))
      throw config_error("frames.dt", "must be positive");
    if (cfg.command == "basin") {
      if (cfg.basin_count < 1) throw config_error("basin.count", "must be >= 1");
      if (!(cfg.basin_dt > 0)) throw config_error("basin.dt", "must be positive");
    }
  } else if (cfg.command == "spectrum") {
    if (!(cfg.spectrum_radius > 0))
      throw config_error("spectrum.radius", "must be > 0");
    if (cfg.spectrum_resolution < 32)
      throw config_error("spectrum.resolution", "must be >= 32");
  } else if (cfg.command == "verify") {
    if (cfg.verify_points < 1) throw config_error("verify.points", "must be >= 1");
  }
}

}  // namespace dbar
