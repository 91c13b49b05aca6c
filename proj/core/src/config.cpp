#include "vnslab/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace vnslab::io {

kinetic::InitialDataSpec RunConfig::initial_data() const {
  kinetic::InitialDataSpec s;
  s.d = grid_d;
  if (init_f0_space == "uniform")
    s.space = kinetic::SpaceFamily::Uniform;
  else if (init_f0_space == "cosine")
    s.space = kinetic::SpaceFamily::Cosine;
  else
    s.space = kinetic::SpaceFamily::Cosine2;
  s.space_amp = init_f0_space_amp;
  if (init_f0_velocity == "gauss")
    s.velocity = kinetic::VelocityFamily::Gauss;
  else if (init_f0_velocity == "polytail")
    s.velocity = kinetic::VelocityFamily::PolyTail;
  else if (init_f0_velocity == "bump")
    s.velocity = kinetic::VelocityFamily::Bump;
  else
    s.velocity = kinetic::VelocityFamily::Ring;
  s.sigma = init_f0_sigma;
  s.q = particles_q;
  s.center = init_f0_center;
  s.v_max = particles_v_max;
  s.tail_target = particles_tail_target;
  s.x_per_cell = particles_per_cell;
  s.v_bins = particles_v_bins;
  s.seed = init_seed;
  return s;
}

coupling::MonitorConfig RunConfig::monitor() const {
  coupling::MonitorConfig m;
  m.C_star = monitor_C_star;
  m.delta = monitor_delta;
  m.c_P = monitor_c_P;
  return m;
}

coupling::StepParams RunConfig::step_params() const {
  coupling::StepParams p;
  p.dt = time_dt;
  p.scheme = (time_scheme == "strang") ? spectral::TimeScheme::Strang
                                       : spectral::TimeScheme::Lie;
  p.coupling = coupling_enabled;
  p.fluid_frozen = fluid_frozen;
  p.dt_max = time_dt_max;
  p.threads = io_threads;
  return p;
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

struct Parser {
  std::map<std::string, RawEntry> raw;
  std::vector<std::string> errors;
  std::vector<std::string> consumed;

  bool take(const std::string& key, std::string& out) {
    auto it = raw.find(key);
    if (it == raw.end()) return false;
    out = it->second.value;
    consumed.push_back(key);
    return true;
  }

  void get(const std::string& key, double& slot) {
    std::string v;
    if (!take(key, v)) return;
    try {
      std::size_t pos = 0;
      double parsed = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      slot = parsed;
    } catch (...) {
      errors.push_back(key + ": expected a number, got '" + v + "'");
    }
  }

  void get(const std::string& key, int& slot) {
    std::string v;
    if (!take(key, v)) return;
    try {
      std::size_t pos = 0;
      long parsed = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      slot = static_cast<int>(parsed);
    } catch (...) {
      errors.push_back(key + ": expected an integer, got '" + v + "'");
    }
  }

  void get(const std::string& key, std::uint64_t& slot) {
    std::string v;
    if (!take(key, v)) return;
    try {
      std::size_t pos = 0;
      unsigned long long parsed = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      slot = parsed;
    } catch (...) {
      errors.push_back(key + ": expected an unsigned integer, got '" + v + "'");
    }
  }

  void get(const std::string& key, bool& slot) {
    std::string v;
    if (!take(key, v)) return;
    if (v == "true" || v == "1" || v == "yes")
      slot = true;
    else if (v == "false" || v == "0" || v == "no")
      slot = false;
    else
      errors.push_back(key + ": expected a boolean, got '" + v + "'");
  }

  void get(const std::string& key, std::string& slot) {
    std::string v;
    if (take(key, v)) slot = v;
  }
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  Parser p;
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        p.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
        continue;
      }
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty()) {
        p.errors.push_back("line " + std::to_string(lineno) + ": empty key");
        continue;
      }
      auto it = p.raw.find(key);
      if (it != p.raw.end()) {
        p.errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key +
                           "' (first set on line " + std::to_string(it->second.line) + ")");
        continue;
      }
      p.raw[key] = {val, lineno};
    }
  }

  RunConfig c;
  p.get("grid.d", c.grid_d);
  p.get("grid.n", c.grid_n);
  p.get("particles.per_cell", c.particles_per_cell);
  p.get("particles.v_bins", c.particles_v_bins);
  p.get("particles.q", c.particles_q);
  p.get("particles.alpha", c.particles_alpha);
  p.get("particles.v_max", c.particles_v_max);
  p.get("particles.tail_target", c.particles_tail_target);
  p.get("init.f0.space", c.init_f0_space);
  p.get("init.f0.space_amp", c.init_f0_space_amp);
  p.get("init.f0.velocity", c.init_f0_velocity);
  p.get("init.f0.sigma", c.init_f0_sigma);
  p.get("init.f0.center_x", c.init_f0_center[0]);
  p.get("init.f0.center_y", c.init_f0_center[1]);
  p.get("init.f0.center_z", c.init_f0_center[2]);
  p.get("init.u0.family", c.init_u0_family);
  p.get("init.u0.h12", c.init_u0_h12);
  p.get("init.u0.kmax", c.init_u0_kmax);
  p.get("init.u0.amp", c.init_u0_amp);
  p.get("init.u0.mean_x", c.init_u0_mean[0]);
  p.get("init.u0.mean_y", c.init_u0_mean[1]);
  p.get("init.u0.mean_z", c.init_u0_mean[2]);
  p.get("init.seed", c.init_seed);
  p.get("time.dt", c.time_dt);
  p.get("time.t_final", c.time_t_final);
  p.get("time.scheme", c.time_scheme);
  p.get("time.dt_max", c.time_dt_max);
  p.get("monitor.C_star", c.monitor_C_star);
  p.get("monitor.delta", c.monitor_delta);
  p.get("monitor.c_P", c.monitor_c_P);
  p.get("monitor.t_burn", c.monitor_t_burn);
  p.get("coupling.enabled", c.coupling_enabled);
  p.get("fluid.frozen", c.fluid_frozen);
  p.get("io.stride", c.io_stride);
  p.get("io.out", c.io_out);
  p.get("io.threads", c.io_threads);
  p.get("io.checkpoint_stride", c.io_checkpoint_stride);
  p.get("io.snapshot_stride", c.io_snapshot_stride);
  p.get("io.charts", c.io_charts);

  for (const auto& [key, entry] : p.raw) {
    bool used = false;
    for (const auto& k : p.consumed)
      if (k == key) used = true;
    if (!used)
      p.errors.push_back("line " + std::to_string(entry.line) + ": unknown key '" + key +
                         "'");
  }

  // constraint validation (collect everything, not just the first)
  auto& errs = p.errors;
  if (c.grid_d != 2 && c.grid_d != 3) errs.push_back("grid.d: must be 2 or 3");
  if (c.grid_n < 8 || c.grid_n % 2 != 0) errs.push_back("grid.n: must be even and >= 8");
  if (c.particles_per_cell < 1) errs.push_back("particles.per_cell: must be >= 1");
  if (c.particles_v_bins < 2) errs.push_back("particles.v_bins: must be >= 2");
  if (c.particles_q <= 4.0)
    errs.push_back("particles.q: must be > 4 (pointwise decay hypothesis)");
  if (c.particles_alpha <= 3.0)
    errs.push_back("particles.alpha: must be > 3 (moment hypothesis)");
  if (c.particles_v_max < 0.0) errs.push_back("particles.v_max: must be >= 0");
  if (c.particles_tail_target <= 0.0 || c.particles_tail_target >= 1.0)
    errs.push_back("particles.tail_target: must be in (0,1)");
  if (c.init_f0_space != "uniform" && c.init_f0_space != "cosine" &&
      c.init_f0_space != "cosine2")
    errs.push_back("init.f0.space: unknown family '" + c.init_f0_space + "'");
  if (std::abs(c.init_f0_space_amp) >= 1.0)
    errs.push_back("init.f0.space_amp: |amp| must be < 1 (nonnegative density)");
  if (c.init_f0_velocity != "gauss" && c.init_f0_velocity != "polytail" &&
      c.init_f0_velocity != "bump" && c.init_f0_velocity != "ring")
    errs.push_back("init.f0.velocity: unknown family '" + c.init_f0_velocity + "'");
  if (c.init_f0_sigma <= 0.0) errs.push_back("init.f0.sigma: must be > 0");
  if (c.init_u0_family != "randlowmode" && c.init_u0_family != "taylor_green" &&
      c.init_u0_family != "zero")
    errs.push_back("init.u0.family: unknown family '" + c.init_u0_family + "'");
  if (c.init_u0_h12 < 0.0) errs.push_back("init.u0.h12: must be >= 0");
  if (c.init_u0_kmax < 1) errs.push_back("init.u0.kmax: must be >= 1");
  if (c.time_dt <= 0.0) errs.push_back("time.dt: must be > 0");
  if (c.time_t_final <= 0.0) errs.push_back("time.t_final: must be > 0");
  if (c.time_scheme != "lie" && c.time_scheme != "strang")
    errs.push_back("time.scheme: must be 'lie' or 'strang'");
  if (c.time_dt_max < 0.0) errs.push_back("time.dt_max: must be >= 0");
  if (c.monitor_C_star <= 0.0) errs.push_back("monitor.C_star: must be > 0");
  if (c.monitor_delta < 0.0) errs.push_back("monitor.delta: must be >= 0");
  if (c.monitor_delta > 0.0 &&
      c.monitor_delta * std::exp(c.monitor_delta) > 1.0 / 9.0 + 1e-12)
    errs.push_back("monitor.delta: delta e^delta must be <= 1/9");
  if (c.monitor_c_P <= 0.0) errs.push_back("monitor.c_P: must be > 0");
  if (c.io_stride < 1) errs.push_back("io.stride: must be >= 1");
  if (c.io_threads < 1) errs.push_back("io.threads: must be >= 1");
  if (c.io_checkpoint_stride < 0) errs.push_back("io.checkpoint_stride: must be >= 0");
  if (c.io_snapshot_stride < 0) errs.push_back("io.snapshot_stride: must be >= 0");

  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string emit_config(const RunConfig& c) {
  std::ostringstream o;
  o << "# effective configuration (all defaults materialized)\n";
  o << "grid.d = " << c.grid_d << "\n";
  o << "grid.n = " << c.grid_n << "\n";
  o << "particles.per_cell = " << c.particles_per_cell << "\n";
  o << "particles.v_bins = " << c.particles_v_bins << "\n";
  o << "particles.q = " << fmt(c.particles_q) << "\n";
  o << "particles.alpha = " << fmt(c.particles_alpha) << "\n";
  o << "particles.v_max = " << fmt(c.particles_v_max) << "\n";
  o << "particles.tail_target = " << fmt(c.particles_tail_target) << "\n";
  o << "init.f0.space = " << c.init_f0_space << "\n";
  o << "init.f0.space_amp = " << fmt(c.init_f0_space_amp) << "\n";
  o << "init.f0.velocity = " << c.init_f0_velocity << "\n";
  o << "init.f0.sigma = " << fmt(c.init_f0_sigma) << "\n";
  o << "init.f0.center_x = " << fmt(c.init_f0_center[0]) << "\n";
  o << "init.f0.center_y = " << fmt(c.init_f0_center[1]) << "\n";
  o << "init.f0.center_z = " << fmt(c.init_f0_center[2]) << "\n";
  o << "init.u0.family = " << c.init_u0_family << "\n";
  o << "init.u0.h12 = " << fmt(c.init_u0_h12) << "\n";
  o << "init.u0.kmax = " << c.init_u0_kmax << "\n";
  o << "init.u0.amp = " << fmt(c.init_u0_amp) << "\n";
  o << "init.u0.mean_x = " << fmt(c.init_u0_mean[0]) << "\n";
  o << "init.u0.mean_y = " << fmt(c.init_u0_mean[1]) << "\n";
  o << "init.u0.mean_z = " << fmt(c.init_u0_mean[2]) << "\n";
  o << "init.seed = " << c.init_seed << "\n";
  o << "time.dt = " << fmt(c.time_dt) << "\n";
  o << "time.t_final = " << fmt(c.time_t_final) << "\n";
  o << "time.scheme = " << c.time_scheme << "\n";
  o << "time.dt_max = " << fmt(c.time_dt_max) << "\n";
  o << "monitor.C_star = " << fmt(c.monitor_C_star) << "\n";
  o << "monitor.delta = " << fmt(c.monitor_delta) << "\n";
  o << "monitor.c_P = " << fmt(c.monitor_c_P) << "\n";
  o << "monitor.t_burn = " << fmt(c.monitor_t_burn) << "\n";
  o << "coupling.enabled = " << (c.coupling_enabled ? "true" : "false") << "\n";
  o << "fluid.frozen = " << (c.fluid_frozen ? "true" : "false") << "\n";
  o << "io.stride = " << c.io_stride << "\n";
  o << "io.out = " << c.io_out << "\n";
  o << "io.threads = " << c.io_threads << "\n";
  o << "io.checkpoint_stride = " << c.io_checkpoint_stride << "\n";
  o << "io.snapshot_stride = " << c.io_snapshot_stride << "\n";
  o << "io.charts = " << (c.io_charts ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace vnslab::io
