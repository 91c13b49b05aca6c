#pragma once

#include <cstdint>
#include <string>

#include "vnslab/coupling.hpp"

namespace vnslab::io {

/// Flat key=value run configuration; all defaults are materialized so the
/// emitted effective config reproduces the run byte for byte.
struct RunConfig {
  // grid
  int grid_d = 2;
  int grid_n = 32;
  // particles
  int particles_per_cell = 1;
  int particles_v_bins = 12;
  double particles_q = 5.0;
  double particles_alpha = 4.0;
  double particles_v_max = 0.0;        // 0 -> derived from tail target
  double particles_tail_target = 1e-8;
  // initial data
  std::string init_f0_space = "cosine";      // uniform | cosine | cosine2
  double init_f0_space_amp = 0.3;
  std::string init_f0_velocity = "gauss";    // gauss | polytail | bump | ring
  double init_f0_sigma = 0.25;
  Vec init_f0_center = vec_zero();
  std::string init_u0_family = "randlowmode";  // randlowmode | taylor_green | zero
  double init_u0_h12 = 0.2;
  int init_u0_kmax = 2;
  double init_u0_amp = 0.1;
  Vec init_u0_mean = vec_zero();
  std::uint64_t init_seed = 1;
  // time stepping
  double time_dt = 0.01;
  double time_t_final = 10.0;
  std::string time_scheme = "lie";  // lie | strang
  double time_dt_max = 0.0;         // 0 -> no guard
  // monitors
  double monitor_C_star = 1.0;
  double monitor_delta = 0.0;  // 0 -> root of delta e^delta = 1/9
  double monitor_c_P = diag::poincare_gap();
  double monitor_t_burn = 1.0;
  // coupling switches
  bool coupling_enabled = true;
  bool fluid_frozen = false;
  // io
  int io_stride = 10;
  std::string io_out = "out";
  int io_threads = 1;
  int io_checkpoint_stride = 0;  // 0 -> final checkpoint only
  int io_snapshot_stride = 0;    // 0 -> no field snapshots
  bool io_charts = false;

  kinetic::InitialDataSpec initial_data() const;
  spectral::GridSpec grid() const { return spectral::GridSpec(grid_d, grid_n); }
  coupling::MonitorConfig monitor() const;
  coupling::StepParams step_params() const;
};

/// Parse flat `key = value` text ('#' comments). Collects every violation
/// (unknown key, duplicate key with line number, type mismatch, constraint
/// violation) into a single ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// All keys with their current values, in schema order.
std::string emit_config(const RunConfig& c);

}  // namespace vnslab::io
