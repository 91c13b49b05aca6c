#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vnslab/charts.hpp"
#include "vnslab/io.hpp"

namespace fs = std::filesystem;

namespace vnslab::io {

SimState make_initial_state(const RunConfig& cfg) {
  SimState s;
  auto grid = cfg.grid();
  if (cfg.init_u0_family == "randlowmode") {
    s.u = spectral::random_div_free_field(grid, cfg.init_u0_kmax, cfg.init_u0_h12,
                                          cfg.init_seed, cfg.init_u0_mean);
  } else if (cfg.init_u0_family == "taylor_green") {
    s.u = spectral::taylor_green(grid, cfg.init_u0_amp);
    s.u.set_mean(cfg.init_u0_mean);
  } else {
    s.u = spectral::FourierField(grid, true);
    s.u.set_mean(cfg.init_u0_mean);
  }
  s.particles = kinetic::build_particles(cfg.initial_data(), grid);
  s.alpha = cfg.particles_alpha;
  coupling::finalize_initial_state(s, cfg.io_threads);
  return s;
}

namespace {

std::string zero_pad(std::int64_t v, int width) {
  std::ostringstream o;
  o << v;
  std::string s = o.str();
  while (static_cast<int>(s.size()) < width) s = "0" + s;
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string meta_text(const RunConfig& cfg, const SimState& s) {
  std::ostringstream o;
  char buf[32];
  auto f = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  kinetic::InitialDataSpec ispec = cfg.initial_data();
  double vmax = kinetic::resolve_v_max(ispec);
  o << "format = vnslab-run-meta-1\n";
  o << "seed = " << cfg.init_seed << "\n";
  o << "threads = " << cfg.io_threads << "\n";
  o << "particles = " << s.particles.size() << "\n";
  o << "v_max = " << f(vmax) << "\n";
  o << "tail_mass = " << f(kinetic::tail_mass(ispec, vmax)) << "\n";
  o << "Nq = " << f(kinetic::estimate_Nq(ispec, cfg.particles_q)) << "\n";
  o << "conserved_momentum_x = " << f(s.conserved_momentum[0]) << "\n";
  o << "conserved_momentum_y = " << f(s.conserved_momentum[1]) << "\n";
  o << "conserved_momentum_z = " << f(s.conserved_momentum[2]) << "\n";
  o << "u0_h12_sq = " << f(s.u0_h12_sq) << "\n";
  o << "E0 = " << f(s.E0) << "\n";
  o << "Emod0 = " << f(s.Emod0) << "\n";
  return o.str();
}

}  // namespace

RunResult run_simulation(const RunConfig& cfg, SimState state, const std::string& out_dir,
                         std::vector<DiagnosticsRecord>* progress) {
  RunResult result;
  result.out_dir = out_dir;
  const bool writing = !out_dir.empty();
  fs::path root(out_dir);
  if (writing) {
    fs::create_directories(root);
    fs::create_directories(root / "snapshots");
    fs::create_directories(root / "checkpoints");
    write_text((root / "effective.cfg").string(), emit_config(cfg));
    write_text((root / "meta.txt").string(), meta_text(cfg, state));
  }

  const auto params = cfg.step_params();
  const auto mon = cfg.monitor();
  const std::int64_t nsteps =
      static_cast<std::int64_t>(std::llround(cfg.time_t_final / cfg.time_dt));
  const std::int64_t first_step = state.step_index;

  std::ostringstream index;
  index << "step,t,u_file,rho_file\n";

  auto emit_record = [&](SimState& st) {
    auto rec = coupling::diagnose(st, mon, cfg.io_threads);
    result.records.push_back(rec);
    if (progress) progress->push_back(rec);
  };
  auto emit_snapshot = [&](SimState& st) {
    if (!writing || cfg.io_snapshot_stride <= 0) return;
    if (st.step_index % cfg.io_snapshot_stride != 0 && st.step_index != nsteps) return;
    coupling::refresh_cache(st, cfg.io_threads);
    std::string tag = zero_pad(st.step_index, 8);
    std::string uf = "snapshots/u_" + tag + ".vnsf";
    std::string rf = "snapshots/rho_" + tag + ".vnsg";
    save_field(st.u, (root / uf).string());
    save_grid(st.cache.rho, (root / rf).string());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", st.t);
    index << st.step_index << "," << buf << "," << uf << "," << rf << "\n";
    result.snapshots.push_back({st.step_index, st.t, (root / uf).string(),
                                (root / rf).string()});
  };
  auto emit_checkpoint = [&](const SimState& st, bool force) {
    if (!writing) return;
    bool due = cfg.io_checkpoint_stride > 0 &&
               st.step_index % cfg.io_checkpoint_stride == 0;
    if (!due && !force) return;
    std::string f = "checkpoints/ck_" + zero_pad(st.step_index, 8) + ".vnsc";
    save_checkpoint(st, cfg, (root / f).string());
  };

  (void)first_step;
  for (std::int64_t k = state.step_index; k < nsteps; ++k) {
    if (k % cfg.io_stride == 0) emit_record(state);
    emit_snapshot(state);
    emit_checkpoint(state, false);
    coupling::step(state, params, mon);
  }
  emit_record(state);
  emit_snapshot(state);
  emit_checkpoint(state, true);

  if (writing) {
    write_series_csv(result.records, (root / "series.csv").string());
    write_text((root / "snapshots" / "index.csv").string(), index.str());
    save_ensemble(state.particles, (root / "final.vnsp").string());
    write_particles_csv(state.particles, 5000, (root / "final_particles.csv").string());
    write_grid_csv(spectral::synthesize(state.u), (root / "final_u.csv").string());
    if (cfg.io_charts) write_run_charts(result.records, (root / "charts").string());
  }
  return result;
}

std::vector<SnapshotEntry> read_snapshot_index(const std::string& run_dir) {
  fs::path root(run_dir);
  std::ifstream in(root / "snapshots" / "index.csv");
  if (!in) throw IoError("no snapshot index under " + run_dir);
  std::vector<SnapshotEntry> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string step, t, uf, rf;
    std::getline(ls, step, ',');
    std::getline(ls, t, ',');
    std::getline(ls, uf, ',');
    std::getline(ls, rf, ',');
    out.push_back({std::stoll(step), std::stod(t), (root / uf).string(),
                   (root / rf).string()});
  }
  return out;
}

}  // namespace vnslab::io
