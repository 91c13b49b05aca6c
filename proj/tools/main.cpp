#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vnslab/acceptance.hpp"
#include "vnslab/asymptotics.hpp"
#include "vnslab/charts.hpp"
#include "vnslab/io.hpp"
#include "vnslab/transport.hpp"

namespace fs = std::filesystem;
using namespace vnslab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::map<std::string, std::string> read_meta(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / "meta.txt");
  if (!in) throw IoError("no meta.txt under " + run_dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq);
    std::string v = line.substr(eq + 1);
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t\r");
      return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(k)] = trim(v);
  }
  return kv;
}

Vec meta_drift(const std::map<std::string, std::string>& meta) {
  Vec momentum = vec_zero();
  momentum[0] = std::stod(meta.at("conserved_momentum_x"));
  momentum[1] = std::stod(meta.at("conserved_momentum_y"));
  momentum[2] = std::stod(meta.at("conserved_momentum_z"));
  return scale(momentum, 0.5, 3);
}

int cmd_run(const std::string& config_path, std::string out_dir) {
  io::RunConfig cfg = io::load_config_file(config_path);
  if (!out_dir.empty()) cfg.io_out = out_dir;
  auto res = io::run_simulation(cfg, cfg.io_out);
  const auto& last = res.records.back();
  std::cout << "run finished: t = " << last.t << ", E = " << last.E
            << ", Emod = " << last.Emod << ", mass drift = " << last.mass - 1.0 << "\n";
  std::cout << "series: " << (fs::path(cfg.io_out) / "series.csv").string() << "\n";
  if (!last.strong_ok)
    std::cout << "note: the strong-existence criterion failed during the run\n";
  if (!last.bootstrap_ok)
    std::cout << "note: the gradient-integral monitor exceeded delta during the run\n";
  return kExitOk;
}

int cmd_resume(const std::string& checkpoint, std::string out_dir) {
  auto [state, cfg] = io::load_checkpoint(checkpoint);
  if (!out_dir.empty())
    cfg.io_out = out_dir;
  else
    cfg.io_out += "_resumed";
  auto res = io::run_simulation(cfg, std::move(state), cfg.io_out);
  std::cout << "resumed to t = " << res.records.back().t << " under " << cfg.io_out
            << "\n";
  return kExitOk;
}

int cmd_diag(const std::string& run_dir, std::string out_dir) {
  if (out_dir.empty()) out_dir = (fs::path(run_dir) / "diag").string();
  fs::create_directories(out_dir);
  io::Series series = io::read_series_csv((fs::path(run_dir) / "series.csv").string());
  auto t = series.col("t");
  auto emod = series.col("Emod");

  std::ostringstream report;
  report << "# diagnostics report\n";
  {
    double t_burn = std::min(1.0, t.empty() ? 0.0 : t.back() / 2.0);
    try {
      auto fit = diag::fit_decay_rate(t, emod, t_burn);
      report << "lambda_fit = " << fit.lambda_fit << "\n";
      report << "r2 = " << fit.r2 << "\n";
      report << "t_burn = " << t_burn << "\n";
    } catch (const NumericalError& e) {
      report << "decay_fit_error = " << e.what() << "\n";
    }
    auto mass = series.col("mass");
    double drift = 0.0;
    for (double m : mass) drift = std::max(drift, std::abs(m - 1.0));
    report << "max_mass_drift = " << drift << "\n";
    auto eq = series.col("eqmoy_residual");
    double eqmax = 0.0;
    for (double r : eq) eqmax = std::max(eqmax, r);
    report << "max_eqmoy_residual = " << eqmax << "\n";
  }

  // W1 tables between consecutive renormalized density snapshots
  auto meta = read_meta(run_dir);
  Vec drift = meta_drift(meta);
  auto snaps = io::read_snapshot_index(run_dir);
  std::ofstream w1csv(fs::path(out_dir) / "w1_pairs.csv");
  w1csv << "pair,t_a,t_b,method,eps,value\n";
  const double eps = 1e-3;
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    auto ga = io::load_grid(snaps[i - 1].rho_file);
    auto gb = io::load_grid(snaps[i].rho_file);
    auto ra = ot::renormalized_density(ga, snaps[i - 1].t, drift);
    auto rb = ot::renormalized_density(gb, snaps[i].t, drift);
    int nb = std::min(ga.spec.n, 32);
    while (ga.spec.n % nb != 0) --nb;
    auto ha = ot::density_histogram(ra, nb);
    auto hb = ot::density_histogram(rb, nb);
    // equal totals up to deposition rounding
    double ta = ha.total();
    for (auto& m : hb.mass) m *= ta / hb.total();
    double exact = ot::w1_exact(ha, hb);
    w1csv << i - 1 << ":" << i << "," << snaps[i - 1].t << "," << snaps[i].t
          << ",exact,0," << exact << "\n";
    if (ha.bins() <= 1024) {
      auto ent = ot::w1_entropic(ha, hb, eps);
      w1csv << i - 1 << ":" << i << "," << snaps[i - 1].t << "," << snaps[i].t
            << ",entropic," << eps << "," << ent.value << "\n";
    }
  }
  std::ofstream rep(fs::path(out_dir) / "report.txt");
  rep << report.str();
  std::cout << report.str();
  std::cout << "w1 table: " << (fs::path(out_dir) / "w1_pairs.csv").string() << "\n";
  return kExitOk;
}

int cmd_profile(const std::string& run_dir, std::string out_dir, int v_bins,
                int certify_stride, int threads) {
  if (out_dir.empty()) out_dir = (fs::path(run_dir) / "profile").string();
  fs::create_directories(out_dir);
  io::RunConfig cfg =
      io::load_config_file((fs::path(run_dir) / "effective.cfg").string());
  auto meta = read_meta(run_dir);
  Vec drift = meta_drift(meta);
  auto snaps = io::read_snapshot_index(run_dir);
  if (snaps.empty()) throw IoError("run has no velocity snapshots (io.snapshot_stride)");

  std::vector<double> times;
  std::vector<spectral::FourierField> fields;
  for (const auto& s : snaps) {
    times.push_back(s.t);
    fields.push_back(io::load_field(s.u_file));
  }
  asymptotic::VelocityHistory history(times, fields, drift);

  // tail-switch sanity from the recorded series
  io::Series series = io::read_series_csv((fs::path(run_dir) / "series.csv").string());
  auto emod = series.col("Emod");
  double tail_ratio = emod.empty() ? 0.0 : emod.back() / std::max(emod.front(), 1e-300);

  asymptotic::ProfileOptions opts;
  opts.v_bins = v_bins;
  opts.certify_stride = certify_stride;
  opts.threads = threads;
  auto res = asymptotic::rho_infinity(history, cfg.initial_data(), cfg.grid(), opts);

  io::save_grid(res.rho_inf, (fs::path(out_dir) / "rho_inf.vnsg").string());
  io::write_grid_csv(res.rho_inf, (fs::path(out_dir) / "rho_inf.csv").string());
  std::ostringstream m;
  m << "mass = " << res.mass << "\n";
  m << "picard_iters = " << res.picard_iters << "\n";
  m << "residual = " << res.residual << "\n";
  m << "min_detA = " << res.min_detA << "\n";
  m << "max_detA = " << res.max_detA << "\n";
  m << "max_es_DvY = " << res.max_es_DvY << "\n";
  m << "max_DxY = " << res.max_DxY << "\n";
  m << "max_DxLambda_dev = " << res.max_DxLambda_dev << "\n";
  m << "min_det_DxLambda = " << res.min_det_DxLambda << "\n";
  m << "samples = " << res.samples << "\n";
  m << "certified = " << res.certified << "\n";
  m << "grad_integral = " << history.grad_integral() << "\n";
  m << "tail_energy_ratio = " << tail_ratio << "\n";
  std::ofstream meta_out(fs::path(out_dir) / "profile_meta.txt");
  meta_out << m.str();
  std::cout << m.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vnslab: a desk-scale fluid-kinetic laboratory on the periodic torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, run_dir, work_dir = "acceptance_work";
  int v_bins = 16, certify_stride = 8, threads = 1;

  auto* run = app.add_subcommand("run", "advance a configuration to t_final");
  run->add_option("config", config_path, "flat key=value configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides io.out)");

  auto* resume = app.add_subcommand("resume", "continue from a checkpoint");
  resume->add_option("checkpoint", checkpoint, "checkpoint file (.vnsc)")
      ->required()
      ->check(CLI::ExistingFile);
  resume->add_option("--out", out_dir, "output directory");

  auto* diagc = app.add_subcommand("diag", "decay fits and W1 tables for a run directory");
  diagc->add_option("run_dir", run_dir, "directory written by `run`")
      ->required()
      ->check(CLI::ExistingDirectory);
  diagc->add_option("--out", out_dir, "output directory (default <run>/diag)");

  auto* prof = app.add_subcommand("profile", "asymptotic density profile from snapshots");
  prof->add_option("run_dir", run_dir, "directory written by `run`")
      ->required()
      ->check(CLI::ExistingDirectory);
  prof->add_option("--out", out_dir, "output directory (default <run>/profile)");
  prof->add_option("--v-bins", v_bins, "velocity quadrature points per axis");
  prof->add_option("--certify-stride", certify_stride,
                   "x-jacobian certificates every k-th sample");
  prof->add_option("--threads", threads, "worker threads");

  auto* self = app.add_subcommand("selftest", "run the acceptance suite");
  self->add_option("--work-dir", work_dir, "scratch directory for acceptance runs");
  self->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (resume->parsed()) return cmd_resume(checkpoint, out_dir);
    if (diagc->parsed()) return cmd_diag(run_dir, out_dir);
    if (prof->parsed()) return cmd_profile(run_dir, out_dir, v_bins, certify_stride, threads);
    if (self->parsed()) {
      accept::AcceptanceOptions opts;
      opts.work_dir = work_dir;
      opts.threads = threads;
      int failures = accept::run_acceptance(opts);
      return failures == 0 ? kExitOk : kExitNumerical;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
