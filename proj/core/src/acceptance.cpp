#include "vnslab/acceptance.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "vnslab/asymptotics.hpp"
#include "vnslab/io.hpp"
#include "vnslab/transport.hpp"

namespace fs = std::filesystem;

namespace vnslab::accept {

namespace {

using coupling::MonitorConfig;
using coupling::SimState;
using coupling::StepParams;
using diag::DiagnosticsRecord;
using io::RunConfig;
using kinetic::ParticleEnsemble;
using spectral::FourierField;

struct Tally {
  int failed = 0;
  void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

Vec total_mean(const DiagnosticsRecord& r, int d) { return add(r.mean_u, r.mean_j, d); }

double lsq_order(const std::vector<double>& dts, const std::vector<double>& errs) {
  double mx = 0, my = 0;
  const std::size_t n = dts.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = std::log(dts[i]);
    ys[i] = std::log(std::max(errs[i], 1e-300));
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

std::vector<double> trapz_prefix(const std::vector<double>& t,
                                 const std::vector<double>& f) {
  std::vector<double> p(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    p[i] = p[i - 1] + 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
  return p;
}

/// In-memory products of the reference compliant run.
struct LabRun {
  RunConfig cfg;
  std::vector<DiagnosticsRecord> records;
  std::vector<double> snap_times;
  std::vector<FourierField> snap_u;
  std::vector<spectral::GridField> snap_rho;
  std::vector<double> ens_times;
  std::vector<ParticleEnsemble> ens_snaps;
  Vec conserved = vec_zero();
  double Emod0 = 0.0;
  double E0 = 0.0;
  double Nq = 0.0;
};

RunConfig compliant_config(int threads) {
  RunConfig cfg = io::parse_config("");
  cfg.grid_n = 32;
  cfg.particles_v_bins = 10;
  cfg.particles_q = 5.0;
  cfg.particles_alpha = 4.0;
  cfg.init_f0_space = "cosine";
  cfg.init_f0_space_amp = 0.3;
  cfg.init_f0_velocity = "gauss";
  cfg.init_f0_sigma = 0.15;
  cfg.init_u0_family = "randlowmode";
  cfg.init_u0_h12 = 0.02;
  cfg.init_u0_kmax = 2;
  cfg.init_seed = 7;
  cfg.time_dt = 0.01;
  cfg.time_t_final = 13.0;
  cfg.io_stride = 10;
  cfg.io_threads = threads;
  return cfg;
}

LabRun run_compliant(int threads) {
  LabRun lab;
  lab.cfg = compliant_config(threads);
  SimState s = io::make_initial_state(lab.cfg);
  lab.conserved = s.conserved_momentum;
  lab.Emod0 = s.Emod0;
  lab.E0 = s.E0;
  lab.Nq = kinetic::estimate_Nq(lab.cfg.initial_data(), lab.cfg.particles_q);
  const auto params = lab.cfg.step_params();
  const auto mon = lab.cfg.monitor();
  const int nsteps =
      static_cast<int>(std::llround(lab.cfg.time_t_final / lab.cfg.time_dt));
  const int snap_stride = 50;  // every 0.5 time units
  const std::vector<int> ens_steps = {0, 100, 200};

  for (int k = 0; k <= nsteps; ++k) {
    if (k % lab.cfg.io_stride == 0 || k == nsteps)
      lab.records.push_back(coupling::diagnose(s, mon, threads));
    if (k % snap_stride == 0 || k == nsteps) {
      coupling::refresh_cache(s, threads);
      lab.snap_times.push_back(s.t);
      lab.snap_u.push_back(s.u);
      lab.snap_rho.push_back(s.cache.rho);
    }
    for (int e : ens_steps)
      if (k == e) {
        lab.ens_times.push_back(s.t);
        lab.ens_snaps.push_back(s.particles);
      }
    if (k < nsteps) coupling::step(s, params, mon);
  }
  return lab;
}

struct RefinementRun {
  double dt = 0.0;
  std::vector<DiagnosticsRecord> records;
  Vec conserved = vec_zero();
  double E0 = 0.0;
  double Emod0 = 0.0;
};

RefinementRun run_refinement(double dt, int threads) {
  RefinementRun out;
  out.dt = dt;
  RunConfig cfg = io::parse_config("");
  cfg.grid_n = 32;
  cfg.particles_v_bins = 8;
  cfg.init_f0_sigma = 0.18;
  cfg.init_f0_space_amp = 0.3;
  cfg.init_f0_center = {0.03, -0.01, 0.0};
  cfg.init_u0_h12 = 0.05;
  cfg.init_u0_mean = {0.05, 0.02, 0.0};
  cfg.init_seed = 11;
  cfg.time_dt = dt;
  cfg.time_t_final = 2.0;
  cfg.io_stride = 1;
  cfg.io_threads = threads;
  SimState s = io::make_initial_state(cfg);
  out.conserved = s.conserved_momentum;
  out.E0 = s.E0;
  out.Emod0 = s.Emod0;
  io::run_simulation(cfg, std::move(s), "", &out.records);
  return out;
}

// --- criteria --------------------------------------------------------------

void criterion_conservation(Tally& tally, const LabRun& lab,
                            const std::vector<RefinementRun>& refs) {
  double mass_err = 0.0;
  for (const auto& r : lab.records) mass_err = std::max(mass_err, std::abs(r.mass - 1.0));
  for (const auto& run : refs)
    for (const auto& r : run.records)
      mass_err = std::max(mass_err, std::abs(r.mass - 1.0));

  std::vector<double> dts, errs;
  for (const auto& run : refs) {
    Vec tot = total_mean(run.records.back(), 2);
    errs.push_back(norm2(sub(tot, run.conserved, 2), 2));
    dts.push_back(run.dt);
  }
  double order = lsq_order(dts, errs);
  double C = 2.0 * errs.front() / dts.front();
  bool linear_bound = true;
  for (std::size_t k = 1; k < errs.size(); ++k)
    if (errs[k] > C * dts[k]) linear_bound = false;

  bool ok = mass_err <= 1e-12 && order >= 1.0 && linear_bound;
  tally.report(
      1, "conservation of mass and total momentum", ok,
      fmt("mass err %.1e <= 1e-12; momentum drift order %.2f >= 1; drift <= %.2e dt",
          mass_err, order, C));
}

void criterion_energy_identity(Tally& tally, const std::vector<RefinementRun>& refs) {
  std::vector<double> dts, errs;
  for (const auto& run : refs) {
    std::vector<double> t, D;
    for (const auto& r : run.records) {
      t.push_back(r.t);
      D.push_back(r.D);
    }
    auto intD = trapz_prefix(t, D);
    double worst = 0.0;
    for (std::size_t i = 0; i < run.records.size(); ++i)
      worst = std::max(worst, std::abs(run.records[i].E + intD[i] - run.E0));
    errs.push_back(worst);
    dts.push_back(run.dt);
  }
  double order = lsq_order(dts, errs);
  double C = 2.0 * errs.front() / dts.front();
  bool linear_bound = true;
  for (std::size_t k = 1; k < errs.size(); ++k)
    if (errs[k] > C * dts[k]) linear_bound = false;
  bool ok = order >= 1.0 && linear_bound;
  tally.report(2, "energy identity E(t) + int D = E(0)", ok,
               fmt("residual order %.2f >= 1; residual <= %.2e dt (finest %.2e)", order,
                   C, errs.back()));
}

void criterion_modulated_structure(Tally& tally, const LabRun& lab,
                                   const std::vector<RefinementRun>& refs) {
  // (a) Emod - E + |<u0+j0>|^2 / 4 stays within the conservation drift
  auto structural = [&](const std::vector<DiagnosticsRecord>& recs, const Vec& conserved) {
    double worst_excess = -1e300;
    double p0 = norm2(conserved, 2);
    for (const auto& r : recs) {
      double residual = std::abs(r.Emod - r.E + 0.25 * p0 * p0);
      Vec tot = total_mean(r, 2);
      double drift = norm2(sub(tot, conserved, 2), 2);
      double allowance = 1e-8 + 0.25 * drift * (2.0 * p0 + drift);
      worst_excess = std::max(worst_excess, residual - allowance);
    }
    return worst_excess;
  };
  double excess = structural(lab.records, lab.conserved);
  for (const auto& run : refs)
    excess = std::max(excess, structural(run.records, run.conserved));

  // (b) Emod(t) + int_s^t D <= Emod(s) + C dt over all sampled pairs
  auto pair_violation = [](const std::vector<DiagnosticsRecord>& recs) {
    std::vector<double> t, D;
    for (const auto& r : recs) {
      t.push_back(r.t);
      D.push_back(r.D);
    }
    auto intD = trapz_prefix(t, D);
    double vio = -1e300;
    for (std::size_t i = 0; i < recs.size(); ++i)
      for (std::size_t j = i + 1; j < recs.size(); ++j)
        vio = std::max(vio, recs[j].Emod + (intD[j] - intD[i]) - recs[i].Emod);
    return vio;
  };
  double vio0 = pair_violation(refs.front().records);
  double C = std::max(1.0, 2.0 * vio0 / refs.front().dt);
  bool pair_ok = true;
  for (std::size_t k = 1; k < refs.size(); ++k)
    if (pair_violation(refs[k].records) > C * refs[k].dt) pair_ok = false;
  double vio_lab = pair_violation(lab.records);
  pair_ok = pair_ok && vio_lab <= C * lab.cfg.time_dt;

  bool ok = excess <= 0.0 && pair_ok;
  tally.report(3, "modulated energy structure and dissipation inequality", ok,
               fmt("structure excess %.2e <= 0; pair violation <= %.2e dt (lab %.2e)",
                   excess, C, vio_lab));
}

void criterion_decay_lower_bound(Tally& tally, const LabRun& lab) {
  double worst = 1e300;
  bool pointwise = true;
  for (const auto& r : lab.records) {
    double slack = r.D - r.lambda_theory * r.Emod + 1e-6 * lab.Emod0;
    worst = std::min(worst, slack);
    if (slack < 0.0) pointwise = false;
  }
  // envelope: fit C on [1, T/2], validate within factor 2 on [T/2, T]
  double lambda = lab.records.back().lambda_theory;
  double Thalf = lab.records.back().t / 2.0;
  double Cfit = 0.0;
  for (const auto& r : lab.records)
    if (r.t >= 1.0 && r.t <= Thalf)
      Cfit = std::max(Cfit, r.Emod / (std::exp(-lambda * r.t) * lab.Emod0));
  bool envelope = Cfit > 0.0;
  double worst_ratio = 0.0;
  for (const auto& r : lab.records)
    if (r.t > Thalf) {
      double ratio = r.Emod / (std::exp(-lambda * r.t) * lab.Emod0);
      worst_ratio = std::max(worst_ratio, ratio / Cfit);
      if (ratio > 2.0 * Cfit) envelope = false;
    }
  bool ok = pointwise && envelope;
  tally.report(
      4, "dissipation dominates the modulated energy", ok,
      fmt("min(D - lambda Emod + tol) = %.2e >= 0; lambda = %.3f; tail ratio %.2f <= 2",
          worst, lambda, worst_ratio));
}

void criterion_w1_bound(Tally& tally, const LabRun& lab) {
  // each term of the lemma's left-hand side carries the proof's constants
  // sqrt(2) Emod^{1/2} + |<j> - <u>|/2; their sum then obeys the derived
  // constants 2 sqrt(2) Emod^{1/2} + |<j> - <u>|
  const Vec U = scale(lab.conserved, 0.5, 2);
  double worst = -1e300;
  bool per_sample = true;
  for (const auto& r : lab.records) {
    double uU2 = r.u_l2_sq - 2.0 * dot(r.mean_u, U, 2) + dot(U, U, 2);
    double fluid = std::sqrt(std::max(0.0, uU2));
    double gap = norm2(sub(r.mean_j, r.mean_u, 2), 2);
    // the mean identity behind the constants holds up to the measured
    // conservation drift of <u + j>
    double drift = norm2(sub(total_mean(r, 2), lab.conserved, 2), 2);
    double term_rhs = std::sqrt(2.0 * r.Emod) + 0.5 * gap + 0.5 * drift + 1e-10;
    double sum_rhs = 2.0 * std::sqrt(2.0 * r.Emod) + gap + drift + 1e-10;
    double excess = std::max(
        {r.w1_upper - term_rhs, fluid - term_rhs, r.w1_upper + fluid - sum_rhs});
    worst = std::max(worst, excess);
    if (excess > 0.0) per_sample = false;
  }

  bool coarse_ok = true;
  double coarse_margin = 1e300;
  for (std::size_t k = 0; k < lab.ens_snaps.size(); ++k) {
    const auto& p = lab.ens_snaps[k];
    double vmax = 0.05;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (int a = 0; a < 2; ++a)
        vmax = std::max(vmax, std::abs(p.v[i * 2 + a] - U[a]));
    vmax *= 1.01;
    const int xb = 8, vb = 8;
    auto hf = ot::phase_space_histogram(p.x, p.v, p.w, 2, xb, vb, U[0] - vmax,
                                        U[0] + vmax);
    std::vector<double> vcoord(p.size() * 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      vcoord[i * 2] = U[0];
      vcoord[i * 2 + 1] = U[1];
    }
    auto hm = ot::phase_space_histogram(p.x, vcoord, p.w, 2, xb, vb, U[0] - vmax,
                                        U[0] + vmax);
    double w1c = ot::w1_exact(hf, hm);
    double upper = diag::w1_monokinetic_upper(p, U);
    double binning = std::sqrt(2.0) / xb + std::sqrt(2.0) * (2.0 * vmax / vb);
    coarse_margin = std::min(coarse_margin, upper + binning - w1c);
    if (w1c > upper + binning) coarse_ok = false;
  }

  bool ok = per_sample && coarse_ok;
  tally.report(5, "monokinetic W1 bound with the proof's constants", ok,
               fmt("max(lhs - rhs) = %.2e <= 0; coarse-grid margin %.2e >= 0", worst,
                   coarse_margin));
}

void criterion_linear_oracle(Tally& tally, int threads) {
  bool ok = true;
  std::string detail;
  for (int variant = 0; variant < 2; ++variant) {
    Vec U = (variant == 0) ? vec_zero() : Vec{0.08, 0.03, 0.0};
    RunConfig cfg = io::parse_config("");
    cfg.grid_n = 32;
    cfg.particles_v_bins = 10;
    cfg.init_f0_sigma = 0.2;
    cfg.init_u0_family = "zero";
    cfg.init_u0_mean = U;
    cfg.fluid_frozen = true;
    cfg.coupling_enabled = false;
    cfg.time_dt = 0.01;
    cfg.time_t_final = 3.0;
    cfg.io_stride = 50;
    cfg.io_threads = threads;
    SimState s = io::make_initial_state(cfg);
    ParticleEnsemble initial = s.particles;
    double M0 = kinetic::moment(s.particles, cfg.particles_alpha);
    const auto params = cfg.step_params();
    const auto mon = cfg.monitor();
    for (int k = 0; k < 300; ++k) coupling::step(s, params, mon);

    // exact characteristic map applied to the same initial ensemble
    ParticleEnsemble mapped = initial;
    const double T = 3.0;
    const double decay = std::exp(-T);
    for (std::size_t i = 0; i < mapped.size(); ++i)
      for (int a = 0; a < 2; ++a) {
        double v0 = initial.v[i * 2 + a];
        mapped.v[i * 2 + a] = U[a] + decay * (v0 - U[a]);
        mapped.x[i * 2 + a] = wrap01(initial.x[i * 2 + a] + (1.0 - decay) * v0 +
                                     (T - (1.0 - decay)) * U[a]);
      }
    auto dep_sim = kinetic::deposit(s.particles, cfg.grid(), threads);
    auto dep_map = kinetic::deposit(mapped, cfg.grid(), threads);
    auto ha = ot::density_histogram(dep_sim.rho, 32);
    auto hb = ot::density_histogram(dep_map.rho, 32);
    double tb = hb.total();
    for (auto& m : hb.mass) m *= ha.total() / tb;
    double w1 = ot::w1_exact(ha, hb);
    double cell_diam = std::sqrt(2.0) / 32.0;
    if (w1 > 2.0 * cell_diam) ok = false;
    detail += fmt("%sU=%s: w1 %.1e <= %.3f", variant ? "; " : "",
                  variant ? "(0.08,0.03)" : "0", w1, 2.0 * cell_diam);

    if (variant == 0) {
      double MT = kinetic::moment(s.particles, cfg.particles_alpha);
      double expect = std::exp(-cfg.particles_alpha * T) * M0;
      double rel = std::abs(MT - expect) / expect;
      if (rel > 1e-10) ok = false;
      detail += fmt("; M_alpha rel err %.1e", rel);
    }
  }
  tally.report(6, "frozen-field kinetic oracle", ok, detail);
}

void criterion_straightening(Tally& tally, const LabRun& lab) {
  const double delta = coupling::delta_default();
  double worst_gradint = 0.0;
  for (const auto& r : lab.records) worst_gradint = std::max(worst_gradint, r.gradint0);
  bool compliant = worst_gradint <= delta;

  asymptotic::VelocityHistory history(lab.snap_times, lab.snap_u,
                                      scale(lab.conserved, 0.5, 2));
  std::size_t total = 0, good = 0;
  for (double t : {2.0, 5.0}) {
    for (int ix = 0; ix < 5; ++ix)
      for (int iy = 0; iy < 5; ++iy)
        for (int iv = 0; iv < 3; ++iv)
          for (int jv = 0; jv < 3; ++jv) {
            Vec x = {ix / 5.0 + 0.1, iy / 5.0 + 0.07, 0.0};
            Vec v = {-0.25 + iv * 0.25, -0.25 + jv * 0.25, 0.0};
            auto r = asymptotic::straightening_map(history, t, x, v);
            ++total;
            if (std::abs(r.detJac) >= std::exp(2.0 * t) / 2.0) ++good;
          }
  }
  double frac = double(good) / double(total);

  std::vector<double> t, rho, j, usup;
  for (const auto& r : lab.records) {
    t.push_back(r.t);
    rho.push_back(r.rho_sup);
    j.push_back(r.j_sup);
    usup.push_back(r.u_sup);
  }
  auto rep =
      asymptotic::moment_bound_check(t, rho, j, usup, lab.Nq, lab.cfg.particles_q, 2);
  bool ok = compliant && frac >= 0.99 && rep.rho_ok && rep.j_ok;
  tally.report(7, "straightening certificates and moment bounds", ok,
               fmt("int||grad u|| %.4f <= %.4f; det fraction %.3f >= 0.99; rho margin "
                   "%.2e; j margin %.2e",
                   worst_gradint, delta, frac, rep.worst_rho_margin, rep.worst_j_margin));
}

void criterion_profile(Tally& tally, const LabRun& lab, int threads) {
  asymptotic::VelocityHistory history(lab.snap_times, lab.snap_u,
                                      scale(lab.conserved, 0.5, 2));
  asymptotic::ProfileOptions opts;
  opts.v_bins = lab.cfg.particles_v_bins;
  opts.certify_stride = 8;
  opts.threads = threads;
  auto prof =
      asymptotic::rho_infinity(history, lab.cfg.initial_data(), lab.cfg.grid(), opts);

  bool residual_ok = prof.residual <= 1e-10;
  bool bounds_ok = prof.max_DxY <= 2.0 && prof.max_es_DvY <= 4.0;

  std::vector<double> ts, emods;
  for (const auto& r : lab.records) {
    ts.push_back(r.t);
    emods.push_back(r.Emod);
  }
  auto fit = diag::fit_decay_rate(ts, emods, 1.0);
  bool decay_ok = fit.lambda_fit > 0.0;
  auto tail = [&](double T) {
    return (2.0 / fit.lambda_fit) *
           std::sqrt(std::exp(fit.log_amplitude - fit.lambda_fit * T));
  };

  // discretization allowance: the deposited and quadrature representations
  // of the same limit measure, from the frozen-field oracle at final time
  double tol_disc;
  {
    kinetic::InitialDataSpec f0 = lab.cfg.initial_data();
    ParticleEnsemble p = kinetic::build_particles(f0, lab.cfg.grid());
    const double T = lab.records.back().t;
    const double decay = std::exp(-T);
    for (std::size_t i = 0; i < p.size(); ++i)
      for (int a = 0; a < 2; ++a) {
        p.x[i * 2 + a] = wrap01(p.x[i * 2 + a] + (1.0 - decay) * p.v[i * 2 + a]);
        p.v[i * 2 + a] *= decay;
      }
    auto dep = kinetic::deposit(p, lab.cfg.grid(), threads);
    auto lin = asymptotic::linear_asymptotic_profile(f0, vec_zero(), lab.cfg.grid(),
                                                     lab.cfg.particles_v_bins);
    auto ha = ot::density_histogram(dep.rho, 16);
    auto hb = ot::density_histogram(lin, 16);
    double tb = hb.total();
    for (auto& m : hb.mass) m *= ha.total() / tb;
    tol_disc = 2.0 * ot::w1_exact(ha, hb);
  }

  auto hprof = ot::density_histogram(prof.rho_inf, 16);
  const std::size_t S = lab.snap_times.size();
  std::vector<double> w1s, tails;
  for (std::size_t k = S - 3; k < S; ++k) {
    auto rbar = ot::renormalized_density(lab.snap_rho[k], lab.snap_times[k],
                                         scale(lab.conserved, 0.5, 2));
    auto hb = ot::density_histogram(rbar, 16);
    auto hp = hprof;
    double tp = hp.total();
    for (auto& m : hp.mass) m *= hb.total() / tp;
    w1s.push_back(ot::w1_exact(hb, hp));
    tails.push_back(tail(lab.snap_times[k]));
  }
  double C = std::max(0.0, (w1s[0] - tol_disc) / tails[0]);
  bool limit_ok = true;
  for (int k = 1; k < 3; ++k) {
    if (w1s[k] > C * tails[k] + tol_disc) limit_ok = false;
    if (w1s[k] > w1s[k - 1] * 1.05 + 1e-12) limit_ok = false;
  }

  // pairwise Cauchy structure between deposited snapshots
  ot::JabinCauchyBound bound(ts, emods);
  double Cpair = 0.0;
  bool first = true;
  bool pair_ok = true;
  for (std::size_t a = 0; a + 1 < S; a += 2) {
    if (lab.snap_times[a] < 1.0) continue;
    for (std::size_t b = a + 1; b < S; b += 3) {
      double denom = bound(lab.snap_times[a], lab.snap_times[b]);
      if (denom < 1e-9) continue;
      auto ha = ot::density_histogram(lab.snap_rho[a], 16);
      auto hb = ot::density_histogram(lab.snap_rho[b], 16);
      double tb = hb.total();
      for (auto& m : hb.mass) m *= ha.total() / tb;
      double ratio = ot::w1_exact(ha, hb) / denom;
      if (first) {
        Cpair = std::max(ratio, 1e-12);
        first = false;
      } else if (ratio > 3.0 * Cpair) {
        pair_ok = false;
      }
    }
  }

  bool ok = residual_ok && bounds_ok && limit_ok && pair_ok && decay_ok;
  tally.report(8, "asymptotic profile and W1-Cauchy structure", ok,
               fmt("residual %.1e <= 1e-10; |DxY| %.2f <= 2; |e^s DvY| %.2f <= 4; w1 "
                   "%.2e/%.2e/%.2e (tol %.2e); pair ok %s",
                   prof.residual, prof.max_DxY, prof.max_es_DvY, w1s[0], w1s[1], w1s[2],
                   tol_disc, pair_ok ? "yes" : "no"));
}

void criterion_ot_solver(Tally& tally) {
  Rng rng(2026);
  auto rand_hist = [&](int bins) {
    ot::Histogram h = ot::Histogram::zeros(
        {ot::Axis{bins, 0.0, 1.0, true}, ot::Axis{bins, 0.0, 1.0, true}});
    double tot = 0.0;
    for (auto& m : h.mass) {
      m = rng.uniform();
      tot += m;
    }
    for (auto& m : h.mass) m /= tot;
    return h;
  };
  bool axioms = true;
  double worst_sym = 0.0, worst_tri = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = rand_hist(16), b = rand_hist(16), c = rand_hist(16);
    double ab = ot::w1_exact(a, b);
    double ba = ot::w1_exact(b, a);
    double bc = ot::w1_exact(b, c);
    double ac = ot::w1_exact(a, c);
    worst_sym = std::max(worst_sym, std::abs(ab - ba));
    worst_tri = std::max(worst_tri, ac - ab - bc);
    if (std::abs(ab - ba) > 1e-10 || ac > ab + bc + 1e-10 || ab <= 0.0) axioms = false;
    if (ot::w1_exact(a, a) != 0.0) axioms = false;
  }

  bool duality = true;
  for (int trial = 0; trial < 10; ++trial) {
    auto a = rand_hist(12), b = rand_hist(12);
    std::vector<std::vector<double>> phis;
    for (int k = 0; k < 5; ++k) {
      std::vector<double> phi(a.bins());
      double c1 = rng.uniform(), c2 = rng.uniform();
      for (std::size_t m = 0; m < a.bins(); ++m) {
        auto ctr = a.center(m);
        phi[m] = (std::sin(kTwoPi * (ctr[0] - c1)) + std::cos(kTwoPi * (ctr[1] - c2))) /
                 (2.0 * kTwoPi);
      }
      phis.push_back(std::move(phi));
    }
    if (ot::dual_certificate(a, b, phis) > ot::w1_exact(a, b) + 1e-9) duality = false;
  }

  bool entropic = true;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    auto a = rand_hist(16), b = rand_hist(16);
    double exact = ot::w1_exact(a, b);
    auto ent = ot::w1_entropic(a, b, 1e-3);
    double rel = std::abs(ent.value - exact) / exact;
    worst_rel = std::max(worst_rel, rel);
    if (rel > 0.02 || ent.value < exact - 1e-12) entropic = false;
  }

  bool ok = axioms && duality && entropic;
  tally.report(9, "transport solver correctness", ok,
               fmt("axioms on 100 triples (sym %.1e, tri excess %.1e); duality held; "
                   "entropic rel err %.4f <= 0.02",
                   worst_sym, worst_tri, worst_rel));
}

void criterion_restart(Tally& tally, const std::string& work_dir, int threads) {
  fs::path root(work_dir);
  fs::remove_all(root / "restart");
  RunConfig cfg = io::parse_config("");
  cfg.grid_n = 16;
  cfg.particles_v_bins = 8;
  cfg.init_u0_h12 = 0.1;
  cfg.time_dt = 0.01;
  cfg.time_t_final = 1.0;
  cfg.io_stride = 1;
  cfg.io_checkpoint_stride = 50;
  cfg.io_threads = threads;

  auto full = io::run_simulation(cfg, (root / "restart" / "full").string());
  auto again = io::run_simulation(cfg, (root / "restart" / "again").string());
  bool deterministic = full.records.size() == again.records.size();
  if (deterministic)
    for (std::size_t i = 0; i < full.records.size(); ++i) {
      auto a = diag::record_values(full.records[i]);
      auto b = diag::record_values(again.records[i]);
      for (std::size_t c = 0; c < a.size(); ++c)
        if (a[c] != b[c]) deterministic = false;
    }

  auto [state, cfg2] = io::load_checkpoint(
      (root / "restart" / "full" / "checkpoints" / "ck_00000050.vnsc").string());
  std::vector<DiagnosticsRecord> resumed;
  io::run_simulation(cfg2, std::move(state), "", &resumed);
  bool match = !resumed.empty();
  double worst = 0.0;
  if (match) {
    std::size_t offset = full.records.size() - resumed.size();
    for (std::size_t i = 0; i < resumed.size(); ++i) {
      auto a = diag::record_values(full.records[offset + i]);
      auto b = diag::record_values(resumed[i]);
      for (std::size_t c = 0; c < a.size(); ++c) {
        double scaled = std::abs(a[c] - b[c]) / std::max(1.0, std::abs(a[c]));
        worst = std::max(worst, scaled);
        if (scaled > 1e-12) match = false;
      }
    }
  }
  bool ok = deterministic && match;
  tally.report(10, "determinism and bit-faithful restart", ok,
               fmt("reruns identical: %s; resume column error %.1e <= 1e-12",
                   deterministic ? "yes" : "no", worst));
}

}  // namespace

int run_acceptance(const AcceptanceOptions& opts) {
  fs::create_directories(opts.work_dir);
  Tally tally;

  std::printf("building reference runs (takes a couple of minutes)...\n");
  std::fflush(stdout);
  LabRun lab = run_compliant(opts.threads);
  std::vector<RefinementRun> refs;
  for (double dt : {0.02, 0.01, 0.005, 0.0025})
    refs.push_back(run_refinement(dt, opts.threads));

  criterion_conservation(tally, lab, refs);
  criterion_energy_identity(tally, refs);
  criterion_modulated_structure(tally, lab, refs);
  criterion_decay_lower_bound(tally, lab);
  criterion_w1_bound(tally, lab);
  criterion_linear_oracle(tally, opts.threads);
  criterion_straightening(tally, lab);
  criterion_profile(tally, lab, opts.threads);
  criterion_ot_solver(tally);
  criterion_restart(tally, opts.work_dir, opts.threads);

  if (!opts.keep_outputs) fs::remove_all(fs::path(opts.work_dir) / "restart");
  std::printf("%d of 10 criteria failed\n", tally.failed);
  return tally.failed;
}

}  // namespace vnslab::accept
