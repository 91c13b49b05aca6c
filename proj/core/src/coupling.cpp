#include "vnslab/coupling.hpp"

#include <cmath>

namespace vnslab::coupling {

double delta_default() {
  // delta e^delta = 1/9 by bisection
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < 1.0 / 9.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

FourierField brinkman_force(const spectral::GridField& rho, const spectral::GridField& j,
                            const FourierField& u) {
  const auto& spec = u.spec();
  spectral::GridField uphys = spectral::synthesize(u);
  spectral::GridField F(spec, spec.d);
  for (std::size_t p = 0; p < spec.points(); ++p)
    for (int c = 0; c < spec.d; ++c)
      F.at(p, c) = j.at(p, c) - rho.at(p, 0) * uphys.at(p, c);
  FourierField out = spectral::analyze(F);
  spectral::dealias(out, spec.dealias_cutoff());
  return out;
}

namespace {

double h_minus_half_sq(const FourierField& F) {
  double v = spectral::sobolev_norm(F, spectral::SobolevSpec{-0.5, false});
  return v * v;
}

double grid_sup(const spectral::GridField& g) {
  double best = 0.0;
  for (std::size_t p = 0; p < g.spec.points(); ++p) {
    double m = 0.0;
    for (int c = 0; c < g.comps; ++c) m += g.at(p, c) * g.at(p, c);
    best = std::max(best, m);
  }
  return std::sqrt(best);
}

// advance accumulators over [s.t, s.t + dt] given integrand samples at both
// ends; the int_1 variant clips the segment at t = 1 with linear
// interpolation of the integrand.
void advance_accumulators(SimState& s, double dt, double gradsup_now, double fh_now,
                          double gradsup_next, double fh_next) {
  const double t0 = s.t, t1 = s.t + dt;
  s.accum_gradint0 += 0.5 * (gradsup_now + gradsup_next) * dt;
  s.accum_Fnorm += 0.5 * (fh_now + fh_next) * dt;
  if (t1 > 1.0) {
    double a = std::max(t0, 1.0);
    double frac = (dt > 0.0) ? (a - t0) / dt : 0.0;
    double ga = gradsup_now + frac * (gradsup_next - gradsup_now);
    s.accum_gradint += 0.5 * (ga + gradsup_next) * (t1 - a);
  }
}

}  // namespace

void refresh_cache(SimState& s, int threads) {
  if (s.cache.valid) return;
  auto moments = kinetic::deposit(s.particles, s.u.spec(), threads);
  s.cache.F = brinkman_force(moments.rho, moments.j, s.u);
  s.cache.rho = std::move(moments.rho);
  s.cache.j = std::move(moments.j);
  s.cache.gradsup = spectral::grad_sup_norm(s.u);
  s.cache.F_h12_sq = h_minus_half_sq(s.cache.F);
  s.cache.valid = true;
  s.rho_sup_max = std::max(s.rho_sup_max, grid_sup(s.cache.rho));
}

void finalize_initial_state(SimState& s, int threads) {
  Vec mean_j = vec_zero();
  {
    KahanSum acc[3];
    for (std::size_t i = 0; i < s.particles.size(); ++i)
      for (int a = 0; a < s.particles.d; ++a)
        acc[a].add(s.particles.w[i] * s.particles.v[i * s.particles.d + a]);
    for (int a = 0; a < s.particles.d; ++a) mean_j[a] = acc[a].value();
  }
  s.conserved_momentum = add(s.u.mean(), mean_j, s.particles.d);
  double h12 = spectral::sobolev_norm(s.u, spectral::SobolevSpec{0.5, false});
  s.u0_h12_sq = h12 * h12;
  s.E0 = diag::kinetic_energy(s.u, s.particles);
  s.Emod0 = diag::modulated_energy(s.u, s.particles);
  refresh_cache(s, threads);
}

void step(SimState& s, const StepParams& p, const MonitorConfig& m) {
  if (p.dt <= 0.0) throw NumericalError("step requires dt > 0");
  if (p.dt_max > 0.0 && p.dt > p.dt_max)
    throw NumericalError("step: dt exceeds dt_max");

  refresh_cache(s, p.threads);
  const double gradsup_now = s.cache.gradsup;
  const double fh_now = s.cache.F_h12_sq;

  FourierField u_next = s.u;
  if (!p.fluid_frozen) {
    FourierField force = s.cache.F;
    if (!p.coupling) force *= 0.0;
    spectral::NsStepOptions opts;
    opts.scheme = p.scheme;
    opts.dt_max = p.dt_max;
    u_next = spectral::ns_step(s.u, force, p.dt, opts);
  }

  // particles see the time-averaged fluid field
  FourierField u_avg = s.u;
  u_avg += u_next;
  u_avg *= 0.5;
  kinetic::GridVelocityField sampler(u_avg);
  ParticleEnsemble parts_next = kinetic::push(s.particles, sampler, p.dt, p.threads);

  const double dt = p.dt;
  s.u = std::move(u_next);
  s.particles = std::move(parts_next);
  s.cache.valid = false;
  refresh_cache(s, p.threads);

  advance_accumulators(s, dt, gradsup_now, fh_now, s.cache.gradsup, s.cache.F_h12_sq);
  s.t += dt;
  s.step_index += 1;

  auto strong = strong_existence_criterion(s, m);
  if (!strong.ok) s.strong_existence_ok = false;
  if (s.t >= 1.0) {
    auto boot = bootstrap_monitor(s, m);
    if (!boot.ok) s.bootstrap_ok = false;
  }
}

CriterionResult strong_existence_criterion(const SimState& s, const MonitorConfig& m) {
  CriterionResult r;
  r.value = s.u0_h12_sq + m.C_star * s.accum_Fnorm;
  r.ok = r.value < 1.0 / (m.C_star * m.C_star);
  return r;
}

CriterionResult bootstrap_monitor(const SimState& s, const MonitorConfig& m) {
  CriterionResult r;
  r.value = s.accum_gradint;
  r.ok = r.value < m.resolved_delta();
  return r;
}

DiagnosticsRecord diagnose(SimState& s, const MonitorConfig& m, int threads) {
  refresh_cache(s, threads);
  DiagnosticsRecord r;
  r.t = s.t;

  r.E = diag::kinetic_energy(s.u, s.particles);
  r.D = diag::dissipation(s.u, s.particles);
  r.Emod = diag::modulated_energy(s.u, s.particles);
  r.mass = kinetic::moment(s.particles, 0.0);
  r.mean_u = s.u.mean();
  {
    KahanSum acc[3];
    for (std::size_t i = 0; i < s.particles.size(); ++i)
      for (int a = 0; a < s.particles.d; ++a)
        acc[a].add(s.particles.w[i] * s.particles.v[i * s.particles.d + a]);
    for (int a = 0; a < s.particles.d; ++a) r.mean_j[a] = acc[a].value();
  }
  r.M_alpha = kinetic::moment(s.particles, s.alpha);
  {
    double l2 = spectral::l2_norm(s.u);
    r.u_l2_sq = l2 * l2;
  }
  r.rho_sup = grid_sup(s.cache.rho);
  r.j_sup = grid_sup(s.cache.j);
  r.u_sup = spectral::sup_norm(s.u);
  r.gradsup = s.cache.gradsup;
  r.gradint = s.accum_gradint;
  r.gradint0 = s.accum_gradint0;
  r.F_h12_sq = s.cache.F_h12_sq;
  auto strong = strong_existence_criterion(s, m);
  r.criterion_value = strong.value;
  r.strong_ok = s.strong_existence_ok;
  r.bootstrap_ok = s.bootstrap_ok;
  r.lambda_theory =
      diag::lambda_lower_bound(std::max(s.rho_sup_max, r.rho_sup), m.c_P);
  Vec U = scale(s.conserved_momentum, 0.5, s.particles.d);
  r.w1_upper = diag::w1_monokinetic_upper(s.particles, U);
  r.eqmoy_residual =
      diag::identity_eqmoy(r.mean_u, r.mean_j, s.conserved_momentum, s.particles.d);
  return r;
}

}  // namespace vnslab::coupling
