#include "vnslab/diagnostics.hpp"

#include <cmath>

namespace vnslab::diag {

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "t",          "E",           "D",         "Emod",      "mass",
      "mean_u_x",   "mean_u_y",    "mean_u_z",  "mean_j_x",  "mean_j_y",
      "mean_j_z",   "M_alpha",     "u_l2_sq",   "rho_sup",   "j_sup",     "u_sup",
      "gradsup",    "gradint",     "gradint0",  "F_h12_sq",  "criterion_value",
      "strong_ok",  "bootstrap_ok", "lambda_theory", "w1_upper", "eqmoy_residual"};
  return cols;
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
  return {r.t,
          r.E,
          r.D,
          r.Emod,
          r.mass,
          r.mean_u[0],
          r.mean_u[1],
          r.mean_u[2],
          r.mean_j[0],
          r.mean_j[1],
          r.mean_j[2],
          r.M_alpha,
          r.u_l2_sq,
          r.rho_sup,
          r.j_sup,
          r.u_sup,
          r.gradsup,
          r.gradint,
          r.gradint0,
          r.F_h12_sq,
          r.criterion_value,
          r.strong_ok ? 1.0 : 0.0,
          r.bootstrap_ok ? 1.0 : 0.0,
          r.lambda_theory,
          r.w1_upper,
          r.eqmoy_residual};
}

double kinetic_energy(const FourierField& u, const ParticleEnsemble& p) {
  double fluid = spectral::l2_norm(u);
  fluid = 0.5 * fluid * fluid;
  return fluid + 0.5 * kinetic::moment(p, 2.0);
}

double dissipation(const kinetic::GridVelocityField& u_phys, const FourierField& u,
                   const ParticleEnsemble& p) {
  KahanSum drag;
  const int d = p.d;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Vec ui = u_phys.eval(p.pos(i));
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      double dvi = ui[a] - p.v[i * d + a];
      s += dvi * dvi;
    }
    drag.add(p.w[i] * s);
  }
  return drag.value() + spectral::grad_l2_sq(u);
}

double dissipation(const FourierField& u, const ParticleEnsemble& p) {
  kinetic::GridVelocityField g(u);
  return dissipation(g, u, p);
}

double modulated_energy(const FourierField& u, const ParticleEnsemble& p) {
  const int d = p.d;
  Vec mean_j = vec_zero();
  {
    KahanSum jm[3];
    for (std::size_t i = 0; i < p.size(); ++i)
      for (int a = 0; a < d; ++a) jm[a].add(p.w[i] * p.v[i * d + a]);
    for (int a = 0; a < d; ++a) mean_j[a] = jm[a].value();
  }
  KahanSum spread;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      double dv = p.v[i * d + a] - mean_j[a];
      s += dv * dv;
    }
    spread.add(p.w[i] * s);
  }
  Vec mean_u = u.mean();
  // ||u - <u>||^2 = sum over nonzero modes
  KahanSum fluct;
  for (std::size_t m = 1; m < u.modes(); ++m)
    for (int c = 0; c < d; ++c) fluct.add(std::norm(u.at(m, c)));
  double gap = 0.0;
  for (int a = 0; a < d; ++a) {
    double dd = mean_j[a] - mean_u[a];
    gap += dd * dd;
  }
  return 0.5 * spread.value() + 0.5 * fluct.value() + 0.25 * gap;
}

double identity_eqmoy(const Vec& mean_u, const Vec& mean_j, const Vec& conserved_momentum,
                      int d) {
  Vec half = scale(conserved_momentum, 0.5, d);
  double lhs = 0.0;
  for (int a = 0; a < d; ++a) {
    double dd = mean_j[a] - mean_u[a];
    lhs += dd * dd;
  }
  lhs *= 0.25;
  double rj = 0.0, ru = 0.0;
  for (int a = 0; a < d; ++a) {
    double dj = mean_j[a] - half[a];
    double du = mean_u[a] - half[a];
    rj += dj * dj;
    ru += du * du;
  }
  return std::max(std::abs(lhs - rj), std::abs(lhs - ru));
}

double lambda_lower_bound(double rho_sup_running_max, double c_P) {
  if (rho_sup_running_max < 0.0)
    throw NumericalError("lambda_lower_bound: negative density bound");
  double alpha;
  if (rho_sup_running_max == 0.0)
    alpha = 0.0;
  else
    alpha = 1.0 / (c_P / (2.0 * rho_sup_running_max) + 1.0);
  return std::min(1.0 - alpha, 0.5 * c_P);
}

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& emod,
                        double t_burn) {
  if (t.size() != emod.size()) throw NumericalError("fit_decay_rate: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_burn) continue;
    if (emod[i] <= 0.0)
      throw NumericalError("fit_decay_rate: nonpositive modulated energy in fit window");
    xs.push_back(t[i]);
    ys.push_back(std::log(emod[i]));
  }
  if (xs.size() < 2) throw NumericalError("fit_decay_rate: window has fewer than 2 samples");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  DecayFit out;
  if (sxx == 0.0) return out;
  double slope = sxy / sxx;
  out.lambda_fit = -slope;
  out.log_amplitude = my - slope * mx;
  out.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

double w1_monokinetic_upper(const ParticleEnsemble& p, const Vec& U) {
  KahanSum s;
  const int d = p.d;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double r = 0.0;
    for (int a = 0; a < d; ++a) {
      double dv = p.v[i * d + a] - U[a];
      r += dv * dv;
    }
    s.add(p.w[i] * std::sqrt(r));
  }
  return s.value();
}

}  // namespace vnslab::diag
