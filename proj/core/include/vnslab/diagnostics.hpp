#pragma once

#include <optional>

#include "vnslab/particles.hpp"
#include "vnslab/spectral_fluid.hpp"

namespace vnslab::diag {

using kinetic::ParticleEnsemble;
using spectral::FourierField;

/// One time-sample of every scalar functional tracked along a run.
struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;        // kinetic energy
  double D = 0.0;        // dissipation
  double Emod = 0.0;     // modulated energy
  double mass = 0.0;
  Vec mean_u = vec_zero();
  Vec mean_j = vec_zero();
  double M_alpha = 0.0;
  double u_l2_sq = 0.0;  // ||u||_L2^2
  double rho_sup = 0.0;  // max deposited density
  double j_sup = 0.0;    // max deposited |j|
  double u_sup = 0.0;    // sup |u|
  double gradsup = 0.0;  // ||grad u||_inf at this sample
  double gradint = 0.0;  // int_1^t ||grad u||_inf
  double gradint0 = 0.0; // int_0^t ||grad u||_inf
  double F_h12_sq = 0.0; // ||F||^2_{H^{-1/2}} at this sample
  double criterion_value = 0.0;  // strong-existence left-hand side
  bool strong_ok = true;
  bool bootstrap_ok = true;
  double lambda_theory = 0.0;
  double w1_upper = 0.0;
  double eqmoy_residual = 0.0;
};

/// Column names, in emission order (stable CSV schema).
const std::vector<std::string>& record_columns();
std::vector<double> record_values(const DiagnosticsRecord& r);

/// E = 1/2 ||u||_L2^2 + 1/2 sum w |v|^2.
double kinetic_energy(const FourierField& u, const ParticleEnsemble& p);

/// D = sum w |u(x_i) - v_i|^2 + ||grad u||_L2^2 with interpolated u.
double dissipation(const FourierField& u, const ParticleEnsemble& p);
double dissipation(const kinetic::GridVelocityField& u_phys, const FourierField& u,
                   const ParticleEnsemble& p);

/// 1/2 sum w |v - <j>|^2 + 1/2 ||u - <u>||_L2^2 + 1/4 |<j> - <u>|^2.
double modulated_energy(const FourierField& u, const ParticleEnsemble& p);

/// Residual of the mean identity relating |<j>-<u>| to the conserved
/// <u0 + j_f0>: zero when the total momentum is exactly conserved.
double identity_eqmoy(const Vec& mean_u, const Vec& mean_j, const Vec& conserved_momentum,
                      int d);

/// alpha = (c_P / (2 M) + 1)^{-1}; lambda = min(1 - alpha, c_P / 2).
double lambda_lower_bound(double rho_sup_running_max, double c_P);

struct DecayFit {
  double lambda_fit = 0.0;
  double r2 = 0.0;
  double log_amplitude = 0.0;  // intercept of the log-linear fit
};

/// Least-squares slope of log(Emod) over samples with t >= t_burn.
/// Throws NumericalError on nonpositive values in the window.
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& emod,
                        double t_burn);

/// sum w |v_i - U|; with U = <u0+j_f0>/2 an upper bound for the
/// velocity-marginal part of the monokinetic W1 distance.
double w1_monokinetic_upper(const ParticleEnsemble& p, const Vec& U);

/// Spectral-gap constant of the unit torus in the convention
/// ||grad u||_L2^2 >= c_P ||u - <u>||_L2^2.
inline double poincare_gap() { return kTwoPi * kTwoPi; }

}  // namespace vnslab::diag
