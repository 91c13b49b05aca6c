#pragma once

#include "vnslab/fourier_field.hpp"

namespace vnslab::spectral {

/// Sobolev norm selector. Homogeneous uses the multiplier (2*pi*|k|)^s and
/// excludes the mean mode; inhomogeneous uses (1 + (2*pi*|k|)^2)^{s/2}.
struct SobolevSpec {
  double s = 0.0;
  bool homogeneous = false;
};

/// Projection onto divergence-free fields: c_k -> c_k - k (k.c_k)/|k|^2,
/// mean mode untouched.
FourierField leray_project(const FourierField& field);

double sobolev_norm(const FourierField& field, const SobolevSpec& spec);

/// Exact heat flow: c_k -> exp(-(2 pi |k|)^2 t) c_k.
FourierField heat_semigroup(const FourierField& field, double t);

enum class TimeScheme { Lie, Strang };

struct NsStepOptions {
  TimeScheme scheme = TimeScheme::Lie;
  double dt_max = 0.0;  // 0 disables the dt guard
};

/// One incompressible Navier-Stokes step with external force F:
/// exact diffusion by the heat multiplier, advection in rotational form
/// evaluated pseudo-spectrally with 2/3 dealiasing, force projected.
/// Throws NumericalError on nonfinite coefficients.
FourierField ns_step(const FourierField& u, const FourierField& F, double dt,
                     const NsStepOptions& opts = {});

/// max over a 2x-refined physical grid of the Frobenius norm of grad u;
/// a lower bound on the true sup within interpolation error.
double grad_sup_norm(const FourierField& u);

/// max over the physical grid of |u| (Euclidean norm per point).
double sup_norm(const FourierField& u);

/// || grad u ||_{L2}^2 via Parseval (integrand of the fluid dissipation).
double grad_l2_sq(const FourierField& u);

/// CFL-like guard: 0.5 / (2 pi K max|u|) with K the dealias cutoff.
double suggested_dt_max(const FourierField& u);

/// Deterministic random divergence-free band-limited field with the
/// prescribed homogeneous H^{1/2} norm (zero mean unless `mean` given).
FourierField random_div_free_field(const GridSpec& spec, int kmax, double h12_target,
                                   std::uint64_t seed, const Vec& mean = vec_zero());

/// Classical Taylor-Green vortex (d = 2) with amplitude a.
FourierField taylor_green(const GridSpec& spec, double a);

}  // namespace vnslab::spectral
