#pragma once

#include "vnslab/diagnostics.hpp"

namespace vnslab::coupling {

using diag::DiagnosticsRecord;
using kinetic::ParticleEnsemble;
using spectral::FourierField;
using spectral::TimeScheme;

/// Root of delta * e^delta = 1/9, the straightening smallness threshold.
double delta_default();

struct MonitorConfig {
  double C_star = 1.0;
  double delta = 0.0;  // 0 -> delta_default()
  double c_P = diag::poincare_gap();
  double resolved_delta() const { return delta > 0.0 ? delta : delta_default(); }
};

struct StepParams {
  double dt = 0.01;
  TimeScheme scheme = TimeScheme::Lie;
  bool coupling = true;       // apply the Brinkman force to the fluid
  bool fluid_frozen = false;  // keep u fixed (kinetic oracle runs)
  double dt_max = 0.0;        // 0 -> no guard
  int threads = 1;
};

/// Deposited moments, force and norms of one state; recomputable from
/// (u, particles), so never serialized.
struct StateCache {
  bool valid = false;
  spectral::GridField rho;
  spectral::GridField j;
  FourierField F;
  double gradsup = 0.0;
  double F_h12_sq = 0.0;
};

/// Full simulation state plus the running integrals needed by the monitors.
struct SimState {
  double t = 0.0;
  FourierField u;
  ParticleEnsemble particles;

  // trapezoid accumulators
  double accum_gradint = 0.0;   // int_1^t ||grad u||_inf
  double accum_gradint0 = 0.0;  // int_0^t ||grad u||_inf
  double accum_Fnorm = 0.0;     // int_0^t ||F||^2_{H^{-1/2}}

  double rho_sup_max = 0.0;  // running max of the deposited density sup
  bool strong_existence_ok = true;
  bool bootstrap_ok = true;
  std::int64_t step_index = 0;

  // conserved reference data fixed at t = 0
  Vec conserved_momentum = vec_zero();  // <u0 + j_f0>
  double u0_h12_sq = 0.0;               // ||u0||^2_{H^{1/2}}
  double E0 = 0.0;
  double Emod0 = 0.0;
  double alpha = 4.0;  // moment order tracked in records

  StateCache cache;
};

/// Deposit moments and assemble the force for the current state (no-op if
/// the cache is already valid).
void refresh_cache(SimState& s, int threads = 1);

/// F = j - rho u assembled in physical space, transformed and dealiased.
/// Projection happens inside ns_step.
FourierField brinkman_force(const spectral::GridField& rho, const spectral::GridField& j,
                            const FourierField& u);

/// Initialize the conserved quantities of a freshly built state.
void finalize_initial_state(SimState& s, int threads = 1);

/// One Lie-split step of the coupled system:
/// deposit -> Brinkman force -> fluid step -> particle push with the
/// time-averaged field -> accumulator/flag update. Throws NumericalError on
/// blow-up.
void step(SimState& s, const StepParams& p, const MonitorConfig& m);

struct CriterionResult {
  double value = 0.0;
  bool ok = false;
};

/// ||u0||^2_{H^{1/2}} + C_star int_0^t ||F||^2_{H^{-1/2}} < 1 / C_star^2.
CriterionResult strong_existence_criterion(const SimState& s, const MonitorConfig& m);

/// int_1^t ||grad u||_inf < delta (meaningful once t >= 1).
CriterionResult bootstrap_monitor(const SimState& s, const MonitorConfig& m);

/// Full diagnostics sample of the current state (refreshes the cache).
DiagnosticsRecord diagnose(SimState& s, const MonitorConfig& m, int threads = 1);

}  // namespace vnslab::coupling
