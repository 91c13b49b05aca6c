#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "vnslab/fourier_field.hpp"

namespace vnslab::kinetic {

using spectral::FourierField;
using spectral::GridField;
using spectral::GridSpec;

/// Weighted particles (x mod 1, v, w) discretizing the distribution f.
/// Weights sum to 1 at construction and are never mutated afterwards.
struct ParticleEnsemble {
  int d = 2;
  double q = 5.0;
  double v_max = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> x;  // N*d, wrapped into [0,1)
  std::vector<double> v;  // N*d
  std::vector<double> w;  // N, nonnegative

  std::size_t size() const { return w.size(); }
  Vec pos(std::size_t i) const {
    Vec p = vec_zero();
    for (int a = 0; a < d; ++a) p[a] = x[i * d + a];
    return p;
  }
  Vec vel(std::size_t i) const {
    Vec p = vec_zero();
    for (int a = 0; a < d; ++a) p[a] = v[i * d + a];
    return p;
  }
  bool finite() const;
};

/// Velocity field evaluator on the torus, used by the particle push.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Vec eval(const Vec& x) const = 0;
  virtual int dim() const = 0;
};

/// Multilinear (cloud-in-cell) evaluation of grid samples; the transpose of
/// the deposition kernel.
class GridVelocityField : public VelocityField {
 public:
  explicit GridVelocityField(GridField samples) : g_(std::move(samples)) {}
  explicit GridVelocityField(const FourierField& f) : g_(spectral::synthesize(f)) {}
  Vec eval(const Vec& x) const override;
  int dim() const override { return g_.spec.d; }
  const GridField& samples() const { return g_; }

 private:
  GridField g_;
};

class AnalyticVelocityField : public VelocityField {
 public:
  AnalyticVelocityField(int d, std::function<Vec(const Vec&)> fn)
      : d_(d), fn_(std::move(fn)) {}
  Vec eval(const Vec& x) const override { return fn_(x); }
  int dim() const override { return d_; }

 private:
  int d_;
  std::function<Vec(const Vec&)> fn_;
};

/// Closed-form step of dX/dt = V, dV/dt = ustar - V with ustar frozen:
///   v' = ustar + e^{-dt} (v - ustar)
///   x' = x + (1 - e^{-dt}) v + (dt - (1 - e^{-dt})) ustar
void exp_step(Vec& x, Vec& v, const Vec& ustar, double dt, int d);
/// Exact inverse of exp_step with the same frozen ustar.
void exp_step_inverse(Vec& x, Vec& v, const Vec& ustar, double dt, int d);

/// Advance all particles by dt with the exponential integrator; the field is
/// frozen per particle at the free-streaming midpoint x + (1-e^{-dt/2}) v.
/// Throws NumericalError if any particle becomes nonfinite.
ParticleEnsemble push(const ParticleEnsemble& p, const VelocityField& u_eval, double dt,
                      int threads = 1);

struct Moments {
  GridField rho;  // 1 component
  GridField j;    // d components
};

/// Cloud-in-cell deposition with periodic wrap. Mass and momentum exact:
/// sum_cells rho cellvol = sum w, sum_cells j cellvol = sum w v.
Moments deposit(const ParticleEnsemble& p, const GridSpec& grid, int threads = 1);

/// Multilinear interpolation of grid samples at arbitrary torus positions.
Vec interpolate(const GridField& g, const Vec& pos);
/// Same kernel for fields with arbitrarily many components (out[g.comps]).
void interpolate_all(const GridField& g, const Vec& pos, double* out);

/// Velocity moment M_alpha = sum w |v|^alpha (compensated summation).
double moment(const ParticleEnsemble& p, double alpha);

/// --- initial data ------------------------------------------------------

enum class SpaceFamily { Uniform, Cosine, Cosine2 };
enum class VelocityFamily { Gauss, PolyTail, Bump, Ring };

/// f0(x,v) = space_profile(x) * velocity_profile(v), both normalized to
/// unit mass; the velocity profile satisfies N_q(f0) < infinity.
struct InitialDataSpec {
  int d = 2;
  SpaceFamily space = SpaceFamily::Cosine;
  double space_amp = 0.3;
  VelocityFamily velocity = VelocityFamily::Gauss;
  double sigma = 0.25;    // gauss width / bump and ring radius
  double q = 5.0;         // polynomial tail exponent (decay order)
  Vec center = vec_zero();  // velocity-space center
  double v_max = 0.0;     // 0 -> derive from tail_target
  double tail_target = 1e-8;
  int x_per_cell = 1;     // spatial quadrature points per grid cell per axis
  int v_bins = 12;        // velocity lattice points per axis
  std::uint64_t seed = 1;
};

/// Precompiled evaluator of the closed-form f0 (normalization resolved once).
class F0Eval {
 public:
  explicit F0Eval(const InitialDataSpec& s);
  double operator()(const Vec& x, const Vec& v) const {
    return space(x) * velocity(v);
  }
  double space(const Vec& x) const;
  double velocity(const Vec& v) const;
  double v_max() const { return v_max_; }
  const InitialDataSpec& spec() const { return spec_; }

 private:
  InitialDataSpec spec_;
  double v_max_ = 0.0;
  double inv_norm_ = 1.0;
};

/// Pointwise evaluation of the closed-form f0 (convenience; compiles an
/// F0Eval per call — use F0Eval directly in loops).
double f0_eval(const InitialDataSpec& s, const Vec& x, const Vec& v);
double f0_space_profile(const InitialDataSpec& s, const Vec& x);

/// Effective velocity-domain radius (resolves the v_max policy).
double resolve_v_max(const InitialDataSpec& s);
/// Mass of the discarded |v - center| > v_max tail of the untruncated profile.
double tail_mass(const InitialDataSpec& s, double v_max);

/// sup over (x,v) of (1 + |v|^q) f0; exact for PolyTail (centered), refined
/// 1-d search along the attaining ray otherwise. Throws on unsupported input.
double estimate_Nq(const InitialDataSpec& s, double q);

/// Deterministic particle discretization of f0 on a phase-space lattice with
/// weights f0 * cell volume, normalized so that sum w = 1.
ParticleEnsemble build_particles(const InitialDataSpec& s, const GridSpec& grid);

}  // namespace vnslab::kinetic
