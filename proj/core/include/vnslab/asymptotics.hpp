#pragma once

#include "vnslab/particles.hpp"

namespace vnslab::asymptotic {

using kinetic::InitialDataSpec;
using spectral::FourierField;
using spectral::GridField;
using spectral::GridSpec;

/// Time-indexed velocity snapshots with linear-in-time interpolation of the
/// physical samples; beyond the last snapshot the field is the constant
/// drift (valid once the modulated energy has decayed below threshold).
class VelocityHistory {
 public:
  VelocityHistory() = default;
  VelocityHistory(std::vector<double> times, const std::vector<FourierField>& fields,
                  const Vec& drift);

  int dim() const { return d_; }
  double t_first() const { return times_.front(); }
  double t_last() const { return times_.back(); }
  const Vec& drift() const { return drift_; }
  const std::vector<double>& times() const { return times_; }

  /// u(t, x) (lab frame); constant drift for t > t_last.
  Vec eval_u(double t, const Vec& x) const;
  /// grad u(t, x); zero for t > t_last. G[row][col] = d u_row / d x_col.
  void eval_grad(double t, const Vec& x, double G[3][3]) const;
  /// ||grad u(t)||_inf, interpolated between snapshots.
  double gradsup(double t) const;
  /// trapezoid of gradsup over the covered window.
  double grad_integral() const;

 private:
  int d_ = 2;
  std::vector<double> times_;
  std::vector<GridField> u_;     // physical samples per snapshot
  std::vector<GridField> grad_;  // d*d components per snapshot
  std::vector<double> gradsup_;
  Vec drift_ = vec_zero();
};

/// e^{dt} f0(x - tU - (e^t - 1)(v - U), U + e^t (v - U)): the closed-form
/// solution of the friction Vlasov equation with constant field U.
double linear_solution(const kinetic::F0Eval& f0, double t, const Vec& x, const Vec& v,
                       const Vec& U);
double linear_solution(const InitialDataSpec& f0, double t, const Vec& x, const Vec& v,
                       const Vec& U);

/// Co-moving asymptotic profile of the linear equation:
/// rho(y) = int f0(y + U - w, w) dw on the truncated velocity box.
GridField linear_asymptotic_profile(const InitialDataSpec& f0, const Vec& U,
                                    const GridSpec& grid, int v_bins = 48);

enum class JacobianMethod { FiniteDifference, Variational };

struct StraighteningOptions {
  int substeps_per_unit = 200;  // backward integration resolution
  double fd_h = 1e-4;
  JacobianMethod method = JacobianMethod::FiniteDifference;
};

struct StraighteningResult {
  Vec V0 = vec_zero();      // V(0; t, x, v)
  double detJac = 0.0;      // det D_v V(0; t, x,   v)
};

/// Backward characteristics with the same exponential integrator as the
/// particle push; Jacobian by central differences (or variational sweep).
StraighteningResult straightening_map(const VelocityHistory& h, double t, const Vec& x,
                                      const Vec& v, const StraighteningOptions& opts = {});

struct PicardOptions {
  double tol = 1e-10;
  int max_iters = 200;
  double tau_step = 0.05;  // quadrature/path resolution
  double fd_h = 1e-4;
};

struct PicardPath {
  std::vector<double> tau;
  std::vector<Vec> Y;
  int iters = 0;
  double residual = 0.0;
};

/// Infinite-horizon renormalized characteristic foot map: solves
///   Y^s = x - e^{-s} v + drift (e^{-s} + s)
///         - int_0^inf [1_{[0,s]} e^{tau-s} + 1_{tau>=s}] (u(tau,Y^tau) - drift) dtau
/// by Picard iteration from the linear seed. Throws if the contraction
/// precondition 2 int ||grad u||_inf < 1 fails or on non-convergence.
PicardPath picard_Y_infinity(const VelocityHistory& h, const Vec& x, const Vec& v,
                             const PicardOptions& opts = {});

struct JacobianResult {
  double A[3][3] = {{0}};  // the limit Jacobian field at (x, v)
  double detA = 0.0;
  double max_es_DvY = 0.0;  // sup_s |e^s D_v Y^s| (Frobenius)
};

/// A(inf, x, v) = I + int_0^inf e^tau grad u(tau, Y^tau) D_v Y^tau dtau with
/// D_v Y by re-solved central differences (or the variational sweep).
JacobianResult jacobian_A(const VelocityHistory& h, const Vec& x, const Vec& v,
                          const PicardOptions& opts = {},
                          JacobianMethod method = JacobianMethod::FiniteDifference);

/// D_x Y^s and the diffeomorphism certificate data for Lambda_{inf,v}.
struct XJacobianResult {
  double DxY0[3][3] = {{0}};
  double det_DxY0 = 0.0;
  double max_DxY = 0.0;       // sup_s |D_x Y^s| (Frobenius)
  double dev_from_id = 0.0;   // |D_x Y^0 - I| (Frobenius)
};
XJacobianResult x_jacobian(const VelocityHistory& h, const Vec& x, const Vec& v,
                           const PicardOptions& opts = {});

struct ProfileOptions {
  int v_bins = 16;
  PicardOptions picard;
  int certify_stride = 8;  // x-jacobian certificates on every k-th sample
  int threads = 1;
};

struct ProfileResult {
  GridField rho_inf;
  double mass = 0.0;
  int picard_iters = 0;      // worst case over samples
  double residual = 0.0;     // worst case over samples
  double min_detA = 0.0, max_detA = 0.0;
  double max_es_DvY = 0.0;   // lem-Zt style bound certificates
  double max_DxY = 0.0;
  double max_DxLambda_dev = 0.0;
  double min_det_DxLambda = 0.0;
  std::size_t samples = 0;
  std::size_t certified = 0;
};

/// rho_inf(x) = int f0(Y^0_{inf,x,v}, v) |det A(inf,x,v)| dv by quadrature
/// over the truncated velocity box; embarrassingly parallel over x.
ProfileResult rho_infinity(const VelocityHistory& h, const InitialDataSpec& f0,
                           const GridSpec& grid, const ProfileOptions& opts = {});

/// I_q = int_{R^d} (1+|v|)/(1+|v|^q) dv by adaptive quadrature.
/// Throws ConfigError if q <= d + 1 (divergent).
double compute_Iq(double q, int d);

struct MomentBoundReport {
  double Iq = 0.0;
  double Nq = 0.0;
  double worst_rho_margin = 0.0;  // min over samples of bound - measured
  double worst_j_margin = 0.0;
  bool rho_ok = false;
  bool j_ok = false;
};

/// Checks the straightening moment bounds along a recorded run:
/// rho bound 2 I_q N_q, j bound 2 I_q e^{-t}(int_0^t e^s ||u||_inf + 1) N_q.
MomentBoundReport moment_bound_check(const std::vector<double>& t,
                                     const std::vector<double>& rho_sup,
                                     const std::vector<double>& j_sup,
                                     const std::vector<double>& u_sup, double Nq, double q,
                                     int d, double smoothing_tol = 0.0);

}  // namespace vnslab::asymptotic
