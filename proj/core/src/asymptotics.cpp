#include "vnslab/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "vnslab/spectral_fluid.hpp"

namespace vnslab::asymptotic {

namespace {

double det_d(const double M[3][3], int d) {
  if (d == 2) return M[0][0] * M[1][1] - M[0][1] * M[1][0];
  return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
         M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
         M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
}

double frobenius(const double M[3][3], int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += M[i][j] * M[i][j];
  return std::sqrt(s);
}

Vec wrapv(const Vec& x, int d) {
  Vec y = x;
  for (int a = 0; a < d; ++a) y[a] = wrap01(y[a]);
  return y;
}

}  // namespace

VelocityHistory::VelocityHistory(std::vector<double> times,
                                 const std::vector<FourierField>& fields, const Vec& drift)
    : times_(std::move(times)), drift_(drift) {
  if (times_.empty() || times_.size() != fields.size())
    throw NumericalError("velocity history: empty or mismatched snapshots");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (times_[i] <= times_[i - 1])
      throw NumericalError("velocity history: times must be strictly increasing");
  d_ = fields.front().dim();
  for (const auto& f : fields) {
    u_.push_back(spectral::synthesize(f));
    // spectral gradient, d*d components: row = velocity component, col = axis
    FourierField gf(f.spec());
    GridField gp(f.spec(), d_ * d_);
    for (int col = 0; col < d_; ++col) {
      FourierField der(f.spec());
      for (std::size_t m = 0; m < f.modes(); ++m) {
        auto k = f.freq(m);
        spectral::Complex ik(0.0, kTwoPi * k[col]);
        for (int row = 0; row < d_; ++row) der.at(m, row) = ik * f.at(m, row);
      }
      GridField dp = spectral::synthesize(der);
      for (std::size_t p = 0; p < dp.spec.points(); ++p)
        for (int row = 0; row < d_; ++row) gp.at(p, row * d_ + col) = dp.at(p, row);
    }
    grad_.push_back(std::move(gp));
    gradsup_.push_back(spectral::grad_sup_norm(f));
    (void)gf;
  }
}

namespace {
// locate t in the snapshot grid: returns (i, frac) with t in [t_i, t_{i+1}]
std::pair<std::size_t, double> locate(const std::vector<double>& times, double t) {
  if (t <= times.front()) return {0, 0.0};
  if (t >= times.back()) return {times.size() - 2, 1.0};
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = it - times.begin();
  std::size_t lo = hi - 1;
  return {lo, (t - times[lo]) / (times[hi] - times[lo])};
}
}  // namespace

Vec VelocityHistory::eval_u(double t, const Vec& x) const {
  if (t > times_.back()) return drift_;
  Vec xm = wrapv(x, d_);
  if (times_.size() == 1) return kinetic::interpolate(u_[0], xm);
  auto [i, frac] = locate(times_, t);
  Vec a = kinetic::interpolate(u_[i], xm);
  Vec b = kinetic::interpolate(u_[i + 1], xm);
  Vec out = vec_zero();
  for (int c = 0; c < d_; ++c) out[c] = (1.0 - frac) * a[c] + frac * b[c];
  return out;
}

void VelocityHistory::eval_grad(double t, const Vec& x, double G[3][3]) const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G[i][j] = 0.0;
  if (t > times_.back()) return;
  Vec xm = wrapv(x, d_);
  double buf_a[9], buf_b[9];
  if (times_.size() == 1) {
    kinetic::interpolate_all(grad_[0], xm, buf_a);
    for (int r = 0; r < d_; ++r)
      for (int c = 0; c < d_; ++c) G[r][c] = buf_a[r * d_ + c];
    return;
  }
  auto [i, frac] = locate(times_, t);
  kinetic::interpolate_all(grad_[i], xm, buf_a);
  kinetic::interpolate_all(grad_[i + 1], xm, buf_b);
  for (int r = 0; r < d_; ++r)
    for (int c = 0; c < d_; ++c)
      G[r][c] = (1.0 - frac) * buf_a[r * d_ + c] + frac * buf_b[r * d_ + c];
}

double VelocityHistory::gradsup(double t) const {
  if (t > times_.back()) return 0.0;
  if (times_.size() == 1) return gradsup_[0];
  auto [i, frac] = locate(times_, t);
  return (1.0 - frac) * gradsup_[i] + frac * gradsup_[i + 1];
}

double VelocityHistory::grad_integral() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i)
    acc += 0.5 * (gradsup_[i] + gradsup_[i - 1]) * (times_[i] - times_[i - 1]);
  return acc;
}

double linear_solution(const kinetic::F0Eval& f0, double t, const Vec& x, const Vec& v,
                       const Vec& U) {
  const int d = f0.spec().d;
  const double et = std::exp(t);
  Vec x0 = vec_zero(), v0 = vec_zero();
  for (int a = 0; a < d; ++a) {
    v0[a] = U[a] + et * (v[a] - U[a]);
    x0[a] = wrap01(x[a] - t * U[a] - (et - 1.0) * (v[a] - U[a]));
  }
  return std::exp(d * t) * f0(x0, v0);
}

double linear_solution(const InitialDataSpec& f0, double t, const Vec& x, const Vec& v,
                       const Vec& U) {
  return linear_solution(kinetic::F0Eval(f0), t, x, v, U);
}

GridField linear_asymptotic_profile(const InitialDataSpec& f0, const Vec& U,
                                    const GridSpec& grid, int v_bins) {
  kinetic::F0Eval f(f0);
  const int d = grid.d, n = grid.n;
  const double vm = f.v_max();
  const double dv = 2.0 * vm / v_bins;
  GridField out(grid, 1);
  std::size_t nv_tot = 1;
  for (int a = 0; a < d; ++a) nv_tot *= v_bins;
  for (std::size_t p = 0; p < grid.points(); ++p) {
    std::size_t rem = p;
    int idx[3] = {0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    Vec y = vec_zero();
    for (int a = 0; a < d; ++a) y[a] = double(idx[a]) / n;
    KahanSum acc;
    for (std::size_t iv = 0; iv < nv_tot; ++iv) {
      std::size_t rr = iv;
      Vec w = vec_zero();
      for (int a = d - 1; a >= 0; --a) {
        int b = static_cast<int>(rr % v_bins);
        rr /= v_bins;
        w[a] = f0.center[a] - vm + (b + 0.5) * dv;
      }
      double fw = f.velocity(w);
      if (fw <= 0.0) continue;
      Vec pos = vec_zero();
      for (int a = 0; a < d; ++a) pos[a] = wrap01(y[a] + U[a] - w[a]);
      acc.add(f.space(pos) * fw);
    }
    out.at(p, 0) = acc.value() * std::pow(dv, d);
  }
  return out;
}

namespace {

// one backward exponential substep (from time s to s - h) of the
// characteristic ODE, field frozen at the midpoint
inline void backward_substep(const VelocityHistory& hist, double s, double h, Vec& x,
                             Vec& v, int d) {
  const double em = std::exp(0.5 * h) - 1.0;
  Vec xm = vec_zero();
  for (int a = 0; a < d; ++a) xm[a] = wrap01(x[a] - em * v[a]);
  Vec ustar = hist.eval_u(s - 0.5 * h, xm);
  kinetic::exp_step_inverse(x, v, ustar, h, d);
}

void integrate_backward(const VelocityHistory& hist, double t, Vec& x, Vec& v, int d,
                        int substeps_per_unit) {
  const int m = std::max(1, static_cast<int>(std::ceil(t * substeps_per_unit)));
  const double h = t / m;
  double s = t;
  for (int k = 0; k < m; ++k) {
    backward_substep(hist, s, h, x, v, d);
    s -= h;
  }
}

}  // namespace

StraighteningResult straightening_map(const VelocityHistory& h, double t, const Vec& x,
                                      const Vec& v, const StraighteningOptions& opts) {
  if (t < h.t_first() - 1e-12 || t > h.t_last() + 1e-9)
    throw NumericalError("straightening_map: history does not cover [0, t]");
  const int d = h.dim();
  StraighteningResult out;

  if (opts.method == JacobianMethod::FiniteDifference) {
    Vec xc = x, vc = v;
    integrate_backward(h, t, xc, vc, d, opts.substeps_per_unit);
    out.V0 = vc;
    double J[3][3] = {{0}};
    for (int col = 0; col < d; ++col) {
      Vec xp = x, vp = v, xm = x, vm = v;
      vp[col] += opts.fd_h;
      vm[col] -= opts.fd_h;
      integrate_backward(h, t, xp, vp, d, opts.substeps_per_unit);
      integrate_backward(h, t, xm, vm, d, opts.substeps_per_unit);
      for (int row = 0; row < d; ++row)
        J[row][col] = (vp[row] - vm[row]) / (2.0 * opts.fd_h);
    }
    out.detJac = det_d(J, d);
    return out;
  }

  // variational route: propagate P = D_v X, Q = D_v V through the substeps
  Vec xc = x, vc = v;
  double P[3][3] = {{0}}, Q[3][3] = {{0}};
  for (int i = 0; i < d; ++i) Q[i][i] = 1.0;
  const int m = std::max(1, static_cast<int>(std::ceil(t * opts.substeps_per_unit)));
  const double hh = t / m;
  const double eh = std::exp(hh);
  const double a = 1.0 - std::exp(-hh);
  const double b = hh - a;
  const double em = std::exp(0.5 * hh) - 1.0;
  double s = t;
  for (int k = 0; k < m; ++k) {
    Vec xm = vec_zero();
    for (int i = 0; i < d; ++i) xm[i] = wrap01(xc[i] - em * vc[i]);
    double G[3][3];
    h.eval_grad(s - 0.5 * hh, xm, G);
    Vec ustar = h.eval_u(s - 0.5 * hh, xm);
    // DU = G (P - em Q)
    double DU[3][3] = {{0}}, Qn[3][3] = {{0}}, Pn[3][3] = {{0}};
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) acc += G[i][l] * (P[l][j] - em * Q[l][j]);
        DU[i][j] = acc;
      }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Qn[i][j] = (1.0 - eh) * DU[i][j] + eh * Q[i][j];
        Pn[i][j] = P[i][j] - a * Qn[i][j] - b * DU[i][j];
      }
    std::copy(&Qn[0][0], &Qn[0][0] + 9, &Q[0][0]);
    std::copy(&Pn[0][0], &Pn[0][0] + 9, &P[0][0]);
    kinetic::exp_step_inverse(xc, vc, ustar, hh, d);
    s -= hh;
  }
  out.V0 = vc;
  out.detJac = det_d(Q, d);
  return out;
}

namespace {

struct PicardGrid {
  std::vector<double> tau;
  double dt = 0.0;
};

PicardGrid make_grid(const VelocityHistory& h, const PicardOptions& opts) {
  PicardGrid g;
  const double T = h.t_last();
  const double t0 = std::min(0.0, h.t_first());
  const int m = std::max(2, static_cast<int>(std::ceil((T - t0) / opts.tau_step)) + 1);
  g.tau.resize(m);
  g.dt = (T - t0) / (m - 1);
  for (int i = 0; i < m; ++i) g.tau[i] = t0 + i * g.dt;
  return g;
}

// one Picard sweep: given Y on the tau grid, evaluate the fixed-point RHS
// using prefix/suffix trapezoids of the separable kernel
void sweep_rhs(const VelocityHistory& h, const Vec& x, const Vec& v,
               const PicardGrid& g, const std::vector<Vec>& Y, std::vector<Vec>& out) {
  const int d = h.dim();
  const auto& drift = h.drift();
  const std::size_t M = g.tau.size();
  static thread_local std::vector<Vec> integrand, prefix, suffix;
  integrand.assign(M, vec_zero());
  prefix.assign(M, vec_zero());
  suffix.assign(M, vec_zero());
  for (std::size_t i = 0; i < M; ++i) {
    Vec ui = h.eval_u(g.tau[i], Y[i]);
    for (int a = 0; a < d; ++a) integrand[i][a] = ui[a] - drift[a];
  }
  // prefix[i] = int_0^{tau_i} e^tau g(tau) dtau (trapezoid)
  for (std::size_t i = 1; i < M; ++i) {
    double w0 = std::exp(g.tau[i - 1]), w1 = std::exp(g.tau[i]);
    for (int a = 0; a < d; ++a)
      prefix[i][a] = prefix[i - 1][a] +
                     0.5 * (w0 * integrand[i - 1][a] + w1 * integrand[i][a]) * g.dt;
  }
  // suffix[i] = int_{tau_i}^{T} g(tau) dtau
  for (std::size_t i = M - 1; i-- > 0;) {
    for (int a = 0; a < d; ++a)
      suffix[i][a] =
          suffix[i + 1][a] + 0.5 * (integrand[i][a] + integrand[i + 1][a]) * g.dt;
  }
  out.assign(M, vec_zero());
  for (std::size_t i = 0; i < M; ++i) {
    double es = std::exp(-g.tau[i]);
    for (int a = 0; a < d; ++a)
      out[i][a] = x[a] - es * v[a] + drift[a] * (es + g.tau[i]) -
                  (es * prefix[i][a] + suffix[i][a]);
  }
}

double sup_change(const std::vector<Vec>& a, const std::vector<Vec>& b, int d) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < d; ++c) m = std::max(m, std::abs(a[i][c] - b[i][c]));
  return m;
}

PicardPath picard_solve(const VelocityHistory& h, const Vec& x, const Vec& v,
                        const PicardOptions& opts, const std::vector<Vec>* warm) {
  const int d = h.dim();
  const double contraction = 2.0 * h.grad_integral();
  if (contraction >= 1.0)
    throw NumericalError("picard_Y_infinity: contraction check failed (2 int ||grad u|| = " +
                         std::to_string(contraction) + " >= 1)");
  PicardGrid g = make_grid(h, opts);
  const std::size_t M = g.tau.size();
  PicardPath path;
  path.tau = g.tau;
  path.Y.assign(M, vec_zero());
  if (warm && warm->size() == M) {
    path.Y = *warm;
  } else {
    const auto& drift = h.drift();
    for (std::size_t i = 0; i < M; ++i) {
      double es = std::exp(-g.tau[i]);
      for (int a = 0; a < d; ++a)
        path.Y[i][a] = x[a] - es * v[a] + drift[a] * (es + g.tau[i]);
    }
  }
  std::vector<Vec> next;
  for (int it = 0; it < opts.max_iters; ++it) {
    sweep_rhs(h, x, v, g, path.Y, next);
    double ch = sup_change(next, path.Y, d);
    path.Y.swap(next);
    path.iters = it + 1;
    if (ch < opts.tol) {
      sweep_rhs(h, x, v, g, path.Y, next);
      path.residual = sup_change(next, path.Y, d);
      return path;
    }
  }
  throw NumericalError("picard_Y_infinity: no convergence after " +
                       std::to_string(opts.max_iters) + " iterations");
}

}  // namespace

PicardPath picard_Y_infinity(const VelocityHistory& h, const Vec& x, const Vec& v,
                             const PicardOptions& opts) {
  return picard_solve(h, x, v, opts, nullptr);
}

namespace {

JacobianResult jacobian_from_center(const VelocityHistory& h, const Vec& x, const Vec& v,
                                    const PicardOptions& opts, JacobianMethod method,
                                    const PicardPath& center) {
  const int d = h.dim();
  const std::size_t M = center.tau.size();
  JacobianResult out;

  // D_v Y on the tau grid
  std::vector<std::array<double, 9>> DvY(M);
  if (method == JacobianMethod::FiniteDifference) {
    for (int col = 0; col < d; ++col) {
      Vec vp = v, vm = v;
      vp[col] += opts.fd_h;
      vm[col] -= opts.fd_h;
      PicardPath pp = picard_solve(h, x, vp, opts, &center.Y);
      PicardPath pm = picard_solve(h, x, vm, opts, &center.Y);
      for (std::size_t i = 0; i < M; ++i)
        for (int row = 0; row < d; ++row)
          DvY[i][row * d + col] = (pp.Y[i][row] - pm.Y[i][row]) / (2.0 * opts.fd_h);
    }
  } else {
    // variational linear fixed point:
    // DvY^s = -e^{-s} I - int K(tau,s) grad_u(tau,Y^tau) DvY^tau dtau
    for (std::size_t i = 0; i < M; ++i) {
      DvY[i].fill(0.0);
      double es = std::exp(-center.tau[i]);
      for (int a = 0; a < d; ++a) DvY[i][a * d + a] = -es;
    }
    std::vector<std::array<double, 9>> G(M), integ(M), pre(M), suf(M), next(M);
    for (std::size_t i = 0; i < M; ++i) {
      double gm[3][3];
      h.eval_grad(center.tau[i], center.Y[i], gm);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) G[i][r * d + c] = gm[r][c];
    }
    const double dt = center.tau[1] - center.tau[0];
    for (int it = 0; it < opts.max_iters; ++it) {
      for (std::size_t i = 0; i < M; ++i) {
        integ[i].fill(0.0);
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            for (int l = 0; l < d; ++l) acc += G[i][r * d + l] * DvY[i][l * d + c];
            integ[i][r * d + c] = acc;
          }
      }
      pre[0].fill(0.0);
      for (std::size_t i = 1; i < M; ++i) {
        double w0 = std::exp(center.tau[i - 1]), w1 = std::exp(center.tau[i]);
        for (int k = 0; k < d * d; ++k)
          pre[i][k] = pre[i - 1][k] + 0.5 * (w0 * integ[i - 1][k] + w1 * integ[i][k]) * dt;
      }
      suf[M - 1].fill(0.0);
      for (std::size_t i = M - 1; i-- > 0;)
        for (int k = 0; k < d * d; ++k)
          suf[i][k] = suf[i + 1][k] + 0.5 * (integ[i][k] + integ[i + 1][k]) * dt;
      double ch = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        double es = std::exp(-center.tau[i]);
        next[i].fill(0.0);
        for (int a = 0; a < d; ++a) next[i][a * d + a] = -es;
        for (int k = 0; k < d * d; ++k) {
          next[i][k] -= es * pre[i][k] + suf[i][k];
          ch = std::max(ch, std::abs(next[i][k] - DvY[i][k]));
        }
      }
      DvY.swap(next);
      if (ch < opts.tol) break;
      if (it + 1 == opts.max_iters)
        throw NumericalError("jacobian_A: variational sweep did not converge");
    }
  }

  // A = I + int e^tau grad_u(tau, Y^tau) DvY^tau dtau  (trapezoid)
  double acc[3][3] = {{0}};
  const double dt = center.tau[1] - center.tau[0];
  std::array<double, 9> prev_term{};
  for (std::size_t i = 0; i < M; ++i) {
    double gm[3][3];
    h.eval_grad(center.tau[i], center.Y[i], gm);
    std::array<double, 9> term{};
    double w = std::exp(center.tau[i]);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += gm[r][l] * DvY[i][l * d + c];
        term[r * d + c] = w * s;
      }
    if (i > 0)
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
          acc[r][c] += 0.5 * (prev_term[r * d + c] + term[r * d + c]) * dt;
    prev_term = term;
    // lem-Zt style certificate: |e^s D_v Y^s|
    double esm[3][3];
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) esm[r][c] = w * DvY[i][r * d + c];
    out.max_es_DvY = std::max(out.max_es_DvY, frobenius(esm, d));
  }
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out.A[r][c] = (r == c ? 1.0 : 0.0) + acc[r][c];
  out.detA = det_d(out.A, d);
  return out;
}

}  // namespace

JacobianResult jacobian_A(const VelocityHistory& h, const Vec& x, const Vec& v,
                          const PicardOptions& opts, JacobianMethod method) {
  PicardPath center = picard_solve(h, x, v, opts, nullptr);
  return jacobian_from_center(h, x, v, opts, method, center);
}

XJacobianResult x_jacobian(const VelocityHistory& h, const Vec& x, const Vec& v,
                           const PicardOptions& opts) {
  const int d = h.dim();
  PicardPath center = picard_solve(h, x, v, opts, nullptr);
  const std::size_t M = center.tau.size();
  XJacobianResult out;
  std::vector<std::array<double, 9>> DxY(M);
  for (auto& m : DxY) m.fill(0.0);
  for (int col = 0; col < d; ++col) {
    Vec xp = x, xm = x;
    xp[col] += opts.fd_h;
    xm[col] -= opts.fd_h;
    PicardPath pp = picard_solve(h, xp, v, opts, &center.Y);
    PicardPath pm = picard_solve(h, xm, v, opts, &center.Y);
    for (std::size_t i = 0; i < M; ++i)
      for (int row = 0; row < d; ++row)
        DxY[i][row * d + col] = (pp.Y[i][row] - pm.Y[i][row]) / (2.0 * opts.fd_h);
  }
  for (std::size_t i = 0; i < M; ++i) {
    double m[3][3] = {{0}};
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m[r][c] = DxY[i][r * d + c];
    out.max_DxY = std::max(out.max_DxY, frobenius(m, d));
  }
  double m0[3][3] = {{0}}, dev[3][3] = {{0}};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      m0[r][c] = DxY[0][r * d + c];
      dev[r][c] = m0[r][c] - (r == c ? 1.0 : 0.0);
    }
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out.DxY0[r][c] = m0[r][c];
  out.det_DxY0 = det_d(m0, d);
  out.dev_from_id = frobenius(dev, d);
  return out;
}

ProfileResult rho_infinity(const VelocityHistory& h, const InitialDataSpec& f0spec,
                           const GridSpec& grid, const ProfileOptions& opts) {
  const int d = grid.d;
  kinetic::F0Eval f0(f0spec);
  const double vm = f0.v_max();
  const int nv = opts.v_bins;
  const double dv = 2.0 * vm / nv;
  std::size_t nv_tot = 1;
  for (int a = 0; a < d; ++a) nv_tot *= nv;

  ProfileResult res;
  res.rho_inf = GridField(grid, 1);
  res.min_detA = 1e300;
  res.max_detA = -1e300;
  res.min_det_DxLambda = 1e300;

  const std::size_t npts = grid.points();
  const std::size_t nblocks = (npts + 7) / 8;
  struct BlockCert {
    int iters = 0;
    double residual = 0.0;
    double min_detA = 1e300, max_detA = -1e300;
    double max_es_DvY = 0.0, max_DxY = 0.0, max_dev = 0.0;
    double min_det_dxl = 1e300;
    std::size_t samples = 0, certified = 0;
  };
  std::vector<BlockCert> certs(nblocks);

  parallel_blocks(npts, 8, opts.threads, [&](std::size_t bi, std::size_t b, std::size_t e) {
    BlockCert& bc = certs[bi];
    for (std::size_t p = b; p < e; ++p) {
      std::size_t rem = p;
      int idx[3] = {0, 0, 0};
      for (int a = d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % grid.n);
        rem /= grid.n;
      }
      Vec xp = vec_zero();
      for (int a = 0; a < d; ++a) xp[a] = double(idx[a]) / grid.n;
      KahanSum acc;
      for (std::size_t iv = 0; iv < nv_tot; ++iv) {
        std::size_t rr = iv;
        Vec vp = vec_zero();
        for (int a = d - 1; a >= 0; --a) {
          int bb = static_cast<int>(rr % nv);
          rr /= nv;
          vp[a] = f0spec.center[a] - vm + (bb + 0.5) * dv;
        }
        double phi = f0.velocity(vp);
        if (phi <= 0.0) continue;
        PicardPath path = picard_solve(h, xp, vp, opts.picard, nullptr);
        auto jac = jacobian_from_center(h, xp, vp, opts.picard,
                                        JacobianMethod::FiniteDifference, path);
        Vec y0 = wrapv(path.Y.front(), d);
        acc.add(f0.space(y0) * phi * std::abs(jac.detA));
        bc.iters = std::max(bc.iters, path.iters);
        bc.residual = std::max(bc.residual, path.residual);
        bc.min_detA = std::min(bc.min_detA, jac.detA);
        bc.max_detA = std::max(bc.max_detA, jac.detA);
        bc.max_es_DvY = std::max(bc.max_es_DvY, jac.max_es_DvY);
        bc.samples += 1;
        if (opts.certify_stride > 0 &&
            bc.samples % static_cast<std::size_t>(opts.certify_stride) == 0) {
          auto xj = x_jacobian(h, xp, vp, opts.picard);
          bc.max_DxY = std::max(bc.max_DxY, xj.max_DxY);
          bc.max_dev = std::max(bc.max_dev, xj.dev_from_id);
          bc.min_det_dxl = std::min(bc.min_det_dxl, xj.det_DxY0);
          bc.certified += 1;
        }
      }
      res.rho_inf.values[p] = acc.value() * std::pow(dv, d);
    }
  });

  for (const auto& bc : certs) {
    res.picard_iters = std::max(res.picard_iters, bc.iters);
    res.residual = std::max(res.residual, bc.residual);
    res.min_detA = std::min(res.min_detA, bc.min_detA);
    res.max_detA = std::max(res.max_detA, bc.max_detA);
    res.max_es_DvY = std::max(res.max_es_DvY, bc.max_es_DvY);
    res.max_DxY = std::max(res.max_DxY, bc.max_DxY);
    res.max_DxLambda_dev = std::max(res.max_DxLambda_dev, bc.max_dev);
    res.min_det_DxLambda = std::min(res.min_det_DxLambda, bc.min_det_dxl);
    res.samples += bc.samples;
    res.certified += bc.certified;
  }
  KahanSum mass;
  for (double v : res.rho_inf.values) mass.add(v);
  res.mass = mass.value() * grid.cell_volume();
  return res;
}

double compute_Iq(double q, int d) {
  if (q <= d + 1)
    throw ConfigError("I_q diverges for q <= d + 1");
  // split at r = 1; far part mapped to (0,1] by r = 1/s and softened with
  // s = z^4 so the endpoint power stays integrable for all q > d + 1
  auto near = [&](double r) {
    return std::pow(r, d - 1) * (1.0 + r) / (1.0 + std::pow(r, q));
  };
  // far part via r = 1/s: integrand s^{q-d-2} (1+s) / (1+s^q) on (0,1];
  // softened with s = z^4: 4 z^{4(q-d-2)+3} (1+z^4) / (1+z^{4q})
  auto far2 = [&](double z) {
    if (z <= 0.0) return 0.0;
    return 4.0 * std::pow(z, 4.0 * (q - d - 2.0) + 3.0) * (1.0 + std::pow(z, 4.0)) /
           (1.0 + std::pow(z, 4.0 * q));
  };
  // adaptive Simpson
  std::function<double(const std::function<double(double)>&, double, double, double,
                       double, double, double, double, int)>
      rec = [&](const std::function<double(double)>& fn, double a, double b, double fa,
                double fm, double fb, double whole, double tol, int depth) -> double {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = fn(lm), frm = fn(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           rec(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  };
  auto integrate = [&](const std::function<double(double)>& fn, double a, double b) {
    double m = 0.5 * (a + b);
    double fa = fn(a), fm = fn(m), fb = fn(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(fn, a, b, fa, fm, fb, whole, 1e-13, 0);
  };
  double sphere = (d == 2) ? kTwoPi : 2.0 * kTwoPi;
  return sphere * (integrate(near, 0.0, 1.0) + integrate(far2, 0.0, 1.0));
}

MomentBoundReport moment_bound_check(const std::vector<double>& t,
                                     const std::vector<double>& rho_sup,
                                     const std::vector<double>& j_sup,
                                     const std::vector<double>& u_sup, double Nq, double q,
                                     int d, double smoothing_tol) {
  MomentBoundReport rep;
  rep.Iq = compute_Iq(q, d);
  rep.Nq = Nq;
  rep.worst_rho_margin = 1e300;
  rep.worst_j_margin = 1e300;
  double rho_bound = 2.0 * rep.Iq * Nq;
  // int_0^t e^s ||u(s)||_inf ds by running trapezoid
  double expint = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0)
      expint += 0.5 *
                (std::exp(t[i - 1]) * u_sup[i - 1] + std::exp(t[i]) * u_sup[i]) *
                (t[i] - t[i - 1]);
    double margin_rho = rho_bound + smoothing_tol - rho_sup[i];
    double j_bound = 2.0 * rep.Iq * std::exp(-t[i]) * (expint + 1.0) * Nq;
    double margin_j = j_bound + smoothing_tol - j_sup[i];
    rep.worst_rho_margin = std::min(rep.worst_rho_margin, margin_rho);
    rep.worst_j_margin = std::min(rep.worst_j_margin, margin_j);
  }
  rep.rho_ok = rep.worst_rho_margin >= 0.0;
  rep.j_ok = rep.worst_j_margin >= 0.0;
  return rep;
}

}  // namespace vnslab::asymptotic
