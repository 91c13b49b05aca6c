#include "vnslab/particles.hpp"

#include <algorithm>
#include <cmath>

namespace vnslab::kinetic {

bool ParticleEnsemble::finite() const {
  for (double a : x)
    if (!std::isfinite(a)) return false;
  for (double a : v)
    if (!std::isfinite(a)) return false;
  return true;
}

namespace {

struct CicStencil {
  int base[3];
  double frac[3];
};

inline CicStencil stencil(const Vec& pos, int n, int d) {
  CicStencil s{};
  for (int a = 0; a < d; ++a) {
    double sc = wrap01(pos[a]) * n;
    double fl = std::floor(sc);
    int i0 = static_cast<int>(fl);
    if (i0 >= n) i0 = n - 1;  // sc == n after rounding
    s.base[a] = i0;
    s.frac[a] = sc - i0;
  }
  return s;
}

template <typename Fn>
inline void for_corners(const CicStencil& st, int n, int d, Fn&& fn) {
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double wgt = 1.0;
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) {
      int off = (c >> a) & 1;
      int bin = st.base[a] + off;
      if (bin == n) bin = 0;
      wgt *= off ? st.frac[a] : (1.0 - st.frac[a]);
      idx = idx * n + bin;
    }
    fn(idx, wgt);
  }
}

}  // namespace

Vec GridVelocityField::eval(const Vec& x) const { return interpolate(g_, x); }

Vec interpolate(const GridField& g, const Vec& pos) {
  const int n = g.spec.n, d = g.spec.d;
  CicStencil st = stencil(pos, n, d);
  Vec out = vec_zero();
  for_corners(st, n, d, [&](std::size_t idx, double wgt) {
    for (int c = 0; c < g.comps && c < 3; ++c) out[c] += wgt * g.at(idx, c);
  });
  return out;
}

void interpolate_all(const GridField& g, const Vec& pos, double* out) {
  const int n = g.spec.n, d = g.spec.d;
  for (int c = 0; c < g.comps; ++c) out[c] = 0.0;
  CicStencil st = stencil(pos, n, d);
  for_corners(st, n, d, [&](std::size_t idx, double wgt) {
    for (int c = 0; c < g.comps; ++c) out[c] += wgt * g.at(idx, c);
  });
}

void exp_step(Vec& x, Vec& v, const Vec& ustar, double dt, int d) {
  const double decay = std::exp(-dt);
  const double drift = 1.0 - decay;       // integral of e^{-s}
  const double dpush = dt - drift;        // integral of 1 - e^{-s}
  for (int a = 0; a < d; ++a) {
    double xv = x[a] + drift * v[a] + dpush * ustar[a];
    v[a] = ustar[a] + decay * (v[a] - ustar[a]);
    x[a] = xv;
  }
}

void exp_step_inverse(Vec& x, Vec& v, const Vec& ustar, double dt, int d) {
  const double decay = std::exp(-dt);
  const double drift = 1.0 - decay;
  const double dpush = dt - drift;
  for (int a = 0; a < d; ++a) {
    double vold = ustar[a] + (v[a] - ustar[a]) / decay;
    x[a] = x[a] - drift * vold - dpush * ustar[a];
    v[a] = vold;
  }
}

ParticleEnsemble push(const ParticleEnsemble& p, const VelocityField& u_eval, double dt,
                      int threads) {
  if (dt <= 0.0) throw NumericalError("push requires dt > 0");
  ParticleEnsemble out = p;
  const int d = p.d;
  const double half_drift = 1.0 - std::exp(-0.5 * dt);
  const std::size_t n = p.size();
  parallel_blocks(n, 4096, threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Vec xi = p.pos(i), vi = p.vel(i);
      Vec xm = xi;
      for (int a = 0; a < d; ++a) xm[a] = wrap01(xi[a] + half_drift * vi[a]);
      Vec ustar = u_eval.eval(xm);
      exp_step(xi, vi, ustar, dt, d);
      for (int a = 0; a < d; ++a) {
        out.x[i * d + a] = wrap01(xi[a]);
        out.v[i * d + a] = vi[a];
      }
    }
  });
  if (!out.finite())
    throw NumericalError("particle state became nonfinite (field blow-up)");
  return out;
}

Moments deposit(const ParticleEnsemble& p, const GridSpec& grid, int threads) {
  const int n = grid.n, d = grid.d;
  const double invvol = static_cast<double>(grid.points());
  const std::size_t cells = grid.points();
  const std::size_t N = p.size();
  const std::size_t block = 8192;
  const std::size_t nblocks = (N + block - 1) / block;

  std::vector<std::vector<double>> rho_buf(nblocks), j_buf(nblocks);
  parallel_blocks(N, block, threads, [&](std::size_t bi, std::size_t b, std::size_t e) {
    auto& rb = rho_buf[bi];
    auto& jb = j_buf[bi];
    rb.assign(cells, 0.0);
    jb.assign(cells * d, 0.0);
    for (std::size_t i = b; i < e; ++i) {
      Vec xi = p.pos(i), vi = p.vel(i);
      double wi = p.w[i];
      CicStencil st = stencil(xi, n, d);
      for_corners(st, n, d, [&](std::size_t idx, double wgt) {
        double m = wi * wgt * invvol;
        rb[idx] += m;
        for (int a = 0; a < d; ++a) jb[idx * d + a] += m * vi[a];
      });
    }
  });

  Moments out{GridField(grid, 1), GridField(grid, d)};
  for (std::size_t bi = 0; bi < nblocks; ++bi) {
    for (std::size_t c = 0; c < cells; ++c) out.rho.values[c] += rho_buf[bi][c];
    for (std::size_t c = 0; c < cells * d; ++c) out.j.values[c] += j_buf[bi][c];
  }
  return out;
}

double moment(const ParticleEnsemble& p, double alpha) {
  if (alpha < 0.0) throw NumericalError("moment order must be nonnegative");
  KahanSum s;
  const int d = p.d;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double v2 = 0.0;
    for (int a = 0; a < d; ++a) v2 += p.v[i * d + a] * p.v[i * d + a];
    double term;
    if (alpha == 0.0)
      term = p.w[i];
    else if (alpha == 2.0)
      term = p.w[i] * v2;
    else
      term = p.w[i] * std::pow(v2, 0.5 * alpha);
    s.add(term);
  }
  return s.value();
}

// --- initial data --------------------------------------------------------

namespace {

double radial_profile(const InitialDataSpec& s, double r) {
  switch (s.velocity) {
    case VelocityFamily::Gauss:
      return std::exp(-0.5 * r * r / (s.sigma * s.sigma));
    case VelocityFamily::PolyTail:
      return 1.0 / (1.0 + std::pow(r, s.q));
    case VelocityFamily::Bump: {
      double t = 1.0 - r * r / (s.sigma * s.sigma);
      return (t > 0.0) ? t * t : 0.0;
    }
    case VelocityFamily::Ring: {
      if (r > s.sigma) return 0.0;
      double t = r / s.sigma;
      return t * t;
    }
  }
  return 0.0;
}

bool compact_support(const InitialDataSpec& s) {
  return s.velocity == VelocityFamily::Bump || s.velocity == VelocityFamily::Ring;
}

// surface of the unit sphere in d dims (d = 2: 2 pi, d = 3: 4 pi)
double sphere_area(int d) { return (d == 2) ? kTwoPi : 2.0 * kTwoPi; }

// adaptive Simpson on [a,b]
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth > 28 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0);
}

// mass of the radial profile over r in [a,b] (times the angular factor);
// integrated over uniform panels so narrow profiles cannot slip between the
// probe points of the adaptive rule
double radial_mass(const InitialDataSpec& s, double a, double b) {
  int d = s.d;
  auto f = [&](double r) { return std::pow(r, d - 1) * radial_profile(s, r); };
  const int panels = 64;
  double h = (b - a) / panels;
  KahanSum acc;
  for (int p = 0; p < panels; ++p)
    acc.add(integrate(f, a + p * h, a + (p + 1) * h, 1e-13));
  return sphere_area(d) * acc.value();
}

}  // namespace

double tail_mass(const InitialDataSpec& s, double v_max) {
  if (compact_support(s) && v_max >= s.sigma) return 0.0;
  double far = std::max(v_max * 16.0, v_max + 20.0 * std::max(s.sigma, 1.0));
  double total = radial_mass(s, 0.0, far);
  double tail = radial_mass(s, v_max, far);
  return tail / total;
}

double resolve_v_max(const InitialDataSpec& s) {
  if (s.v_max > 0.0) return s.v_max;
  if (compact_support(s)) return s.sigma;
  // smallest radius whose discarded tail mass is below tail_target
  double hi = (s.velocity == VelocityFamily::Gauss) ? 10.0 * s.sigma : 10.0;
  int guard = 0;
  while (tail_mass(s, hi) > s.tail_target && guard++ < 64) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (tail_mass(s, mid) > s.tail_target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-3 * hi) break;
  }
  return hi;
}

F0Eval::F0Eval(const InitialDataSpec& s) : spec_(s) {
  v_max_ = resolve_v_max(s);
  inv_norm_ = 1.0 / radial_mass(s, 0.0, v_max_);
}

double F0Eval::velocity(const Vec& v) const {
  double r2 = 0.0;
  for (int a = 0; a < spec_.d; ++a) {
    double dv = v[a] - spec_.center[a];
    r2 += dv * dv;
  }
  double r = std::sqrt(r2);
  if (r > v_max_) return 0.0;
  return radial_profile(spec_, r) * inv_norm_;
}

double F0Eval::space(const Vec& x) const { return f0_space_profile(spec_, x); }

double f0_space_profile(const InitialDataSpec& s, const Vec& x) {
  switch (s.space) {
    case SpaceFamily::Uniform:
      return 1.0;
    case SpaceFamily::Cosine:
      return 1.0 + s.space_amp * std::cos(kTwoPi * x[0]);
    case SpaceFamily::Cosine2:
      return 1.0 + s.space_amp * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  }
  return 1.0;
}

double f0_eval(const InitialDataSpec& s, const Vec& x, const Vec& v) {
  return F0Eval(s)(x, v);
}

double estimate_Nq(const InitialDataSpec& s, double q) {
  if (q <= 0.0) throw ConfigError("estimate_Nq requires q > 0");
  double vm = resolve_v_max(s);
  double norm = radial_mass(s, 0.0, vm);
  double space_max = 1.0 + std::abs(s.space_amp);
  if (s.space == SpaceFamily::Uniform) space_max = 1.0;

  double cnorm = std::sqrt(dot(s.center, s.center, s.d));
  if (s.velocity == VelocityFamily::PolyTail && cnorm == 0.0 && q == s.q) {
    // (1+|v|^q) * c/(1+|v|^q) = c everywhere on the support
    return space_max / norm;
  }

  // 1-d search along the ray through the center (the radial maximizer);
  // for center 0 this is a plain radial sweep.
  auto val = [&](double t) {
    // position v = center + t * dir, dir unit vector along the center (or e1)
    double vabs, r;
    if (cnorm == 0.0) {
      vabs = std::abs(t);
      r = std::abs(t);
    } else {
      vabs = std::abs(cnorm + t);
      r = std::abs(t);
    }
    if (r > vm) return 0.0;
    return (1.0 + std::pow(vabs, q)) * radial_profile(s, r) / norm;
  };
  double lo = -vm, hi = vm;
  double best = 0.0, bestt = 0.0;
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    double t = lo + (hi - lo) * i / samples;
    double f = val(t);
    if (f > best) {
      best = f;
      bestt = t;
    }
  }
  // local refinement by ternary search around the best sample
  double a = std::max(lo, bestt - (hi - lo) / samples);
  double b = std::min(hi, bestt + (hi - lo) / samples);
  for (int it = 0; it < 200; ++it) {
    double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (val(m1) < val(m2))
      a = m1;
    else
      b = m2;
  }
  best = std::max(best, val(0.5 * (a + b)));
  return space_max * best;
}

ParticleEnsemble build_particles(const InitialDataSpec& s, const GridSpec& grid) {
  if (s.d != grid.d) throw ConfigError("initial data dimension does not match the grid");
  ParticleEnsemble p;
  p.d = s.d;
  p.q = s.q;
  p.seed = s.seed;
  p.v_max = resolve_v_max(s);

  F0Eval f0(s);
  const int nx = grid.n * std::max(1, s.x_per_cell);
  const int nv = std::max(2, s.v_bins);
  const double dv = 2.0 * p.v_max / nv;

  std::size_t nx_tot = 1, nv_tot = 1;
  for (int a = 0; a < s.d; ++a) {
    nx_tot *= nx;
    nv_tot *= nv;
  }

  std::vector<double> xs, vs, ws;
  KahanSum wsum;
  std::array<int, 3> xi = {0, 0, 0}, vi = {0, 0, 0};
  for (std::size_t ix = 0; ix < nx_tot; ++ix) {
    std::size_t r = ix;
    for (int a = s.d - 1; a >= 0; --a) {
      xi[a] = static_cast<int>(r % nx);
      r /= nx;
    }
    Vec xp = vec_zero();
    for (int a = 0; a < s.d; ++a) xp[a] = double(xi[a]) / nx;
    double sx = f0_space_profile(s, xp);
    for (std::size_t iv = 0; iv < nv_tot; ++iv) {
      std::size_t rr = iv;
      for (int a = s.d - 1; a >= 0; --a) {
        vi[a] = static_cast<int>(rr % nv);
        rr /= nv;
      }
      Vec vp = vec_zero();
      for (int a = 0; a < s.d; ++a)
        vp[a] = s.center[a] - p.v_max + (vi[a] + 0.5) * dv;
      double f = sx * f0.velocity(vp);
      if (f <= 0.0) continue;
      double wgt = f;  // cell volumes are constant; normalization fixes scale
      for (int a = 0; a < s.d; ++a) xs.push_back(xp[a]);
      for (int a = 0; a < s.d; ++a) vs.push_back(vp[a]);
      ws.push_back(wgt);
      wsum.add(wgt);
    }
  }
  const double inv = 1.0 / wsum.value();
  for (auto& wv : ws) wv *= inv;
  p.x = std::move(xs);
  p.v = std::move(vs);
  p.w = std::move(ws);
  return p;
}

}  // namespace vnslab::kinetic
