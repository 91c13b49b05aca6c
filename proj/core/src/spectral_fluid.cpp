#include "vnslab/spectral_fluid.hpp"

#include <algorithm>

namespace vnslab::spectral {

FourierField leray_project(const FourierField& field) {
  FourierField out = field;
  const int d = field.dim();
  for (std::size_t m = 1; m < field.modes(); ++m) {
    auto k = field.freq(m);
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
    if (k2 == 0.0) continue;
    Complex kc(0.0, 0.0);
    for (int a = 0; a < d; ++a) kc += double(k[a]) * field.at(m, a);
    kc /= k2;
    for (int a = 0; a < d; ++a) out.at(m, a) -= double(k[a]) * kc;
  }
  out.set_div_free(true);
  return out;
}

double sobolev_norm(const FourierField& field, const SobolevSpec& spec) {
  KahanSum acc;
  for (std::size_t m = 0; m < field.modes(); ++m) {
    auto k = field.freq(m);
    double k2 = 0.0;
    for (int a = 0; a < field.dim(); ++a) k2 += double(k[a]) * k[a];
    double w;
    if (spec.homogeneous) {
      if (k2 == 0.0) continue;
      w = std::pow(kTwoPi * kTwoPi * k2, spec.s);
    } else {
      w = std::pow(1.0 + kTwoPi * kTwoPi * k2, spec.s);
    }
    double msq = 0.0;
    for (int c = 0; c < field.dim(); ++c) msq += std::norm(field.at(m, c));
    acc.add(w * msq);
  }
  return std::sqrt(acc.value());
}

FourierField heat_semigroup(const FourierField& field, double t) {
  FourierField out = field;
  if (t == 0.0) return out;
  for (std::size_t m = 0; m < field.modes(); ++m) {
    auto k = field.freq(m);
    double k2 = 0.0;
    for (int a = 0; a < field.dim(); ++a) k2 += double(k[a]) * k[a];
    double damp = std::exp(-kTwoPi * kTwoPi * k2 * t);
    for (int c = 0; c < field.dim(); ++c) out.at(m, c) *= damp;
  }
  return out;
}

namespace {

// Rotational-form advection contribution P[-(curl u) x u], dealiased.
// The gradient half of (u.grad)u is absorbed by the projection.
FourierField advection_term(const FourierField& u) {
  const GridSpec& spec = u.spec();
  const int d = spec.d;
  GridField uphys = synthesize(u);

  // vorticity: d=2 -> scalar, d=3 -> vector
  const int ncurl = (d == 2) ? 1 : 3;
  GridField curl_phys(spec, ncurl);
  for (int c = 0; c < ncurl; ++c) {
    FourierField comp(spec);
    for (std::size_t m = 0; m < u.modes(); ++m) {
      auto k = u.freq(m);
      Complex ik[3];
      for (int a = 0; a < d; ++a) ik[a] = Complex(0.0, kTwoPi * k[a]);
      Complex val(0.0, 0.0);
      if (d == 2) {
        val = ik[0] * u.at(m, 1) - ik[1] * u.at(m, 0);
      } else {
        int a = (c + 1) % 3, b = (c + 2) % 3;
        val = ik[a] * u.at(m, b) - ik[b] * u.at(m, a);
      }
      comp.at(m, 0) = val;
    }
    GridField gg = synthesize(comp);
    for (std::size_t p = 0; p < spec.points(); ++p) curl_phys.at(p, c) = gg.at(p, 0);
  }

  GridField wxu(spec, d);
  if (d == 2) {
    for (std::size_t p = 0; p < spec.points(); ++p) {
      double w = curl_phys.at(p, 0);
      wxu.at(p, 0) = -w * uphys.at(p, 1);
      wxu.at(p, 1) = w * uphys.at(p, 0);
    }
  } else {
    for (std::size_t p = 0; p < spec.points(); ++p) {
      double wx = curl_phys.at(p, 0), wy = curl_phys.at(p, 1), wz = curl_phys.at(p, 2);
      double ux = uphys.at(p, 0), uy = uphys.at(p, 1), uz = uphys.at(p, 2);
      wxu.at(p, 0) = wy * uz - wz * uy;
      wxu.at(p, 1) = wz * ux - wx * uz;
      wxu.at(p, 2) = wx * uy - wy * ux;
    }
  }
  FourierField adv = analyze(wxu);
  dealias(adv, spec.dealias_cutoff());
  adv *= -1.0;
  return leray_project(adv);
}

}  // namespace

FourierField ns_step(const FourierField& u, const FourierField& F, double dt,
                     const NsStepOptions& opts) {
  if (!u.div_free()) throw NumericalError("ns_step requires a divergence-free velocity");
  if (dt <= 0.0) throw NumericalError("ns_step requires dt > 0");
  if (opts.dt_max > 0.0 && dt > opts.dt_max)
    throw NumericalError("ns_step: dt exceeds the configured dt_max");

  auto explicit_rhs = [&](const FourierField& v) {
    FourierField rhs = advection_term(v);
    FourierField pf = leray_project(F);
    dealias(pf, u.spec().dealias_cutoff());
    rhs += pf;
    return rhs;
  };

  FourierField out(u.spec(), true);
  if (opts.scheme == TimeScheme::Lie) {
    FourierField stage = u;
    FourierField rhs = explicit_rhs(u);
    rhs *= dt;
    stage += rhs;
    out = heat_semigroup(stage, dt);
  } else {
    // Strang: half advection step (midpoint), exact heat, half advection
    auto half_advect = [&](const FourierField& v) {
      FourierField mid = v;
      FourierField g1 = explicit_rhs(v);
      g1 *= 0.25 * dt;
      mid += g1;
      FourierField g2 = explicit_rhs(mid);
      g2 *= 0.5 * dt;
      FourierField outv = v;
      outv += g2;
      return outv;
    };
    FourierField stage = half_advect(u);
    stage = heat_semigroup(stage, dt);
    out = half_advect(stage);
  }
  out.set_div_free(true);
  if (!out.finite())
    throw NumericalError("ns_step produced nonfinite coefficients (blow-up or dt too large)");
  return out;
}

double grad_sup_norm(const FourierField& u) {
  const GridSpec& spec = u.spec();
  const int d = spec.d;
  double best = 0.0;
  // synthesize each derivative component on a 2x refined grid
  std::vector<GridField> der;
  der.reserve(d);
  for (int a = 0; a < d; ++a) {
    FourierField da(spec);
    for (std::size_t m = 0; m < u.modes(); ++m) {
      auto k = u.freq(m);
      Complex ik(0.0, kTwoPi * k[a]);
      for (int c = 0; c < d; ++c) da.at(m, c) = ik * u.at(m, c);
    }
    der.push_back(synthesize_refined(da, 2));
  }
  const std::size_t pts = der[0].spec.points();
  for (std::size_t p = 0; p < pts; ++p) {
    double fro = 0.0;
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) fro += der[a].at(p, c) * der[a].at(p, c);
    best = std::max(best, fro);
  }
  return std::sqrt(best);
}

double sup_norm(const FourierField& u) {
  GridField g = synthesize_refined(u, 2);
  double best = 0.0;
  for (std::size_t p = 0; p < g.spec.points(); ++p) {
    double m = 0.0;
    for (int c = 0; c < u.dim(); ++c) m += g.at(p, c) * g.at(p, c);
    best = std::max(best, m);
  }
  return std::sqrt(best);
}

double grad_l2_sq(const FourierField& u) {
  KahanSum acc;
  for (std::size_t m = 0; m < u.modes(); ++m) {
    auto k = u.freq(m);
    double k2 = 0.0;
    for (int a = 0; a < u.dim(); ++a) k2 += double(k[a]) * k[a];
    double msq = 0.0;
    for (int c = 0; c < u.dim(); ++c) msq += std::norm(u.at(m, c));
    acc.add(kTwoPi * kTwoPi * k2 * msq);
  }
  return acc.value();
}

double suggested_dt_max(const FourierField& u) {
  double umax = sup_norm(u);
  double kcut = kTwoPi * std::max(1, u.spec().dealias_cutoff());
  if (umax < 1e-12) return 1e9;
  return 0.5 / (kcut * umax);
}

FourierField random_div_free_field(const GridSpec& spec, int kmax, double h12_target,
                                   std::uint64_t seed, const Vec& mean) {
  Rng rng(seed);
  kmax = std::min(kmax, spec.dealias_cutoff());
  FourierField f(spec);
  // assign physical random amplitudes mode by mode over a half-space to keep
  // Hermitian symmetry exact
  for (std::size_t m = 1; m < f.modes(); ++m) {
    auto k = f.freq(m);
    bool inband = true;
    for (int a = 0; a < spec.d; ++a)
      if (std::abs(k[a]) > kmax) inband = false;
    if (!inband) continue;
    // visit each conjugate pair once: pick the lexicographically positive rep
    bool is_rep = false;
    for (int a = 0; a < spec.d; ++a) {
      if (k[a] > 0) {
        is_rep = true;
        break;
      }
      if (k[a] < 0) break;
    }
    if (!is_rep) continue;
    auto idx = f.unravel(m);
    std::array<int, 3> cidx = {0, 0, 0};
    for (int a = 0; a < spec.d; ++a) cidx[a] = (spec.n - idx[a]) % spec.n;
    std::size_t mc = f.ravel(cidx);
    for (int c = 0; c < spec.d; ++c) {
      Complex z(rng.normal(), rng.normal());
      f.at(m, c) = z;
      f.at(mc, c) = std::conj(z);
    }
  }
  f = leray_project(f);
  double cur = sobolev_norm(f, SobolevSpec{0.5, true});
  if (cur > 0.0 && h12_target > 0.0)
    f *= (h12_target / cur);
  else if (h12_target == 0.0)
    f *= 0.0;
  f.set_mean(mean);
  f.set_div_free(true);
  return f;
}

FourierField taylor_green(const GridSpec& spec, double a) {
  // u = a (sin(2 pi x) cos(2 pi y), -cos(2 pi x) sin(2 pi y))
  GridField g(spec, spec.d);
  const int n = spec.n;
  for (std::size_t p = 0; p < spec.points(); ++p) {
    std::size_t mp = p;
    int iz = 0, iy, ix;
    if (spec.d == 3) {
      iz = static_cast<int>(mp % n);
      mp /= n;
    }
    iy = static_cast<int>(mp % n);
    mp /= n;
    ix = static_cast<int>(mp % n);
    (void)iz;
    double x = double(ix) / n, y = double(iy) / n;
    g.at(p, 0) = a * std::sin(kTwoPi * x) * std::cos(kTwoPi * y);
    g.at(p, 1) = -a * std::cos(kTwoPi * x) * std::sin(kTwoPi * y);
    if (spec.d == 3) g.at(p, 2) = 0.0;
  }
  FourierField f = analyze(g);
  f.set_div_free(true);
  return f;
}

}  // namespace vnslab::spectral
