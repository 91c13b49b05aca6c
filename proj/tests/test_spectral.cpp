#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vnslab/spectral_fluid.hpp"

using namespace vnslab;
using namespace vnslab::spectral;

namespace {

// random real field via random physical samples (exactly Hermitian)
FourierField random_field(const GridSpec& spec, std::uint64_t seed, int kmax = 0) {
  Rng rng(seed);
  GridField g(spec, spec.d);
  for (auto& v : g.values) v = rng.uniform(-1.0, 1.0);
  FourierField f = analyze(g);
  if (kmax > 0) dealias(f, kmax);
  return f;
}

double inner_l2(const FourierField& a, const FourierField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    s += (a.raw()[i] * std::conj(b.raw()[i])).real();
  return s;
}

FourierField single_sine_y(const GridSpec& spec, double amp = 1.0) {
  // u = (amp sin(2 pi x2), 0): divergence free, advection is a pure gradient
  GridField g(spec, spec.d);
  const int n = spec.n;
  for (std::size_t p = 0; p < spec.points(); ++p) {
    std::size_t rem = p;
    int idx[3] = {0, 0, 0};
    for (int a = spec.d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    g.at(p, 0) = amp * std::sin(kTwoPi * double(idx[1]) / n);
  }
  FourierField f = analyze(g);
  f.set_div_free(true);
  return f;
}

}  // namespace

TEST_CASE("transform round trip and Hermitian symmetry") {
  GridSpec spec(2, 16);
  FourierField f = random_field(spec, 7);
  CHECK(f.hermitian_defect() < 1e-13);
  GridField g = synthesize(f);
  FourierField f2 = analyze(g);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.raw().size(); ++i)
    worst = std::max(worst, std::abs(f.raw()[i] - f2.raw()[i]));
  CHECK(worst < 1e-13);
}

TEST_CASE("leray annihilates gradients") {
  GridSpec spec(2, 16);
  // field = grad(sin(2 pi x1)) = (2 pi cos(2 pi x1), 0)
  GridField g(spec, 2);
  for (std::size_t p = 0; p < spec.points(); ++p) {
    int i0 = static_cast<int>(p / spec.n);
    g.at(p, 0) = kTwoPi * std::cos(kTwoPi * double(i0) / spec.n);
  }
  FourierField f = analyze(g);
  FourierField proj = leray_project(f);
  CHECK(l2_norm(proj) < 1e-12);
}

TEST_CASE("leray idempotence and orthogonality on random fields") {
  GridSpec spec(2, 16);
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    FourierField f = random_field(spec, seed);
    FourierField p1 = leray_project(f);
    FourierField p2 = leray_project(p1);
    FourierField diff = p2;
    diff -= p1;
    CHECK(l2_norm(diff) <= 1e-13 * l2_norm(f));
    CHECK(p1.divergence_defect() < 1e-12);
    // <P f, f - P f> = 0
    FourierField resid = f;
    resid -= p1;
    double ip = inner_l2(p1, resid);
    CHECK(std::abs(ip) <= 1e-12 * l2_norm(f) * l2_norm(f));
  }
}

TEST_CASE("leray on a single mode: hand-evaluated projection") {
  // d=2, k=(1,0), c=(a,b) -> (0,b)
  GridSpec spec(2, 16);
  FourierField f(spec);
  const double a = 0.7, b = -0.3;
  std::size_t m_pos = f.ravel({1, 0, 0});
  std::size_t m_neg = f.ravel({spec.n - 1, 0, 0});
  f.at(m_pos, 0) = Complex(a, 0.0);
  f.at(m_pos, 1) = Complex(b, 0.0);
  f.at(m_neg, 0) = Complex(a, 0.0);
  f.at(m_neg, 1) = Complex(b, 0.0);
  FourierField p = leray_project(f);
  CHECK(std::abs(p.at(m_pos, 0)) < 1e-15);
  CHECK(std::abs(p.at(m_pos, 1) - Complex(b, 0.0)) < 1e-15);
}

TEST_CASE("sobolev norms") {
  GridSpec spec(2, 16);
  SUBCASE("homogeneous norm of a constant field is zero") {
    FourierField f(spec);
    f.set_mean({0.4, -0.2, 0.0});
    CHECK(sobolev_norm(f, {0.5, true}) == 0.0);
    CHECK(sobolev_norm(f, {1.0, true}) == 0.0);
  }
  SUBCASE("single sine: H1 dot norm is 2 pi times L2 norm") {
    FourierField u = single_sine_y(spec);
    double l2 = l2_norm(u);
    double h1 = sobolev_norm(u, {1.0, true});
    CHECK(h1 == doctest::Approx(kTwoPi * l2).epsilon(1e-12));
    CHECK(l2 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("two-mode field: direct Parseval oracle") {
    FourierField f(spec);
    auto put = [&](std::array<int, 3> k, double re0, double im0, double re1, double im1) {
      std::size_t m = f.ravel({(k[0] + spec.n) % spec.n, (k[1] + spec.n) % spec.n, 0});
      std::size_t mc = f.ravel({(-k[0] + spec.n) % spec.n, (-k[1] + spec.n) % spec.n, 0});
      f.at(m, 0) = Complex(re0, im0);
      f.at(m, 1) = Complex(re1, im1);
      f.at(mc, 0) = std::conj(f.at(m, 0));
      f.at(mc, 1) = std::conj(f.at(m, 1));
    };
    put({1, 2, 0}, 0.3, 0.1, -0.2, 0.05);
    put({3, -1, 0}, -0.1, 0.2, 0.4, -0.3);
    // oracle: walk the coefficient list explicitly
    double expected = 0.0;
    for (std::size_t m = 0; m < f.modes(); ++m) {
      auto k = f.freq(m);
      double k2 = double(k[0]) * k[0] + double(k[1]) * k[1];
      double w = std::sqrt(1.0 + kTwoPi * kTwoPi * k2);
      expected += w * (std::norm(f.at(m, 0)) + std::norm(f.at(m, 1)));
    }
    double got = sobolev_norm(f, {0.5, false});
    CHECK(got * got == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("heat semigroup") {
  GridSpec spec(2, 16);
  SUBCASE("t = 0 is the identity") {
    FourierField f = random_field(spec, 11);
    FourierField h = heat_semigroup(f, 0.0);
    for (std::size_t i = 0; i < f.raw().size(); ++i) CHECK(f.raw()[i] == h.raw()[i]);
  }
  SUBCASE("single mode |k| = 1 decays by e^{-(2 pi)^2 t}") {
    FourierField u = single_sine_y(spec);
    FourierField h = heat_semigroup(u, 0.1);
    // scalar exponential oracle, frozen: e^{-(2 pi)^2 / 10}
    const double factor = 0.019296302911016776;
    CHECK(l2_norm(h) == doctest::Approx(factor * l2_norm(u)).epsilon(1e-12));
  }
  SUBCASE("constant field untouched") {
    FourierField f(spec);
    f.set_mean({1.0, 2.0, 0.0});
    FourierField h = heat_semigroup(f, 3.0);
    CHECK(h.mean()[0] == 1.0);
    CHECK(h.mean()[1] == 2.0);
  }
  SUBCASE("semigroup property") {
    FourierField f = random_field(spec, 13);
    FourierField h1 = heat_semigroup(heat_semigroup(f, 0.07), 0.05);
    FourierField h2 = heat_semigroup(f, 0.12);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.raw().size(); ++i)
      worst = std::max(worst, std::abs(h1.raw()[i] - h2.raw()[i]));
    CHECK(worst < 1e-13);
  }
  SUBCASE("commutes with the projection") {
    FourierField f = random_field(spec, 17);
    FourierField a = heat_semigroup(leray_project(f), 0.2);
    FourierField b = leray_project(heat_semigroup(f, 0.2));
    double worst = 0.0;
    for (std::size_t i = 0; i < f.raw().size(); ++i)
      worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
    CHECK(worst < 1e-14 * l2_norm(f));
  }
}

TEST_CASE("interpolation inequality in mode space") {
  GridSpec spec(2, 16);
  for (std::uint64_t seed : {21ull, 22ull, 23ull, 24ull}) {
    FourierField f = random_field(spec, seed);
    f.set_mean(vec_zero());
    double h1 = sobolev_norm(f, {1.0, true});
    double h_half = sobolev_norm(f, {0.5, true});
    double h_32 = sobolev_norm(f, {1.5, true});
    CHECK(h1 * h1 <= h_half * h_32 * (1.0 + 1e-12));
  }
}

TEST_CASE("ns_step") {
  GridSpec spec(2, 32);
  SUBCASE("pure-gradient advection: one step equals exact heat decay") {
    FourierField u = single_sine_y(spec, 0.8);
    FourierField zero(spec);
    FourierField stepped = ns_step(u, zero, 0.01);
    FourierField heat = heat_semigroup(u, 0.01);
    FourierField diff = stepped;
    diff -= heat;
    CHECK(l2_norm(diff) < 1e-13);
  }
  SUBCASE("constant force drives the mean mode exactly") {
    FourierField u(spec, true);
    FourierField F(spec);
    F.set_mean({0.3, -0.1, 0.0});
    FourierField stepped = ns_step(u, F, 0.02);
    CHECK(stepped.mean()[0] == doctest::Approx(0.3 * 0.02).epsilon(1e-14));
    CHECK(stepped.mean()[1] == doctest::Approx(-0.1 * 0.02).epsilon(1e-14));
    FourierField nomean = stepped;
    nomean.set_mean(vec_zero());
    CHECK(l2_norm(nomean) < 1e-14);
  }
  SUBCASE("energy never increases without forcing") {
    FourierField u = random_field(spec, 31, spec.dealias_cutoff());
    u = leray_project(u);
    u.set_mean(vec_zero());
    u *= 0.2 / l2_norm(u);
    FourierField zero(spec);
    double e = l2_norm(u);
    for (int k = 0; k < 20; ++k) {
      u = ns_step(u, zero, 0.002);
      double e2 = l2_norm(u);
      CHECK(e2 <= e + 1e-10);
      e = e2;
    }
  }
  SUBCASE("nonfinite coefficients rejected") {
    FourierField u = single_sine_y(spec);
    FourierField F(spec);
    F.set_mean({std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0});
    CHECK_THROWS_AS((void)ns_step(u, F, 0.01), NumericalError);
  }
  SUBCASE("dt refinement: Lie order >= 1, Strang order >= 2") {
    // perturbed Taylor-Green so the projected advection term is nonzero
    FourierField u0 = taylor_green(spec, 0.5);
    {
      FourierField bump = random_field(spec, 99, 3);
      bump = leray_project(bump);
      bump.set_mean(vec_zero());
      bump *= 0.1 / l2_norm(bump);
      u0 += bump;
      u0.set_div_free(true);
    }
    FourierField zero(spec);
    const double T = 0.1;
    auto solve = [&](double dt, TimeScheme sch) {
      FourierField u = u0;
      NsStepOptions o;
      o.scheme = sch;
      int n = static_cast<int>(std::round(T / dt));
      for (int i = 0; i < n; ++i) u = ns_step(u, zero, dt, o);
      return u;
    };
    for (TimeScheme sch : {TimeScheme::Lie, TimeScheme::Strang}) {
      FourierField ref = solve(T / 1024.0, sch);
      std::vector<double> errs;
      for (double dt : {T / 8.0, T / 16.0, T / 32.0, T / 64.0, T / 128.0}) {
        FourierField u = solve(dt, sch);
        u -= ref;
        errs.push_back(l2_norm(u));
      }
      std::vector<double> p;
      for (std::size_t i = 1; i < errs.size(); ++i)
        p.push_back(std::log2(errs[i - 1] / errs[i]));
      if (sch == TimeScheme::Lie) {
        CHECK(0.5 * (p[p.size() - 1] + p[p.size() - 2]) >= 1.0);
      } else {
        // the splitting error approaches second order from below; require
        // the finest observed pair near 2 and the extrapolated limit >= 2
        CHECK(p.back() >= 1.9);
        CHECK(2.0 * p[p.size() - 1] - p[p.size() - 2] >= 2.0);
      }
    }
  }
}

TEST_CASE("grad_sup_norm") {
  GridSpec spec(2, 16);
  SUBCASE("constant field") {
    FourierField f(spec);
    f.set_mean({5.0, -3.0, 0.0});
    CHECK(grad_sup_norm(f) == 0.0);
  }
  SUBCASE("single sine attains 2 pi") {
    FourierField u = single_sine_y(spec);
    CHECK(grad_sup_norm(u) == doctest::Approx(kTwoPi).epsilon(1e-10));
  }
  SUBCASE("triangle inequality for two orthogonal modes") {
    FourierField a = single_sine_y(spec, 0.5);
    GridField g(spec, 2);
    for (std::size_t p = 0; p < spec.points(); ++p) {
      int i0 = static_cast<int>(p / spec.n);
      g.at(p, 1) = 0.7 * std::sin(kTwoPi * double(i0) / spec.n);
    }
    FourierField b = analyze(g);
    FourierField sum = a;
    sum += b;
    CHECK(grad_sup_norm(sum) <= grad_sup_norm(a) + grad_sup_norm(b) + 1e-12);
  }
}

TEST_CASE("random divergence-free field hits its H^{1/2} target") {
  GridSpec spec(2, 32);
  FourierField f = random_div_free_field(spec, 2, 0.25, 42, {0.1, 0.0, 0.0});
  CHECK(f.hermitian_defect() < 1e-13);
  CHECK(f.divergence_defect() < 1e-12);
  CHECK(sobolev_norm(f, {0.5, true}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.mean()[0] == doctest::Approx(0.1).epsilon(1e-14));
  // determinism
  FourierField g = random_div_free_field(spec, 2, 0.25, 42, {0.1, 0.0, 0.0});
  CHECK(std::equal(f.raw().begin(), f.raw().end(), g.raw().begin()));
}

TEST_CASE("three-dimensional fields") {
  GridSpec spec(3, 8);
  FourierField f = random_field(spec, 55);
  CHECK(f.hermitian_defect() < 1e-13);
  FourierField p = leray_project(f);
  CHECK(p.divergence_defect() < 1e-12);
  FourierField p2 = leray_project(p);
  p2 -= p;
  CHECK(l2_norm(p2) <= 1e-13 * l2_norm(f));
  // heat and projection commute in 3d as well
  FourierField a = heat_semigroup(leray_project(f), 0.05);
  FourierField b = leray_project(heat_semigroup(f, 0.05));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
  CHECK(worst < 1e-14 * l2_norm(f));
  // a dissipative step keeps energy nonincreasing
  FourierField u = p;
  u.set_mean(vec_zero());
  u *= 0.1 / l2_norm(u);
  FourierField zero(spec);
  double e = l2_norm(u);
  u = ns_step(u, zero, 0.002);
  CHECK(l2_norm(u) <= e + 1e-10);
}

TEST_CASE("interpolation of gradients between second derivatives and L2") {
  // numeric check of ||grad u||_{L3} <= C ||D2 u||^{3/4} ||u||^{1/4} on the
  // 3-torus for mean-free fields (the exponent triple used by the decay
  // machinery); measured ratios sit near 0.16, asserted under 1
  GridSpec spec(3, 16);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Rng rng(seed);
    GridField g(spec, 3);
    for (auto& v : g.values) v = rng.uniform(-1, 1);
    FourierField f = analyze(g);
    dealias(f, 5);
    f.set_mean(vec_zero());
    std::vector<GridField> ders;
    for (int a = 0; a < 3; ++a) {
      FourierField da(spec);
      for (std::size_t m = 0; m < f.modes(); ++m) {
        auto k = f.freq(m);
        Complex ik(0.0, kTwoPi * k[a]);
        for (int c = 0; c < 3; ++c) da.at(m, c) = ik * f.at(m, c);
      }
      ders.push_back(synthesize(da));
    }
    double sum3 = 0.0;
    for (std::size_t p = 0; p < spec.points(); ++p) {
      double q = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) q += ders[a].at(p, c) * ders[a].at(p, c);
      sum3 += std::pow(q, 1.5);
    }
    double grad_l3 = std::pow(sum3 * spec.cell_volume(), 1.0 / 3.0);
    double d2 = 0.0;
    for (std::size_t m = 0; m < f.modes(); ++m) {
      auto k = f.freq(m);
      double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
      double msq = 0.0;
      for (int c = 0; c < 3; ++c) msq += std::norm(f.at(m, c));
      d2 += std::pow(kTwoPi, 4) * k2 * k2 * msq;
    }
    double ratio = grad_l3 / (std::pow(std::sqrt(d2), 0.75) * std::pow(l2_norm(f), 0.25));
    CHECK(ratio > 0.0);
    CHECK(ratio <= 1.0);
  }
}

TEST_CASE("suggested dt guard") {
  GridSpec spec(2, 32);
  FourierField c(spec, true);
  c.set_mean({0.0, 0.0, 0.0});
  CHECK(suggested_dt_max(c) > 1e6);  // still fields impose no limit
  FourierField u = single_sine_y(spec, 2.0);
  double expect = 0.5 / (kTwoPi * spec.dealias_cutoff() * 2.0);
  CHECK(suggested_dt_max(u) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(validate_grid(4, 16), ConfigError);
  CHECK_THROWS_AS(validate_grid(2, 15), ConfigError);
  CHECK_THROWS_AS(validate_grid(2, 4), ConfigError);
  CHECK_NOTHROW(validate_grid(3, 8));
}
