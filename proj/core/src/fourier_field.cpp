#include "vnslab/fourier_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

namespace vnslab::spectral {

GridSpec::GridSpec(int d_, int n_) : d(d_), n(n_) {
  if (d != 2 && d != 3) throw ConfigError("grid dimension must be 2 or 3");
  if (n < 8 || n % 2 != 0) throw ConfigError("grid resolution must be even and >= 8");
}

GridSpec validate_grid(int d, int n) { return GridSpec(d, n); }

namespace {

// FFTW plans keyed by (d, n, sign). Plan creation is not thread safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  // In-place c2c transform of a d-dim n^d array.
  void transform(int d, int n, int sign, Complex* data) {
    fftw_plan p;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto key = std::make_tuple(d, n, sign);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<int> dims(d, n);
        std::size_t pts = 1;
        for (int a = 0; a < d; ++a) pts *= static_cast<std::size_t>(n);
        std::vector<Complex> scratch(pts);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        p = fftw_plan_dft(d, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[key] = p;
      } else {
        p = it->second;
      }
    }
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

std::array<int, 3> FourierField::unravel(std::size_t mode) const {
  std::array<int, 3> idx = {0, 0, 0};
  for (int a = spec_.d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(mode % spec_.n);
    mode /= spec_.n;
  }
  return idx;
}

std::size_t FourierField::ravel(const std::array<int, 3>& bins) const {
  std::size_t m = 0;
  for (int a = 0; a < spec_.d; ++a) m = m * spec_.n + bins[a];
  return m;
}

std::array<int, 3> FourierField::freq(std::size_t mode) const {
  auto idx = unravel(mode);
  std::array<int, 3> k = {0, 0, 0};
  for (int a = 0; a < spec_.d; ++a) k[a] = fft_freq(idx[a], spec_.n);
  return k;
}

Vec FourierField::mean() const {
  Vec m = vec_zero();
  for (int c = 0; c < spec_.d; ++c) m[c] = at(0, c).real();
  return m;
}

void FourierField::set_mean(const Vec& m) {
  for (int c = 0; c < spec_.d; ++c) at(0, c) = Complex(m[c], 0.0);
}

double FourierField::hermitian_defect() const {
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t m = 0; m < modes(); ++m)
    for (int c = 0; c < spec_.d; ++c) scale = std::max(scale, std::abs(at(m, c)));
  if (scale == 0.0) return 0.0;
  for (std::size_t m = 0; m < modes(); ++m) {
    auto idx = unravel(m);
    std::array<int, 3> conj_idx = {0, 0, 0};
    for (int a = 0; a < spec_.d; ++a) conj_idx[a] = (spec_.n - idx[a]) % spec_.n;
    std::size_t mc = ravel(conj_idx);
    for (int c = 0; c < spec_.d; ++c)
      worst = std::max(worst, std::abs(at(m, c) - std::conj(at(mc, c))) / scale);
  }
  return worst;
}

double FourierField::divergence_defect() const {
  double worst = 0.0;
  for (std::size_t m = 1; m < modes(); ++m) {
    auto k = freq(m);
    double knorm = 0.0;
    Complex div(0.0, 0.0);
    double cnorm = 0.0;
    for (int a = 0; a < spec_.d; ++a) {
      knorm += double(k[a]) * k[a];
      div += double(k[a]) * at(m, a);
      cnorm += std::norm(at(m, a));
    }
    if (knorm == 0.0 || cnorm == 0.0) continue;
    worst = std::max(worst, std::abs(div) / std::sqrt(knorm * cnorm));
  }
  return worst;
}

bool FourierField::finite() const {
  for (const auto& c : coeffs_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

FourierField& FourierField::operator+=(const FourierField& o) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  div_free_ = div_free_ && o.div_free_;
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  div_free_ = div_free_ && o.div_free_;
  return *this;
}

FourierField& FourierField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

FourierField analyze(const GridField& g) {
  FourierField f(g.spec);
  const std::size_t pts = g.spec.points();
  std::vector<Complex> scratch(pts);
  const double inv = 1.0 / static_cast<double>(pts);
  for (int c = 0; c < g.comps; ++c) {
    for (std::size_t p = 0; p < pts; ++p) scratch[p] = Complex(g.at(p, c), 0.0);
    PlanCache::instance().transform(g.spec.d, g.spec.n, FFTW_FORWARD, scratch.data());
    for (std::size_t p = 0; p < pts; ++p) f.at(p, c) = scratch[p] * inv;
  }
  return f;
}

GridField synthesize(const FourierField& f) {
  GridField g(f.spec(), f.dim());
  const std::size_t pts = f.spec().points();
  std::vector<Complex> scratch(pts);
  for (int c = 0; c < f.dim(); ++c) {
    for (std::size_t p = 0; p < pts; ++p) scratch[p] = f.at(p, c);
    PlanCache::instance().transform(f.spec().d, f.spec().n, FFTW_BACKWARD, scratch.data());
    for (std::size_t p = 0; p < pts; ++p) g.at(p, c) = scratch[p].real();
  }
  return g;
}

GridField synthesize_refined(const FourierField& f, int refine) {
  if (refine <= 1) return synthesize(f);
  const int n = f.n();
  const int nf = n * refine;
  GridSpec fine(f.dim(), nf);
  GridField g(fine, f.dim());
  const std::size_t pts = fine.points();
  std::vector<Complex> scratch(pts);
  for (int c = 0; c < f.dim(); ++c) {
    std::fill(scratch.begin(), scratch.end(), Complex(0.0, 0.0));
    for (std::size_t m = 0; m < f.modes(); ++m) {
      auto k = f.freq(m);
      std::size_t mf = 0;
      for (int a = 0; a < f.dim(); ++a) mf = mf * nf + fft_bin(k[a], nf);
      scratch[mf] = f.at(m, c);
    }
    PlanCache::instance().transform(fine.d, fine.n, FFTW_BACKWARD, scratch.data());
    for (std::size_t p = 0; p < pts; ++p) g.at(p, c) = scratch[p].real();
  }
  return g;
}

void dealias(FourierField& f, int cutoff) {
  for (std::size_t m = 0; m < f.modes(); ++m) {
    auto k = f.freq(m);
    bool kill = false;
    for (int a = 0; a < f.dim(); ++a)
      if (std::abs(k[a]) > cutoff) kill = true;
    if (kill)
      for (int c = 0; c < f.dim(); ++c) f.at(m, c) = Complex(0.0, 0.0);
  }
}

double l2_norm(const FourierField& f) {
  KahanSum s;
  for (const auto& c : f.raw()) s.add(std::norm(c));
  return std::sqrt(s.value());
}

}  // namespace vnslab::spectral
