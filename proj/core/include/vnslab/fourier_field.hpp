#pragma once

#include <complex>
#include <vector>

#include "vnslab/common.hpp"

namespace vnslab::spectral {

using Complex = std::complex<double>;

/// Discretization of the unit torus [0,1)^d with n modes per axis.
/// The dealiasing cutoff is the 2/3 rule: modes with any |k_i| > floor(n/3)
/// are discarded by nonlinear products.
struct GridSpec {
  int d = 2;
  int n = 16;

  GridSpec() = default;
  GridSpec(int d_, int n_);

  int dealias_cutoff() const { return n / 3; }
  std::size_t points() const {
    std::size_t p = 1;
    for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(n);
    return p;
  }
  double cell_volume() const { return 1.0 / static_cast<double>(points()); }

  bool operator==(const GridSpec&) const = default;
};

/// Integer frequency of FFT bin i (size-n axis): 0..n/2-1, -n/2..-1.
inline int fft_freq(int i, int n) { return (i <= n / 2 - 1) ? i : i - n; }
/// FFT bin of integer frequency k (negative allowed).
inline int fft_bin(int k, int n) { return (k + n) % n; }

/// Real vector field on the torus stored as Fourier coefficients.
/// coeffs[mode*d + c] is the c-th component of the d-vector at the mode
/// whose multi-index is row-major over the FFT bins of each axis.
/// Real-valuedness is the Hermitian symmetry coeff(-k) = conj(coeff(k)).
class FourierField {
 public:
  FourierField() = default;
  FourierField(const GridSpec& spec, bool div_free = false)
      : spec_(spec), div_free_(div_free), coeffs_(spec.points() * spec.d, Complex(0.0, 0.0)) {}

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.d; }
  int n() const { return spec_.n; }
  bool div_free() const { return div_free_; }
  void set_div_free(bool v) { div_free_ = v; }

  std::size_t modes() const { return spec_.points(); }
  Complex& at(std::size_t mode, int comp) { return coeffs_[mode * spec_.d + comp]; }
  const Complex& at(std::size_t mode, int comp) const { return coeffs_[mode * spec_.d + comp]; }

  std::vector<Complex>& raw() { return coeffs_; }
  const std::vector<Complex>& raw() const { return coeffs_; }

  /// Multi-index (FFT bins) of a flat mode index.
  std::array<int, 3> unravel(std::size_t mode) const;
  std::size_t ravel(const std::array<int, 3>& bins) const;
  /// Integer frequency vector of a flat mode index.
  std::array<int, 3> freq(std::size_t mode) const;

  /// Mean of the field = coefficient of the zero mode.
  Vec mean() const;
  void set_mean(const Vec& m);

  /// Largest relative Hermitian-symmetry violation (0 for a real field).
  double hermitian_defect() const;
  /// Largest relative divergence |k . c_k| / (|k||c_k|) over nonzero modes.
  double divergence_defect() const;

  bool finite() const;

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(double s);

 private:
  GridSpec spec_;
  bool div_free_ = false;
  std::vector<Complex> coeffs_;
};

/// Physical-space samples of a d-vector field on the n^d grid; values[p*d+c].
struct GridField {
  GridSpec spec;
  int comps = 1;
  std::vector<double> values;

  GridField() = default;
  GridField(const GridSpec& s, int comps_)
      : spec(s), comps(comps_), values(s.points() * comps_, 0.0) {}

  double& at(std::size_t p, int c) { return values[p * comps + c]; }
  double at(std::size_t p, int c) const { return values[p * comps + c]; }
};

/// Forward transform: physical samples -> coefficients (mean-normalized so
/// that the zero mode is the field average).
FourierField analyze(const GridField& g);
/// Inverse transform: coefficients -> physical samples on the n^d grid.
GridField synthesize(const FourierField& f);
/// Inverse transform onto a refinement of the grid (refine >= 1) by zero
/// padding; exact for band-limited fields.
GridField synthesize_refined(const FourierField& f, int refine);

/// Zero every coefficient with any |k_i| > cutoff (in place).
void dealias(FourierField& f, int cutoff);

/// L2(T^d) norm via Parseval.
double l2_norm(const FourierField& f);

GridSpec validate_grid(int d, int n);

}  // namespace vnslab::spectral
