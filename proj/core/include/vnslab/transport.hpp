#pragma once

#include <vector>

#include "vnslab/fourier_field.hpp"

namespace vnslab::ot {

/// One histogram axis. Periodic axes ([0,1) torus directions) measure
/// distance as min(|dx|, L - |dx|); non-periodic axes (velocity) as |dx|.
struct Axis {
  int bins = 1;
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double width() const { return (hi - lo) / bins; }
  double center(int i) const { return lo + (i + 0.5) * width(); }
  bool operator==(const Axis&) const = default;
};

/// Nonnegative masses on a regular product grid over up to 4 axes.
struct Histogram {
  std::vector<Axis> axes;
  std::vector<double> mass;

  static Histogram zeros(std::vector<Axis> axes);
  std::size_t bins() const { return mass.size(); }
  double total() const;
  /// Coordinates of the center of a flat bin index.
  std::vector<double> center(std::size_t flat) const;
  /// Euclidean ground distance between two bin centers (periodic-aware).
  double distance(std::size_t i, std::size_t j) const;
};

/// Exact discrete Wasserstein-1 via network simplex on the support of the
/// residual a - b. Requires identical axes, equal totals (1e-12 relative)
/// and at most 4096 bins. Throws NumericalError otherwise.
double w1_exact(const Histogram& a, const Histogram& b);

struct EntropicResult {
  double value = 0.0;   // transport cost of the rounded feasible plan
  int iterations = 0;
  double marginal_error = 0.0;
};

/// Entropic surrogate: log-domain Sinkhorn with epsilon scaling, rounded to
/// a feasible plan, so value >= w1_exact always. Throws on non-convergence.
EntropicResult w1_entropic(const Histogram& a, const Histogram& b, double eps,
                           int max_iters = 30000, double marginal_tol = 1e-7);

/// Monge-Kantorovich lower bound max_phi sum phi (a - b) over the supplied
/// grid test functions; each phi must be 1-Lipschitz for the ground metric
/// (checked via discrete gradients, tolerance 1e-9).
double dual_certificate(const Histogram& a, const Histogram& b,
                        const std::vector<std::vector<double>>& phis);

/// rho(x) -> rho(x + t * drift) by spectral phase shift (exact for
/// band-limited grids).
spectral::GridField renormalized_density(const spectral::GridField& rho, double t,
                                         const Vec& drift);

/// Trapezoid prefix integral of sqrt(Emod), queryable on [s, t].
class JabinCauchyBound {
 public:
  JabinCauchyBound(const std::vector<double>& t, const std::vector<double>& emod);
  /// integral_s^t sqrt(Emod) with linear interpolation between samples.
  double operator()(double s, double t) const;

 private:
  std::vector<double> t_;
  std::vector<double> prefix_;
  std::vector<double> sq_;
};

/// Bin particles (x, v) into a phase-space histogram (periodic x axes,
/// plain v axes over [-v_extent, v_extent]).
Histogram phase_space_histogram(const std::vector<double>& x, const std::vector<double>& v,
                                const std::vector<double>& w, int d, int x_bins, int v_bins,
                                double v_lo, double v_hi);

/// Bin a deposited density field into an x-only histogram with nx bins per
/// axis (nx must divide the grid resolution).
Histogram density_histogram(const spectral::GridField& rho, int nx);

}  // namespace vnslab::ot
