#pragma once

#include <span>
#include <vector>

#include "entroscope/kernels.hpp"

namespace entroscope {

//! Regular histogram on [0,1]^d with per-axis bin edge h (1/h integral).
struct HistogramCounts {
  double edge = 0.0;
  int bins_per_axis = 1;
  long n = 0;
  std::vector<long> counts;  // row-major over axes

  static HistogramCounts build(std::span<const double> samples, int dim, double edge);
};

//! Integral-form kernel plug-in: quadrature of -fhat_h ln fhat_h over the
//! h-enlarged support (exact piecewise-constant handling via the same grid
//! machinery as the optimal estimator); 0 ln 0 = 0.
double plugin_entropy(std::span<const double> samples, int dim, const Kernel& kernel, double h,
                      BoundaryMode boundary, int resolution_multiplier = 4,
                      int override_threads = 0);

enum class DiscreteMode { miller_madow, poly };

//! Quantize-then-discrete-entropy reduction: histogram at edge h, discrete
//! entropy by the selected mode, plus d ln h.  Requires 1/h integral.
double discrete_reduction_entropy(std::span<const double> samples, int dim, double h,
                                  DiscreteMode mode);

//! Leave-one-out resubstitution estimator -(1/n) sum ln fhat^{(-i)}(X_i),
//! with zero leave-one-out densities floored at 1/(n h^d).
double resubstitution_entropy(std::span<const double> samples, int dim, const Kernel& kernel,
                              double h, BoundaryMode boundary);

}  // namespace entroscope
