#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "entroscope/densities.hpp"

namespace entroscope {

enum class BoundaryMode { zero_extension, periodic };

enum class KernelKind { box, triangle_product };

//! Compactly supported non-negative product kernel.  `support_radius` is the
//! per-axis radius: K(t) = 0 whenever any |t_i| exceeds it.
struct Kernel {
  KernelKind kind = KernelKind::box;
  int dim = 1;
  double sup_norm = 1.0;
  double support_radius = 0.5;

  static Kernel box(int d);
  static Kernel triangle_product(int d);

  //! K(t), unscaled.
  double eval(std::span<const double> t) const;
  //! Per-axis factor k(u) with K(t) = prod k(t_i).
  double axis_eval(double u) const;
};

//! K_h(t) = h^{-d} K(t / h).
double kernel_at(const Kernel& kernel, double h, std::span<const double> t);

//! Kernel density estimate at x: the sample average of K_h(x - X_i), with
//! displacements wrapped to [-1/2, 1/2) per axis in periodic mode.
//! Bounded by sup_norm / h^d.
double kde(std::span<const double> samples, int dim, const Kernel& kernel, double h,
           std::span<const double> x, BoundaryMode boundary);

//! Smoothed density f_h(x) = int K_h(x - y) f(y) dy.  Uses the density's
//! closed-form cell integral for the box kernel; adaptive quadrature to
//! absolute error 1e-8 otherwise.  Throws on quadrature non-convergence.
double smoothed_density(const DensityModel& density, const Kernel& kernel, double h,
                        std::span<const double> x, BoundaryMode boundary);

//! Per-item numeric verification of the kernel assumptions
//! (non-negativity, unit mass, zero mean, finite second moment, compact
//! support).
struct KernelAssumptionReport {
  bool nonnegative = false;
  bool unit_mass = false;
  bool zero_mean = false;
  bool finite_second_moment = false;
  bool compact_support = false;
  double mass_residual = 0.0;
  double mean_residual = 0.0;   // max over axes of |int t_i K|
  double second_moment = 0.0;   // int |t|^2 K
  double min_value = 0.0;
  bool all_pass() const {
    return nonnegative && unit_mass && zero_mean && finite_second_moment && compact_support;
  }
};

KernelAssumptionReport check_kernel_assumptions(const Kernel& kernel, double tol);

//! Same checks for an arbitrary 1-d kernel function with claimed radius
//! (used to exercise failure paths with deliberately broken kernels).
KernelAssumptionReport check_kernel_assumptions_fn(const std::function<double(double)>& k,
                                                   double claimed_radius, double tol);

}  // namespace entroscope
