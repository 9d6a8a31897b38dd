#include "entroscope/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace entroscope {

Kernel Kernel::box(int d) { return Kernel{KernelKind::box, d, 1.0, 0.5}; }

Kernel Kernel::triangle_product(int d) { return Kernel{KernelKind::triangle_product, d, 1.0, 1.0}; }

double Kernel::axis_eval(double u) const {
  switch (kind) {
    case KernelKind::box:
      return std::fabs(u) <= 0.5 ? 1.0 : 0.0;
    case KernelKind::triangle_product:
      return std::max(0.0, 1.0 - std::fabs(u));
  }
  return 0.0;
}

double Kernel::eval(std::span<const double> t) const {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) {
    v *= axis_eval(t[i]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

double kernel_at(const Kernel& kernel, double h, std::span<const double> t) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel_at: bandwidth must be positive");
  double v = 1.0;
  for (int i = 0; i < kernel.dim; ++i) {
    v *= kernel.axis_eval(t[i] / h);
    if (v == 0.0) return 0.0;
  }
  return v / std::pow(h, kernel.dim);
}

namespace {

inline double wrap_half(double u) {
  // wrap to [-1/2, 1/2)
  u -= std::floor(u + 0.5);
  return u;
}

}  // namespace

double kde(std::span<const double> samples, int dim, const Kernel& kernel, double h,
           std::span<const double> x, BoundaryMode boundary) {
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  if (samples.empty() || samples.size() % dim != 0)
    throw std::invalid_argument("kde: samples empty or not a multiple of dim");
  const std::size_t n = samples.size() / dim;
  const double hd = std::pow(h, dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 1.0;
    for (int ax = 0; ax < dim; ++ax) {
      double u = x[ax] - samples[i * dim + ax];
      if (boundary == BoundaryMode::periodic) u = wrap_half(u);
      v *= kernel.axis_eval(u / h);
      if (v == 0.0) break;
    }
    acc += v;
  }
  return acc / (static_cast<double>(n) * hd);
}

namespace {

// Adaptive Simpson in one dimension.
double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("smoothed_density: quadrature did not converge");
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Recursive tensor quadrature of K(( x - y)/h) f(y) over the kernel support;
// the caller divides by h^d once.
double convolve_quad(const DensityModel& density, const Kernel& kernel, double h,
                     std::span<const double> x, BoundaryMode boundary, std::vector<double>& y,
                     int axis, double tol) {
  const int d = density.dim;
  // Bounds nudged inside the support so rounding in (x - y)/h cannot zero
  // the kernel at the interval endpoints (which stalls the adaptive rule).
  const double r = h * kernel.support_radius * (1.0 - 1e-12);
  const double a = x[axis] - r, b = x[axis] + r;
  std::vector<double> yw(d);
  auto integrand = [&](double yi) -> double {
    y[axis] = yi;
    const double kv = kernel.axis_eval((x[axis] - yi) / h);
    if (kv == 0.0) return 0.0;
    if (axis + 1 == d) {
      for (int ax = 0; ax < d; ++ax) {
        yw[ax] = y[ax];
        if (boundary == BoundaryMode::periodic) yw[ax] -= std::floor(yw[ax]);
      }
      return kv * density.pdf(yw);
    }
    return kv * convolve_quad(density, kernel, h, x, boundary, y, axis + 1, tol * 0.1);
  };
  // Split at the kernel kink (y = x[axis]) to help the adaptive rule.
  return adaptive_simpson(integrand, a, x[axis], tol * 0.5) +
         adaptive_simpson(integrand, x[axis], b, tol * 0.5);
}

// Wrap an axis interval [lo, hi] (length <= 1) into segments within [0, 1].
void wrap_segments(double lo, double hi, std::vector<std::pair<double, double>>& out) {
  out.clear();
  const double shift = std::floor(lo);
  lo -= shift;
  hi -= shift;
  if (hi <= 1.0) {
    out.emplace_back(lo, hi);
  } else {
    out.emplace_back(lo, 1.0);
    out.emplace_back(0.0, hi - 1.0);
  }
}

}  // namespace

double smoothed_density(const DensityModel& density, const Kernel& kernel, double h,
                        std::span<const double> x, BoundaryMode boundary) {
  if (!(h > 0.0)) throw std::invalid_argument("smoothed_density: bandwidth must be positive");
  const int d = density.dim;
  if (kernel.kind == KernelKind::box && density.box_mass) {
    // Exact cube average: f_h(x) = mass(cube(x, h)) / h^d.
    const double hd = std::pow(h, d);
    if (boundary == BoundaryMode::zero_extension) {
      Box b;
      b.lo.resize(d);
      b.hi.resize(d);
      for (int i = 0; i < d; ++i) {
        b.lo[i] = x[i] - 0.5 * h;
        b.hi[i] = x[i] + 0.5 * h;
      }
      return density.box_mass(b) / hd;
    }
    // Periodic: split the wrapped cube into up to 2^d boxes.
    std::vector<std::vector<std::pair<double, double>>> segs(d);
    std::vector<std::pair<double, double>> tmp;
    for (int i = 0; i < d; ++i) {
      wrap_segments(x[i] - 0.5 * h, x[i] + 0.5 * h, tmp);
      segs[i] = tmp;
    }
    double mass = 0.0;
    std::vector<int> idx(d, 0);
    while (true) {
      Box b;
      b.lo.resize(d);
      b.hi.resize(d);
      for (int i = 0; i < d; ++i) {
        b.lo[i] = segs[i][idx[i]].first;
        b.hi[i] = segs[i][idx[i]].second;
      }
      mass += density.box_mass(b);
      int ax = 0;
      for (; ax < d; ++ax) {
        if (++idx[ax] < static_cast<int>(segs[ax].size())) break;
        idx[ax] = 0;
      }
      if (ax == d) break;
    }
    return mass / hd;
  }
  std::vector<double> y(d, 0.0);
  const double hd = std::pow(h, d);
  return convolve_quad(density, kernel, h, x, boundary, y, 0, 1e-9 * hd) / hd;
}

namespace {

KernelAssumptionReport check_axis_kernel(const std::function<double(double)>& k, double radius,
                                         int dim, double tol) {
  KernelAssumptionReport rep;
  // Composite midpoint over [-radius, radius] at high per-axis resolution.
  const int n = 1 << 15;
  const double width = 2.0 * radius / n;
  double mass = 0.0, mean = 0.0, second = 0.0, minv = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = -radius + (i + 0.5) * width;
    const double v = k(t);
    minv = std::min(minv, v);
    mass += v * width;
    mean += t * v * width;
    second += t * t * v * width;
  }
  rep.min_value = minv;
  rep.nonnegative = minv >= -tol;
  // Product structure: total mass = mass^d, per-axis mean zero <=> zero mean,
  // and |t|^2 moment = d * second * mass^(d-1).
  rep.mass_residual = std::fabs(std::pow(mass, dim) - 1.0);
  rep.unit_mass = rep.mass_residual <= tol;
  rep.mean_residual = std::fabs(mean);
  rep.zero_mean = rep.mean_residual <= tol;
  rep.second_moment = dim * second * std::pow(mass, dim - 1);
  rep.finite_second_moment = std::isfinite(rep.second_moment);
  // Compact support: scan outside the claimed radius.
  bool outside_zero = true;
  for (int i = 1; i <= 64; ++i) {
    const double t = radius * (1.0 + i * 0.25);
    if (std::fabs(k(t)) > tol || std::fabs(k(-t)) > tol) outside_zero = false;
  }
  rep.compact_support = outside_zero;
  return rep;
}

}  // namespace

KernelAssumptionReport check_kernel_assumptions(const Kernel& kernel, double tol) {
  auto axis = [&kernel](double t) { return kernel.axis_eval(t); };
  return check_axis_kernel(axis, kernel.support_radius, kernel.dim, tol);
}

KernelAssumptionReport check_kernel_assumptions_fn(const std::function<double(double)>& k,
                                                   double claimed_radius, double tol) {
  return check_axis_kernel(k, claimed_radius, 1, tol);
}

}  // namespace entroscope
