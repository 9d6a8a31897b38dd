#include "entroscope/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entroscope/grid.hpp"
#include "entroscope/special.hpp"
#include "entroscope/u_stats.hpp"

namespace entroscope {

HistogramCounts HistogramCounts::build(std::span<const double> samples, int dim, double edge) {
  if (!(edge > 0.0) || edge > 1.0)
    throw std::invalid_argument("HistogramCounts: edge must lie in (0, 1]");
  const double inv = 1.0 / edge;
  const int m = static_cast<int>(std::lround(inv));
  if (std::fabs(inv - m) > 1e-9)
    throw std::invalid_argument("HistogramCounts: 1/edge must be an integer (bins must tile)");
  if (samples.size() % dim != 0) throw std::invalid_argument("HistogramCounts: ragged samples");
  HistogramCounts h;
  h.edge = edge;
  h.bins_per_axis = m;
  h.n = static_cast<long>(samples.size()) / dim;
  long bins = 1;
  for (int ax = 0; ax < dim; ++ax) bins *= m;
  h.counts.assign(bins, 0);
  for (long i = 0; i < h.n; ++i) {
    long idx = 0, stride = 1;
    for (int ax = 0; ax < dim; ++ax) {
      const double x = samples[i * dim + ax];
      if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("HistogramCounts: sample outside the unit cube");
      const long b = std::min<long>(m - 1, static_cast<long>(x * m));
      idx += stride * b;
      stride *= m;
    }
    ++h.counts[idx];
  }
  return h;
}

double plugin_entropy(std::span<const double> samples, int dim, const Kernel& kernel, double h,
                      BoundaryMode boundary, int resolution_multiplier, int override_threads) {
  if (!(h > 0.0)) throw std::invalid_argument("plugin_entropy: bandwidth must be positive");
  if (samples.empty() || samples.size() % dim != 0)
    throw std::invalid_argument("plugin_entropy: bad sample array");
  const long n = static_cast<long>(samples.size()) / dim;

  Box domain;
  if (boundary == BoundaryMode::periodic) {
    domain = Box::unit_cube(dim);
  } else {
    const double pad = h * kernel.support_radius;
    domain.lo.assign(dim, -pad);
    domain.hi.assign(dim, 1.0 + pad);
  }
  std::vector<int> cells(dim);
  for (int ax = 0; ax < dim; ++ax)
    cells[ax] = std::max(1, static_cast<int>(std::ceil((domain.hi[ax] - domain.lo[ax]) *
                                                           resolution_multiplier / h -
                                                       1e-9)));
  MidpointGrid grid(domain, cells);

  const bool box_1d = kernel.kind == KernelKind::box && dim == 1;
  std::vector<double> sorted;
  if (box_1d) {
    sorted.assign(samples.begin(), samples.end());
    if (boundary == BoundaryMode::periodic)
      for (auto& x : sorted) x -= std::floor(x);
    std::sort(sorted.begin(), sorted.end());
  }
  const double hd = std::pow(h, dim);

  std::vector<double> values(grid.cell_count());
  parallel_for(
      grid.cell_count(),
      [&](std::int64_t i) {
        thread_local std::vector<double> x;
        x.resize(dim);
        grid.midpoint(i, x);
        double fhat;
        if (box_1d) {
          auto count_range = [&](double lo, double hi) {
            return std::upper_bound(sorted.begin(), sorted.end(), hi) -
                   std::lower_bound(sorted.begin(), sorted.end(), lo);
          };
          long z;
          const double r = 0.5 * h;
          if (boundary == BoundaryMode::zero_extension) {
            z = count_range(x[0] - r, x[0] + r);
          } else {
            double lo = x[0] - r, hi = x[0] + r;
            lo -= std::floor(lo);
            hi -= std::floor(hi);
            z = lo <= hi ? count_range(lo, hi) : count_range(lo, 1.0) + count_range(0.0, hi);
          }
          fhat = static_cast<double>(z) / (n * hd);
        } else {
          fhat = kde(samples, dim, kernel, h, x, boundary);
        }
        values[i] = -xlogx(fhat);
      },
      override_threads);
  return pairwise_sum(values) * grid.cell_volume();
}

double discrete_reduction_entropy(std::span<const double> samples, int dim, double h,
                                  DiscreteMode mode) {
  const HistogramCounts hist = HistogramCounts::build(samples, dim, h);
  const long n = hist.n;
  if (n < 1) throw std::invalid_argument("discrete_reduction_entropy: empty sample");
  double hd = 0.0;
  if (mode == DiscreteMode::miller_madow) {
    long occupied = 0;
    for (long c : hist.counts) {
      if (c == 0) continue;
      ++occupied;
      const double p = static_cast<double>(c) / n;
      hd -= xlogx(p);
    }
    hd += static_cast<double>(occupied - 1) / (2.0 * n);
  } else {
    // Polynomial bias correction on low-frequency bins via the
    // falling-factorial identity (unit-volume specialization of the
    // box-kernel fast path); Taylor-corrected plug-in on the rest.
    const double lnn = std::log(static_cast<double>(n));
    const double tau = 2.0 * lnn / n;
    const int k = std::max(1, static_cast<int>(std::ceil(0.6 * lnn)));
    const PolyApprox poly = remez_minimax(2.0 * tau, k);
    for (long c : hist.counts) {
      const double p = static_cast<double>(c) / n;
      if (p < tau)
        hd += h1_box_fastpath(c, n, 1.0, 1, poly);
      else
        hd += -xlogx(p) + (1.0 - p) / (2.0 * n);
    }
  }
  return hd + dim * std::log(h);
}

double resubstitution_entropy(std::span<const double> samples, int dim, const Kernel& kernel,
                              double h, BoundaryMode boundary) {
  if (!(h > 0.0)) throw std::invalid_argument("resubstitution_entropy: bandwidth must be positive");
  const long n = static_cast<long>(samples.size()) / dim;
  if (n < 2) throw std::invalid_argument("resubstitution_entropy: need at least two samples");
  const double hd = std::pow(h, dim);
  const double floor_density = 1.0 / (n * hd);
  std::vector<double> terms(n);
  std::vector<double> u(dim);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = 0; j < n; ++j) {
      if (j == i) continue;
      double v = 1.0;
      for (int ax = 0; ax < dim; ++ax) {
        u[ax] = samples[i * dim + ax] - samples[j * dim + ax];
        if (boundary == BoundaryMode::periodic) u[ax] -= std::floor(u[ax] + 0.5);
        v *= kernel.axis_eval(u[ax] / h);
        if (v == 0.0) break;
      }
      acc += v;
    }
    const double loo = acc / ((n - 1.0) * hd);
    terms[i] = std::log(std::max(loo, floor_density));
  }
  return -pairwise_sum(terms) / static_cast<double>(n);
}

}  // namespace entroscope
