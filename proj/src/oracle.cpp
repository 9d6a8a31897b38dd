#include "entroscope/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "entroscope/special.hpp"

namespace entroscope {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double midpoint_entropy(const PdfFn& pdf, const Box& domain, int n_per_axis) {
  const int d = domain.dim();
  std::vector<int> n(d, n_per_axis);
  MidpointGrid grid(domain, n);
  std::vector<double> acc(static_cast<std::size_t>(grid.cell_count()), 0.0);
  std::vector<double> x(d);
  // Serial fill is fine at oracle scales for d = 1; parallelize >= 2 dims.
  if (d == 1) {
    for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
      grid.midpoint(i, x);
      acc[i] = -xlogx(pdf(x));
    }
  } else {
    parallel_for(grid.cell_count(), [&](std::int64_t i) {
      thread_local std::vector<double> xt;
      xt.resize(d);
      grid.midpoint(i, xt);
      acc[i] = -xlogx(pdf(xt));
    });
  }
  return pairwise_sum(acc) * grid.cell_volume();
}

}  // namespace

QuadratureResult quadrature_entropy(const PdfFn& pdf, const Box& domain, int resolution,
                                    double tolerance) {
  if (!is_power_of_two(resolution) || resolution < 2)
    throw std::invalid_argument("quadrature_entropy: resolution must be a power of two >= 2");
  const double coarse = midpoint_entropy(pdf, domain, resolution / 2);
  const double fine = midpoint_entropy(pdf, domain, resolution);
  QuadratureResult out;
  // Midpoint rule is O(h^2): Richardson extrapolation.
  out.value = (4.0 * fine - coarse) / 3.0;
  out.error_estimate = std::fabs(fine - coarse) / 3.0;
  out.converged = out.error_estimate <= tolerance;
  return out;
}

QuadratureResult quadrature_entropy(const DensityModel& density) {
  const int res = density.dim == 1 ? (1 << 14) : (density.dim == 2 ? (1 << 9) : (1 << 6));
  return quadrature_entropy(density.pdf, density.box, res);
}

namespace {

struct FisherPass {
  double value = 0.0;
  double grad_sq = 0.0;
  double excluded = 0.0;
};

FisherPass fisher_pass(const PdfFn& pdf, const Box& domain, int n_per_axis, const VecFn& gradient) {
  const int d = domain.dim();
  std::vector<int> n(d, n_per_axis);
  MidpointGrid grid(domain, n);
  const double vol = grid.cell_volume();
  std::vector<double> x(d), g(d), xp(d), xm(d);
  const double step = (domain.hi[0] - domain.lo[0]) / n_per_axis;
  FisherPass out;
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    grid.midpoint(i, x);
    const double f = pdf(x);
    if (f < 1e-12) {
      out.excluded += f * vol;
      continue;
    }
    double g2 = 0.0;
    if (gradient) {
      gradient(x, g);
      for (int ax = 0; ax < d; ++ax) g2 += g[ax] * g[ax];
    } else {
      for (int ax = 0; ax < d; ++ax) {
        xp = x;
        xm = x;
        xp[ax] += 0.5 * step;
        xm[ax] -= 0.5 * step;
        const double der = (pdf(xp) - pdf(xm)) / step;
        g2 += der * der;
      }
    }
    out.value += g2 / f * vol;
    out.grad_sq += g2 * vol;
  }
  return out;
}

}  // namespace

FisherResult fisher_information(const PdfFn& pdf, const Box& domain, int grid, const VecFn& gradient) {
  if (grid < 8) throw std::invalid_argument("fisher_information: grid too coarse");
  const FisherPass coarse = fisher_pass(pdf, domain, grid / 2, gradient);
  const FisherPass fine = fisher_pass(pdf, domain, grid, gradient);
  FisherResult out;
  out.excluded_mass = fine.excluded;
  const double drift = std::fabs(fine.value - coarse.value);
  // A convergent integral settles quadratically; log-divergent integrands
  // drift by ~ b ln 2 per doubling.
  if (drift > 0.02 * std::fabs(fine.value) + 1e-6) {
    out.divergent = true;
    out.value = std::numeric_limits<double>::infinity();
  } else {
    out.value = fine.value;
  }
  return out;
}

double second_derivative_norm(const PdfFn& pdf, double p, const Box& domain, int grid,
                              const VecFn& second_derivs) {
  if (!(p >= 1.0)) throw std::invalid_argument("second_derivative_norm: p must be >= 1");
  const int d = domain.dim();
  std::vector<int> n(d, grid);
  MidpointGrid mg(domain, n);
  const double vol = mg.cell_volume();
  std::vector<double> x(d), s(d), xp(d), xm(d);
  std::vector<double> acc(d, 0.0);
  const double step = (domain.hi[0] - domain.lo[0]) / grid;
  for (std::int64_t i = 0; i < mg.cell_count(); ++i) {
    mg.midpoint(i, x);
    if (second_derivs) {
      second_derivs(x, s);
    } else {
      // Interior central differences; stencils crossing the boundary are
      // skipped (the norm is taken over the interior of the domain).
      bool interior = true;
      for (int ax = 0; ax < d; ++ax)
        if (x[ax] - step < domain.lo[ax] || x[ax] + step > domain.hi[ax]) interior = false;
      if (!interior) continue;
      const double f0 = pdf(x);
      for (int ax = 0; ax < d; ++ax) {
        xp = x;
        xm = x;
        xp[ax] += step;
        xm[ax] -= step;
        s[ax] = (pdf(xp) - 2.0 * f0 + pdf(xm)) / (step * step);
      }
    }
    for (int ax = 0; ax < d; ++ax) acc[ax] += std::pow(std::fabs(s[ax]), p) * vol;
  }
  double total = 0.0;
  for (int ax = 0; ax < d; ++ax) total += std::pow(acc[ax], 1.0 / p);
  return total;
}

FisherProbeReport fisher_probe(const std::vector<DensityModel>& suite, double p, int grid) {
  FisherProbeReport rep;
  for (const auto& m : suite) {
    FisherProbeRow row;
    row.id = m.id;
    const int g = m.dim == 1 ? grid : 256;
    const FisherResult fr = fisher_information(m.pdf, m.box, g, m.gradient);
    row.fisher = fr.value;
    row.divergent = fr.divergent;
    const FisherPass pass = fisher_pass(m.pdf, m.box, g, m.gradient);
    row.grad_sq_norm = pass.grad_sq;
    row.second_norm = second_derivative_norm(m.pdf, p, m.box, g, m.second_derivs);
    if (row.fisher == 0.0 && row.second_norm == 0.0)
      row.ratio = 0.0;  // 0/0 convention (uniform)
    else
      row.ratio = row.fisher / row.second_norm;
    // Smooth boundary heuristic: pdf at the support boundary.
    std::vector<double> x(m.dim, 0.0);
    for (int ax = 0; ax < m.dim; ++ax) x[ax] = m.box.lo[ax];
    row.smooth_boundary = std::fabs(m.pdf(x)) < 1e-9;
    if (!std::isfinite(row.ratio)) rep.all_finite = false;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace entroscope
