#include "entroscope/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "entroscope/grid.hpp"
#include "entroscope/u_stats.hpp"

namespace entroscope {

double EstimatorConfig::effective_c1() const {
  if (c1 > 0.0) return c1;
  return 2.0;  // both shipped kernels have ||K||_inf = 1
}

void EstimatorConfig::validate() const {
  cls.validate();
  if (!(c0 > 0.0)) throw std::invalid_argument("EstimatorConfig: c0 must be positive");
  if (!(c2 > 0.0)) throw std::invalid_argument("EstimatorConfig: c2 must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("EstimatorConfig: eps must lie in (0,1)");
  const double lhs = 7.0 * c2 * std::numbers::ln2;
  const double rhs = cls.s / (cls.s + cls.d);
  if (!(lhs < eps))
    throw std::invalid_argument("EstimatorConfig: requires 7 c2 ln 2 < eps (got " +
                                std::to_string(lhs) + " vs " + std::to_string(eps) + ")");
  if (!(eps < rhs))
    throw std::invalid_argument("EstimatorConfig: requires eps < s/(s+d) (got " +
                                std::to_string(eps) + " vs " + std::to_string(rhs) + ")");
  if (resolution_multiplier < 1)
    throw std::invalid_argument("EstimatorConfig: resolution multiplier must be >= 1");
}

EstimatorParams select_parameters(const EstimatorConfig& config, long n) {
  config.validate();
  if (n < 16) throw std::invalid_argument("select_parameters: n must be >= 16");
  EstimatorParams p;
  const double s = config.cls.s;
  const int d = config.cls.d;
  const double lnn = std::log(static_cast<double>(n));
  if (config.bandwidth_override) {
    p.h = *config.bandwidth_override;
    if (!(p.h > 0.0)) throw std::invalid_argument("select_parameters: bandwidth override must be positive");
  } else {
    p.h = config.c0 * std::pow(config.cls.L * n * lnn, -1.0 / (s + d));
  }
  if (p.h >= 1.0) {
    p.h = 0.5;
    p.h_capped = true;
  }
  p.k = static_cast<int>(std::ceil(config.c2 * lnn));
  if (p.k < 1) p.k = 1;
  const double hd = std::pow(p.h, d);
  p.tau_classify = config.effective_c1() * lnn / (n * hd);
  p.tau_h2 = p.tau_classify / 4.0;
  p.clip = config.disable_clip ? std::numeric_limits<double>::infinity()
                               : 1.0 / (std::pow(n, 1.0 - 2.0 * config.eps) * hd);
  p.delta = 2.0 * p.tau_classify;
  return p;
}

double h2_smooth(double fhat2, double fhat3, double u2, double tau_h2) {
  if (fhat2 < tau_h2) return 0.0;
  const double lf2 = std::log(fhat2);
  return -fhat2 * lf2 - (1.0 + lf2) * (fhat3 - fhat2) -
         0.5 * (fhat2 - 2.0 * fhat3 + u2 / fhat2);
}

SplitSamples SplitSamples::from_flat(std::span<const double> samples, int dim) {
  if (dim < 1) throw std::invalid_argument("SplitSamples: dim must be >= 1");
  if (samples.size() % dim != 0) throw std::invalid_argument("SplitSamples: ragged sample array");
  const long total = static_cast<long>(samples.size()) / dim;
  if (total < 3) throw std::invalid_argument("SplitSamples: fewer than 3 samples");
  SplitSamples s;
  s.dim = dim;
  s.n = total / 3;
  const std::size_t block = static_cast<std::size_t>(s.n) * dim;
  s.part1 = samples.subspan(0, block);
  s.part2 = samples.subspan(block, block);
  s.part3 = samples.subspan(2 * block, block);
  return s;
}

PointwiseEvaluator::PointwiseEvaluator(const SplitSamples& splits, const EstimatorConfig& config,
                                       const EstimatorParams& params, const PolyApprox& poly)
    : splits_(splits), config_(config), params_(params), poly_(poly) {
  kernel_ = config.kernel == KernelKind::box ? Kernel::box(splits.dim)
                                             : Kernel::triangle_product(splits.dim);
  hd_ = std::pow(params.h, splits.dim);
  box_1d_ = config.kernel == KernelKind::box && splits.dim == 1;
  if (box_1d_) {
    const bool periodic = config.boundary == BoundaryMode::periodic;
    auto sorted = [periodic](std::span<const double> part) {
      std::vector<double> v(part.begin(), part.end());
      if (periodic)
        for (auto& x : v) x -= std::floor(x);
      std::sort(v.begin(), v.end());
      return v;
    };
    sorted1_ = sorted(splits.part1);
    sorted2_ = sorted(splits.part2);
    sorted3_ = sorted(splits.part3);
  }
}

long PointwiseEvaluator::count_box(const std::vector<double>& sorted, double x) const {
  const double r = 0.5 * params_.h;
  auto count_range = [&sorted](double lo, double hi) {
    return std::upper_bound(sorted.begin(), sorted.end(), hi) -
           std::lower_bound(sorted.begin(), sorted.end(), lo);
  };
  if (config_.boundary == BoundaryMode::zero_extension) return count_range(x - r, x + r);
  // Periodic: wrap the window into [0, 1).
  double lo = x - r, hi = x + r;
  lo -= std::floor(lo);
  hi -= std::floor(hi);
  if (lo <= hi) return count_range(lo, hi);
  return count_range(lo, 1.0) + count_range(0.0, hi);
}

double PointwiseEvaluator::kde_split(std::span<const double> part, std::span<const double> x) const {
  return kde(part, splits_.dim, kernel_, params_.h, x, config_.boundary);
}

PointwiseEvaluator::Point PointwiseEvaluator::operator()(std::span<const double> x) const {
  Point out;
  const long n = splits_.n;
  double fhat1;
  if (box_1d_)
    fhat1 = static_cast<double>(count_box(sorted1_, x[0])) / (n * hd_);
  else
    fhat1 = kde_split(splits_.part1, x);

  if (!config_.force_smooth && classify_regime(fhat1, params_.tau_classify) == Regime::NonSmooth) {
    out.regime = Regime::NonSmooth;
    double h1;
    if (box_1d_) {
      h1 = h1_box_fastpath(count_box(sorted2_, x[0]), n, params_.h, splits_.dim, poly_);
    } else if (config_.kernel == KernelKind::box) {
      long z = 0;
      for (long i = 0; i < n; ++i) {
        bool in = true;
        for (int ax = 0; ax < splits_.dim; ++ax) {
          double u = x[ax] - splits_.part2[i * splits_.dim + ax];
          if (config_.boundary == BoundaryMode::periodic) u -= std::floor(u + 0.5);
          if (std::fabs(u) > 0.5 * params_.h) {
            in = false;
            break;
          }
        }
        z += in;
      }
      h1 = h1_box_fastpath(z, n, params_.h, splits_.dim, poly_);
    } else {
      UStatInput input;
      input.max_order = poly_.degree;
      input.values.resize(n);
      std::vector<double> u(splits_.dim);
      for (long i = 0; i < n; ++i) {
        for (int ax = 0; ax < splits_.dim; ++ax) {
          u[ax] = x[ax] - splits_.part2[i * splits_.dim + ax];
          if (config_.boundary == BoundaryMode::periodic) u[ax] -= std::floor(u[ax] + 0.5);
          u[ax] /= params_.h;
        }
        input.values[i] = kernel_.eval(std::span<const double>(u).first(splits_.dim)) / hd_;
      }
      h1 = h1_nonsmooth(input, poly_);
    }
    if (h1 > params_.clip) {
      out.value = params_.clip;
      out.clipped = true;
    } else {
      out.value = h1;  // may be negative; the clip only acts from above
    }
    return out;
  }

  out.regime = Regime::Smooth;
  double fhat2, fhat3, u2;
  if (box_1d_) {
    const long z2 = count_box(sorted2_, x[0]);
    const long z3 = count_box(sorted3_, x[0]);
    fhat2 = static_cast<double>(z2) / (n * hd_);
    fhat3 = static_cast<double>(z3) / (n * hd_);
    u2 = static_cast<double>(z3) * (z3 - 1) / (hd_ * hd_ * n * (n - 1.0));
  } else {
    fhat2 = kde_split(splits_.part2, x);
    fhat3 = kde_split(splits_.part3, x);
    std::vector<double> vals(n);
    std::vector<double> u(splits_.dim);
    for (long i = 0; i < n; ++i) {
      for (int ax = 0; ax < splits_.dim; ++ax) {
        u[ax] = x[ax] - splits_.part3[i * splits_.dim + ax];
        if (config_.boundary == BoundaryMode::periodic) u[ax] -= std::floor(u[ax] + 0.5);
        u[ax] /= params_.h;
      }
      vals[i] = kernel_.eval(std::span<const double>(u).first(splits_.dim)) / hd_;
    }
    u2 = second_order_u(vals);
  }
  out.value = h2_smooth(fhat2, fhat3, u2, params_.tau_h2);
  return out;
}

namespace {

struct IntegrationPass {
  double integral = 0.0;
  double nonsmooth_fraction = 0.0;
  long clip_activations = 0;
  double tv_error_estimate = 0.0;
};

IntegrationPass integrate_pointwise(const SplitSamples& splits, const EstimatorConfig& config,
                                    const EstimatorParams& params, const PolyApprox& poly,
                                    int multiplier, int override_threads) {
  const int d = splits.dim;
  Box domain;
  if (config.boundary == BoundaryMode::periodic) {
    domain = Box::unit_cube(d);
  } else {
    const Kernel kern = config.kernel == KernelKind::box ? Kernel::box(d) : Kernel::triangle_product(d);
    const double pad = params.h * kern.support_radius;
    domain.lo.assign(d, -pad);
    domain.hi.assign(d, 1.0 + pad);
  }
  std::vector<int> cells(d);
  for (int ax = 0; ax < d; ++ax) {
    const double extent = domain.hi[ax] - domain.lo[ax];
    // epsilon guard keeps the pitch at h/multiplier when the ratio is integral
    cells[ax] = std::max(1, static_cast<int>(std::ceil(extent * multiplier / params.h - 1e-9)));
  }
  MidpointGrid grid(domain, cells);
  const std::int64_t total = grid.cell_count();

  PointwiseEvaluator eval(splits, config, params, poly);
  std::vector<double> values(total);
  std::vector<unsigned char> nonsmooth(total, 0), clipped(total, 0);
  parallel_for(
      total,
      [&](std::int64_t i) {
        thread_local std::vector<double> x;
        x.resize(d);
        grid.midpoint(i, x);
        const auto pt = eval(std::span<const double>(x));
        values[i] = pt.value;
        nonsmooth[i] = pt.regime == Regime::NonSmooth;
        clipped[i] = pt.clipped;
      },
      override_threads);

  IntegrationPass out;
  out.integral = pairwise_sum(values) * grid.cell_volume();
  long ns = 0, cl = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    ns += nonsmooth[i];
    cl += clipped[i];
  }
  out.nonsmooth_fraction = static_cast<double>(ns) / static_cast<double>(total);
  out.clip_activations = cl;

  // Riemann-sum error proxy for the piecewise-constant (box) map: half the
  // total variation across adjacent cells times the cell volume.
  double tv = 0.0;
  std::int64_t stride = 1;
  for (int ax = 0; ax < d; ++ax) {
    for (std::int64_t i = 0; i < total; ++i) {
      const std::int64_t along = (i / stride) % cells[ax];
      if (along + 1 < cells[ax]) tv += std::fabs(values[i + stride] - values[i]);
    }
    stride *= cells[ax];
  }
  out.tv_error_estimate = 0.5 * tv * grid.cell_volume();
  return out;
}

}  // namespace

EstimateResult estimate_entropy(std::span<const double> samples, int dim,
                                const EstimatorConfig& config, int override_threads) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("estimate_entropy: non-finite coordinate");
  const SplitSamples splits = SplitSamples::from_flat(samples, dim);
  if (config.boundary == BoundaryMode::zero_extension) {
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i] < 0.0 || samples[i] > 1.0)
        throw std::invalid_argument("estimate_entropy: sample outside [0,1]^d in zero-extension mode");
  }

  EstimateResult res;
  const EstimatorParams params = select_parameters(config, splits.n);
  if (params.h_capped) res.warnings.push_back("bandwidth >= 1 for this n; capped at 0.5");
  res.h = params.h;
  res.k = params.k;

  const PolyApprox poly = remez_minimax(params.delta, params.k);

  const IntegrationPass fine =
      integrate_pointwise(splits, config, params, poly, config.resolution_multiplier, override_threads);
  res.entropy = fine.integral;
  res.nonsmooth_fraction = fine.nonsmooth_fraction;
  res.clip_activations = fine.clip_activations;
  if (config.kernel == KernelKind::box) {
    res.quadrature_error_estimate = fine.tv_error_estimate;
  } else {
    // Midpoint quadrature: difference against a half-resolution pass.
    const int coarse_mult = std::max(1, config.resolution_multiplier / 2);
    const IntegrationPass coarse =
        integrate_pointwise(splits, config, params, poly, coarse_mult, override_threads);
    res.quadrature_error_estimate = std::fabs(fine.integral - coarse.integral);
  }
  res.negative_density_free = true;  // both shipped kernels are nonnegative
  res.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

double OrliczTail::kappa() const { return std::pow(2.0, 1.0 / q); }

double OrliczTail::effective_c0() const {
  if (c0 > 0.0) return c0;
  const double k = kappa();
  return k * k * k;
}

double OrliczTail::psi(double u) const { return std::expm1(std::pow(u, q)); }

double OrliczTail::psi_inv(double y) const { return std::pow(std::log1p(y), 1.0 / q); }

void OrliczTail::validate() const {
  if (!(q >= 1.0)) throw std::invalid_argument("OrliczTail: q must be >= 1");
  if (psi(0.0) != 0.0) throw std::invalid_argument("OrliczTail: Psi(0) must be 0");
  const double k = kappa();
  // ln Psi(u) = ln(exp(u^q) - 1), stable for large arguments.
  auto log_psi = [this](double u) {
    const double v = std::pow(u, q);
    return v > 30.0 ? v + std::log1p(-std::exp(-v)) : std::log(std::expm1(v));
  };
  double prev = 0.0;
  double prev_diff = 0.0;
  for (int i = 1; i <= 64; ++i) {
    const double u = 0.125 * i;
    const double v = psi(u);
    if (!(v > prev)) throw std::invalid_argument("OrliczTail: Psi must be increasing");
    const double diff = v - prev;
    if (i > 1 && diff + 1e-12 < prev_diff)
      throw std::invalid_argument("OrliczTail: Psi must be convex");
    // rapid growth Psi(ku) >= Psi(u)^2, compared in log space
    if (log_psi(k * u) < 2.0 * log_psi(u) - 1e-9 * (1.0 + std::fabs(log_psi(u))))
      throw std::invalid_argument("OrliczTail: rapid growth Psi(ku) >= Psi(u)^2 fails");
    prev = v;
    prev_diff = diff;
  }
}

EstimateResult estimate_entropy_unbounded(std::span<const double> samples, int dim,
                                          const EstimatorConfig& config, const OrliczTail& tail,
                                          int override_threads) {
  tail.validate();
  if (dim < 1 || samples.size() % dim != 0)
    throw std::invalid_argument("estimate_entropy_unbounded: ragged sample array");
  const long total = static_cast<long>(samples.size()) / dim;
  if (total < 3) throw std::invalid_argument("estimate_entropy_unbounded: fewer than 3 samples");
  const long n = total / 3;
  const double R = tail.effective_c0() * tail.psi_inv(static_cast<double>(n));

  std::vector<double> mapped;
  mapped.reserve(samples.size());
  long truncated = 0;
  for (long i = 0; i < total; ++i) {
    bool keep = true;
    for (int ax = 0; ax < dim; ++ax)
      if (std::fabs(samples[i * dim + ax]) > R) keep = false;
    if (!keep) {
      ++truncated;
      continue;
    }
    for (int ax = 0; ax < dim; ++ax) mapped.push_back((samples[i * dim + ax] + R) / (2.0 * R));
  }
  const long kept = total - truncated;
  if (kept < 3) throw std::invalid_argument("estimate_entropy_unbounded: all samples truncated");
  const long n_run = kept / 3;
  mapped.resize(static_cast<std::size_t>(3 * n_run) * dim);

  EstimatorConfig cfg = config;
  const double lnn = std::log(static_cast<double>(n_run));
  const double s = config.cls.s;
  const double h_orig = config.c0 * std::pow(n_run * lnn, -1.0 / (s + dim)) *
                        std::pow(R, dim / (config.cls.p * (s + dim)));
  cfg.bandwidth_override = h_orig / (2.0 * R);
  cfg.boundary = BoundaryMode::zero_extension;

  EstimateResult res = estimate_entropy(mapped, dim, cfg, override_threads);
  res.entropy += dim * std::log(2.0 * R);
  res.truncated_samples = truncated;
  if (truncated > 0.05 * total)
    res.warnings.push_back("more than 5% of samples truncated; tail assumption likely violated");
  return res;
}

}  // namespace entroscope
