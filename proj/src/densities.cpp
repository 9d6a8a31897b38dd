#include "entroscope/densities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "entroscope/special.hpp"

namespace entroscope {

void LipschitzSpec::validate() const {
  if (!(s > 0.0)) throw std::invalid_argument("LipschitzSpec: s must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("LipschitzSpec: p must be >= 1");
  if (d < 1) throw std::invalid_argument("LipschitzSpec: d must be >= 1");
  if (!(L > 0.0)) throw std::invalid_argument("LipschitzSpec: L must be positive");
}

namespace quartic {

double pdf(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return 30.0 * w * w;
}

double cdf(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double cdf_inv(double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0, u = 0.5;
  for (int it = 0; it < 100; ++it) {
    const double f = cdf(u) - p;
    if (f > 0.0)
      hi = u;
    else
      lo = u;
    const double d = pdf(u);
    double nu = u - f / (d > 1e-12 ? d : 1e-12);
    if (!(nu > lo) || !(nu < hi)) nu = 0.5 * (lo + hi);
    if (std::fabs(nu - u) < 1e-15) return nu;
    u = nu;
  }
  return u;
}

double entropy() {
  // -int 30u^2(1-u)^2 ln(30u^2(1-u)^2) du = -(ln 30 + 120 * int u^2(1-u)^2 ln u)
  // with int (u^2 - 2u^3 + u^4) ln u du = -(1/9 - 1/8 + 1/25).
  return -(std::log(30.0) - 120.0 * (1.0 / 9.0 - 1.0 / 8.0 + 1.0 / 25.0));
}

}  // namespace quartic

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// 1-d frame background: half-weight quartic bumps rescaled onto [0,1/4] and
// [3/4,1].  Entropy H(e) = H(quartic) - ln 2.
double edge_pdf(double u) {
  if (u < 0.25) return 2.0 * quartic::pdf(4.0 * u);
  if (u > 0.75) return 2.0 * quartic::pdf(4.0 * (u - 0.75));
  return 0.0;
}

double edge_cdf(double u) {
  if (u <= 0.0) return 0.0;
  if (u < 0.25) return 0.5 * quartic::cdf(4.0 * u);
  if (u <= 0.75) return 0.5;
  return 0.5 + 0.5 * quartic::cdf(4.0 * (u - 0.75));
}

double edge_cdf_inv(double p) {
  if (p < 0.5) return 0.25 * quartic::cdf_inv(2.0 * p);
  return 0.75 + 0.25 * quartic::cdf_inv(2.0 * (p - 0.5));
}

std::string format_g(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

DensityModel make_uniform(const UniformCubeSpec& s) {
  if (s.d < 1) throw std::invalid_argument("uniform_cube: d must be >= 1");
  DensityModel m;
  m.dim = s.d;
  m.id = "uniform_cube(" + std::to_string(s.d) + ")";
  m.support = SupportKind::unit_cube;
  m.box = Box::unit_cube(s.d);
  m.pdf = [d = s.d](std::span<const double> x) {
    for (int i = 0; i < d; ++i)
      if (x[i] < 0.0 || x[i] > 1.0) return 0.0;
    return 1.0;
  };
  m.box_mass = [d = s.d](const Box& b) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= std::max(0.0, clamp01(b.hi[i]) - clamp01(b.lo[i]));
    return v;
  };
  m.gradient = [](std::span<const double>, std::span<double> g) {
    for (auto& v : g) v = 0.0;
  };
  m.second_derivs = [](std::span<const double>, std::span<double> g) {
    for (auto& v : g) v = 0.0;
  };
  m.sampler = [d = s.d](Rng& rng, std::span<double> out) {
    for (int i = 0; i < d; ++i) out[i] = rng.uniform01();
  };
  m.entropy_truth = 0.0;
  m.provenance = EntropyProvenance::closed_form;
  m.sup_norm = 1.0;
  m.declared_class = LipschitzSpec{2.0, 2.0, s.d, 2.0};
  return m;
}

DensityModel make_beta(const BetaProductSpec& s) {
  if (!(s.alpha > 0.0) || !(s.beta > 0.0))
    throw std::invalid_argument("beta_product: shape parameters must be positive");
  if (s.d < 1) throw std::invalid_argument("beta_product: d must be >= 1");
  DensityModel m;
  m.dim = s.d;
  m.id = "beta_product(" + format_g(s.alpha) + "," + format_g(s.beta) + "," + std::to_string(s.d) + ")";
  m.support = SupportKind::unit_cube;
  m.box = Box::unit_cube(s.d);
  const double a = s.alpha, b = s.beta;
  const double lnorm = -lbeta(a, b);
  auto axis_pdf = [a, b, lnorm](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp(lnorm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
  };
  m.pdf = [axis_pdf, d = s.d](std::span<const double> x) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= axis_pdf(x[i]);
    return v;
  };
  m.box_mass = [a, b, d = s.d](const Box& bx) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) {
      const double lo = clamp01(bx.lo[i]), hi = clamp01(bx.hi[i]);
      v *= hi > lo ? beta_inc(a, b, hi) - beta_inc(a, b, lo) : 0.0;
    }
    return v;
  };
  if (a == 2.0 && b == 2.0) {
    // 6x(1-x) per axis: analytic derivatives used by the oracle probes.
    m.gradient = [d = s.d](std::span<const double> x, std::span<double> g) {
      for (int i = 0; i < d; ++i) {
        double v = 6.0 - 12.0 * x[i];
        for (int j = 0; j < d; ++j)
          if (j != i) v *= 6.0 * x[j] * (1.0 - x[j]);
        g[i] = v;
      }
    };
    m.second_derivs = [d = s.d](std::span<const double> x, std::span<double> g) {
      for (int i = 0; i < d; ++i) {
        double v = -12.0;
        for (int j = 0; j < d; ++j)
          if (j != i) v *= 6.0 * x[j] * (1.0 - x[j]);
        g[i] = v;
      }
    };
  }
  m.sampler = [a, b, d = s.d](Rng& rng, std::span<double> out) {
    for (int i = 0; i < d; ++i) out[i] = beta_inc_inv(a, b, rng.uniform01());
  };
  m.entropy_truth = s.d * beta_entropy(a, b);
  m.provenance = EntropyProvenance::closed_form;
  const double mode = (a > 1.0 && b > 1.0 && a + b > 2.0) ? (a - 1.0) / (a + b - 2.0) : 0.5;
  m.sup_norm = std::pow(std::max(axis_pdf(mode), 1.0), s.d);
  m.declared_class = LipschitzSpec{2.0, 2.0, s.d, 16.0};
  return m;
}

DensityModel make_cosine(const CosineBumpSpec& s) {
  if (!(s.amplitude < 1.0) || !(s.amplitude >= 0.0))
    throw std::invalid_argument("cosine_bump: amplitude must lie in [0, 1)");
  if (s.d < 1) throw std::invalid_argument("cosine_bump: d must be >= 1");
  DensityModel m;
  const double a = s.amplitude;
  m.dim = s.d;
  m.id = "cosine_bump(" + format_g(a) + "," + std::to_string(s.d) + ")";
  m.support = SupportKind::unit_cube;
  m.box = Box::unit_cube(s.d);
  auto axis_pdf = [a](double x) { return 1.0 + a * std::cos(kTwoPi * x); };
  m.pdf = [axis_pdf, d = s.d](std::span<const double> x) {
    for (int i = 0; i < d; ++i)
      if (x[i] < 0.0 || x[i] > 1.0) return 0.0;
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= axis_pdf(x[i]);
    return v;
  };
  auto axis_cdf = [a](double x) { return x + a * std::sin(kTwoPi * x) / kTwoPi; };
  m.box_mass = [axis_cdf, d = s.d](const Box& bx) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) {
      const double lo = clamp01(bx.lo[i]), hi = clamp01(bx.hi[i]);
      v *= hi > lo ? axis_cdf(hi) - axis_cdf(lo) : 0.0;
    }
    return v;
  };
  m.gradient = [a, axis_pdf, d = s.d](std::span<const double> x, std::span<double> g) {
    for (int i = 0; i < d; ++i) {
      double v = -a * kTwoPi * std::sin(kTwoPi * x[i]);
      for (int j = 0; j < d; ++j)
        if (j != i) v *= axis_pdf(x[j]);
      g[i] = v;
    }
  };
  m.second_derivs = [a, axis_pdf, d = s.d](std::span<const double> x, std::span<double> g) {
    for (int i = 0; i < d; ++i) {
      double v = -a * kTwoPi * kTwoPi * std::cos(kTwoPi * x[i]);
      for (int j = 0; j < d; ++j)
        if (j != i) v *= axis_pdf(x[j]);
      g[i] = v;
    }
  };
  m.sampler = [a, axis_cdf, axis_pdf, d = s.d](Rng& rng, std::span<double> out) {
    for (int i = 0; i < d; ++i) {
      const double p = rng.uniform01();
      double lo = 0.0, hi = 1.0, x = p;
      for (int it = 0; it < 60; ++it) {
        const double f = axis_cdf(x) - p;
        if (f > 0.0)
          hi = x;
        else
          lo = x;
        double nx = x - f / axis_pdf(x);  // derivative >= 1 - a > 0
        if (!(nx > lo) || !(nx < hi)) nx = 0.5 * (lo + hi);
        if (std::fabs(nx - x) < 1e-15) break;
        x = nx;
      }
      out[i] = x;
    }
  };
  const double sq = std::sqrt(1.0 - a * a);
  m.entropy_truth = s.d * (-std::log((1.0 + sq) / 2.0) - (1.0 - sq));
  m.provenance = EntropyProvenance::closed_form;
  m.sup_norm = std::pow(1.0 + a, s.d);
  m.declared_class = LipschitzSpec{2.0, 2.0, s.d, 4.0 * kTwoPi * kTwoPi};
  return m;
}

struct BumpLayout {
  int cells_per_axis;  // sub-cubes per axis inside [1/4, 3/4]
  double edge;
  int d;

  // Leftmost corner of sub-cube i (row-major across axes).
  void corner(int i, std::span<double> out) const {
    for (int ax = 0; ax < d; ++ax) {
      out[ax] = 0.25 + edge * (i % cells_per_axis);
      i /= cells_per_axis;
    }
  }
};

DensityModel make_bump_mixture(const BumpMixtureSpec& s) {
  if (s.d < 1) throw std::invalid_argument("bump_mixture: d must be >= 1");
  if (!(s.edge > 0.0) || s.edge > 0.5) throw std::invalid_argument("bump_mixture: edge must lie in (0, 1/2]");
  const double per_axis_f = 0.5 / s.edge;
  const int per_axis = static_cast<int>(std::lround(per_axis_f));
  if (std::fabs(per_axis_f - per_axis) > 1e-9)
    throw std::invalid_argument("bump_mixture: edge must tile [1/4,3/4] exactly");
  std::int64_t cells = 1;
  for (int i = 0; i < s.d; ++i) cells *= per_axis;
  if (static_cast<std::int64_t>(s.weights.size()) != cells)
    throw std::invalid_argument("bump_mixture: weight count must equal sub-cube count");
  double total = 0.0;
  for (double w : s.weights) {
    if (w < 0.0) throw std::invalid_argument("bump_mixture: weights must be nonnegative");
    total += w;
  }
  if (total > 1.0 + 1e-12)
    throw std::invalid_argument("bump_mixture: total bump mass exceeds 1");

  const BumpLayout layout{per_axis, s.edge, s.d};
  const double background = 1.0 - total;

  DensityModel m;
  m.dim = s.d;
  {
    std::ostringstream os;
    os << "bump_mixture(edge=" << s.edge << ",S=" << cells << ",mass=" << total << ")";
    m.id = os.str();
  }
  m.support = SupportKind::unit_cube;
  m.box = Box::unit_cube(s.d);

  auto weights = s.weights;
  const double edge = s.edge;
  const int d = s.d;

  auto background_pdf = [d](std::span<const double> x) {
    double v = edge_pdf(x[0]);
    for (int i = 1; i < d; ++i) v *= quartic::pdf(x[i]);
    return v;
  };

  m.pdf = [weights, layout, edge, d, background, background_pdf](std::span<const double> x) {
    double v = background > 0.0 ? background * background_pdf(x) : 0.0;
    // locate the sub-cube, if x is inside the inner cube
    bool inner = true;
    std::int64_t idx = 0;
    std::int64_t stride = 1;
    for (int ax = 0; ax < d; ++ax) {
      const double rel = (x[ax] - 0.25) / edge;
      if (rel < 0.0 || rel >= layout.cells_per_axis) {
        inner = false;
        break;
      }
      idx += stride * static_cast<std::int64_t>(rel);
      stride *= layout.cells_per_axis;
    }
    if (inner) {
      const double w = weights[idx];
      if (w > 0.0) {
        std::vector<double> corner(d);
        layout.corner(static_cast<int>(idx), corner);
        double bump = 1.0;
        for (int ax = 0; ax < d; ++ax) bump *= quartic::pdf((x[ax] - corner[ax]) / edge);
        v += w * bump / std::pow(edge, d);
      }
    }
    return v;
  };

  m.box_mass = [weights, layout, edge, d, background](const Box& bx) {
    double v = 0.0;
    if (background > 0.0) {
      double bg = std::max(0.0, edge_cdf(clamp01(bx.hi[0])) - edge_cdf(clamp01(bx.lo[0])));
      for (int i = 1; i < d; ++i)
        bg *= std::max(0.0, quartic::cdf(clamp01(bx.hi[i])) - quartic::cdf(clamp01(bx.lo[i])));
      v += background * bg;
    }
    std::vector<double> corner(d);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      layout.corner(static_cast<int>(i), corner);
      double cell = 1.0;
      for (int ax = 0; ax < d && cell > 0.0; ++ax) {
        const double lo = std::max(0.0, (bx.lo[ax] - corner[ax]) / edge);
        const double hi = std::min(1.0, (bx.hi[ax] - corner[ax]) / edge);
        cell *= hi > lo ? quartic::cdf(hi) - quartic::cdf(lo) : 0.0;
      }
      v += weights[i] * cell;
    }
    return v;
  };

  m.sampler = [weights, layout, edge, d, total, background](Rng& rng, std::span<double> out) {
    double u = rng.uniform01();
    if (u < total) {
      std::size_t i = 0;
      double acc = 0.0;
      for (; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) break;
      }
      std::vector<double> corner(d);
      layout.corner(static_cast<int>(i), corner);
      for (int ax = 0; ax < d; ++ax) out[ax] = corner[ax] + edge * quartic::cdf_inv(rng.uniform01());
    } else {
      out[0] = edge_cdf_inv(rng.uniform01());
      for (int ax = 1; ax < d; ++ax) out[ax] = quartic::cdf_inv(rng.uniform01());
    }
  };

  m.entropy_truth = bump_mixture_entropy(s);
  m.provenance = EntropyProvenance::closed_form;
  double peak = 0.0;
  for (double w : weights) peak = std::max(peak, w);
  const double bump_peak = std::pow(1.875 / edge, d);  // quartic peak 30/16
  m.sup_norm = std::max(background * 3.75 * std::pow(1.875, d - 1), peak * bump_peak) + 1e-12;
  m.declared_class = LipschitzSpec{1.0, 2.0, s.d, 1.0};
  return m;
}

}  // namespace

double bump_mixture_entropy(const BumpMixtureSpec& spec) {
  double total = 0.0, hp = 0.0;
  for (double w : spec.weights) {
    total += w;
    hp -= xlogx(w);
  }
  const double hg = spec.d * quartic::entropy();
  const double background = 1.0 - total;
  // Disjoint supports: bumps tile the inner cube, the background lives on the
  // frame, so the mixture entropy decomposes exactly.
  double c0 = 0.0;
  if (background > 0.0) {
    const double hw = (quartic::entropy() - std::log(2.0)) + (spec.d - 1) * quartic::entropy();
    c0 = background * hw - xlogx(background);
  }
  return c0 + hp + (hg + spec.d * std::log(spec.edge)) * total;
}

DensityModel make_density(const DensitySpec& spec) {
  return std::visit(
      [](const auto& s) -> DensityModel {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, UniformCubeSpec>) return make_uniform(s);
        if constexpr (std::is_same_v<T, BetaProductSpec>) return make_beta(s);
        if constexpr (std::is_same_v<T, CosineBumpSpec>) return make_cosine(s);
        if constexpr (std::is_same_v<T, BumpMixtureSpec>) return make_bump_mixture(s);
      },
      spec);
}

std::vector<double> sample(const DensityModel& density, std::size_t n, Rng& rng) {
  const int d = density.dim;
  std::vector<double> out(n * d);
  if (density.sampler) {
    for (std::size_t i = 0; i < n; ++i)
      density.sampler(rng, std::span<double>(out.data() + i * d, d));
    return out;
  }
  // Rejection sampling against a uniform envelope over the support box.
  std::vector<double> x(d);
  std::size_t accepted = 0, proposed = 0;
  while (accepted < n) {
    for (int i = 0; i < d; ++i)
      x[i] = density.box.lo[i] + (density.box.hi[i] - density.box.lo[i]) * rng.uniform01();
    ++proposed;
    if (rng.uniform01() * density.sup_norm <= density.pdf(x)) {
      std::copy(x.begin(), x.end(), out.begin() + accepted * d);
      ++accepted;
    }
    if (proposed >= 10000 && static_cast<double>(accepted) / proposed < 1e-4)
      throw std::runtime_error("sample: rejection acceptance rate below 1e-4 (envelope " +
                               std::to_string(density.sup_norm) + ", " + std::to_string(accepted) +
                               "/" + std::to_string(proposed) + " accepted)");
  }
  return out;
}

}  // namespace entroscope
