#include "entroscope/u_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace entroscope {

std::vector<double> power_sums(std::span<const double> values, int k) {
  if (k < 0) throw std::invalid_argument("power_sums: order must be nonnegative");
  std::vector<double> p(k, 0.0);
  std::vector<double> comp(k, 0.0);  // Kahan compensation per order
  for (double v : values) {
    double pw = 1.0;
    for (int l = 0; l < k; ++l) {
      pw *= v;
      const double y = pw - comp[l];
      const double t = p[l] + y;
      comp[l] = (t - p[l]) - y;
      p[l] = t;
    }
  }
  return p;
}

std::vector<double> elementary_symmetric(std::span<const double> power_sums) {
  const int k = static_cast<int>(power_sums.size());
  std::vector<double> e(k + 1);
  e[0] = 1.0;
  for (int l = 1; l <= k; ++l) {
    double acc = 0.0;
    double sign = 1.0;
    for (int i = 1; i <= l; ++i) {
      acc += sign * e[l - i] * power_sums[i - 1];
      sign = -sign;
    }
    e[l] = acc / l;
  }
  return e;
}

namespace {

double binomial(long n, int l) {
  double r = 1.0;
  for (int i = 0; i < l; ++i) r *= static_cast<double>(n - i) / (i + 1);
  return r;
}

}  // namespace

double u_statistic(const UStatInput& input, int l) {
  const long n = static_cast<long>(input.values.size());
  if (l < 0 || l > n) throw std::invalid_argument("u_statistic: order must satisfy 0 <= l <= n");
  if (l == 0) return 1.0;
  const auto p = power_sums(input.values, l);
  const auto e = elementary_symmetric(p);
  return e[l] / binomial(n, l);
}

double h1_nonsmooth(const UStatInput& input, const PolyApprox& poly) {
  const int k = poly.degree;
  const long n = static_cast<long>(input.values.size());
  if (k > n) throw std::invalid_argument("h1_nonsmooth: poly degree exceeds sample count");
  // Scale values by 1/delta so that e_l(values/delta) = e_l(values)/delta^l.
  std::vector<double> scaled(input.values.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = input.values[i] / poly.delta;
  const auto p = power_sums(scaled, k);
  const auto e = elementary_symmetric(p);
  double acc = poly.b[0];
  for (int l = 1; l <= k; ++l) acc += poly.b[l] * (e[l] / binomial(n, l));
  return acc;
}

double h1_box_fastpath(long z_count, long n, double h, int d, const PolyApprox& poly) {
  if (z_count > n) throw std::invalid_argument("h1_box_fastpath: count exceeds sample size");
  if (z_count < 0) throw std::invalid_argument("h1_box_fastpath: negative count");
  const double hd = std::pow(h, d);
  double acc = poly.b[0];
  double term = 1.0;
  const int kmax = static_cast<int>(std::min<long>(poly.degree, z_count));
  for (int l = 1; l <= kmax; ++l) {
    // term_l = falling(Z, l) / (falling(n, l) (delta h^d)^l)
    term *= static_cast<double>(z_count - l + 1) /
            (static_cast<double>(n - l + 1) * poly.delta * hd);
    acc += poly.b[l] * term;
  }
  return acc;
}

double second_order_u(std::span<const double> values) {
  const long n = static_cast<long>(values.size());
  if (n < 2) throw std::invalid_argument("second_order_u: need at least two values");
  const auto p = power_sums(values, 2);
  return (p[0] * p[0] - p[1]) / (static_cast<double>(n) * (n - 1));
}

}  // namespace entroscope
