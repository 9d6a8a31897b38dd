#include "entroscope/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace entroscope {

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: argument must be positive");
  double result = 0.0;
  // Shift up until the asymptotic series is accurate.
  while (x < 8.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k})
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result;
}

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

namespace {

// Continued fraction for the incomplete beta (Lentz's algorithm).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("beta_inc: continued fraction did not converge");
}

}  // namespace

double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta_inc: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnfront = a * std::log(x) + b * std::log1p(-x) - lbeta(a, b);
  const double front = std::exp(lnfront);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta(a, b)) * beta_cf(b, a, 1.0 - x) / b;
}

double beta_inc_inv(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  double x = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = beta_inc(a, b, x) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    // Newton step, guarded by the bracket.
    const double pdf = std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta(a, b));
    double nx = x - f / (pdf > 1e-300 ? pdf : 1e-300);
    if (!(nx > lo) || !(nx < hi)) nx = 0.5 * (lo + hi);
    if (std::fabs(nx - x) < 1e-15 * (1.0 + std::fabs(x))) return nx;
    x = nx;
  }
  return x;
}

double beta_entropy(double a, double b) {
  return lbeta(a, b) - (a - 1.0) * (digamma(a) - digamma(a + b)) -
         (b - 1.0) * (digamma(b) - digamma(a + b));
}

}  // namespace entroscope
