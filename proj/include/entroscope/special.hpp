#pragma once

#include <cmath>

namespace entroscope {

//! Digamma function, real argument > 0.
double digamma(double x);

//! Regularized incomplete beta function I_x(a, b).
double beta_inc(double a, double b, double x);

//! Inverse of beta_inc in x for fixed (a, b).
double beta_inc_inv(double a, double b, double p);

//! ln Beta(a, b).
double lbeta(double a, double b);

//! Entropy (nats) of a Beta(a, b) density on [0, 1].
double beta_entropy(double a, double b);

//! x ln x with the continuous extension 0 ln 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace entroscope
