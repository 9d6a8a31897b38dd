#pragma once

#include <string>
#include <vector>

namespace entroscope {

//! Best uniform polynomial approximation of phi(t) = -t ln t on [0, delta],
//! certified by Chebyshev equioscillation.
//!
//! Coefficients are stored in the rescaled variable u = t/delta:
//! Q(t) = sum_l b[l] (t/delta)^l.  The unscaled coefficients a_l = b_l /
//! delta^l grow like delta^{1-l} and are exposed only for diagnostics.
struct PolyApprox {
  double delta = 1.0;
  int degree = 0;
  std::vector<double> b;     // monomial coefficients in u = t/delta
  std::vector<double> cheb;  // shifted-Chebyshev coefficients (certified form)
  double sup_error = 0.0;
  std::vector<double> alternation_points;  // k+2 points in [0, delta]
  std::vector<double> alternation_errors;  // signed phi - Q at those points
  double dvp_lower_bound = 0.0;            // de la Vallee-Poussin bound
  int iterations = 0;

  //! Unscaled coefficient a_l = b_l / delta^l.
  double a(int l) const;

  //! Certified evaluation of Q(t) (Clenshaw on the Chebyshev form).
  double value(double t) const;
};

//! Remez exchange on the rescaled problem.  Converges when successive
//! sup-error estimates agree within relative 1e-10 (at most 100 iterations);
//! throws std::runtime_error with an iteration trace otherwise.
PolyApprox remez_minimax(double delta, int degree);

//! Horner evaluation in the scaled variable using b; certified for
//! t in [0, delta], permitted (uncertified) outside.
double eval_poly(const PolyApprox& poly, double t);

//! Coefficient table as CSV (l, b_l, a_l) for caching.
std::string poly_coefficients_csv(const PolyApprox& poly);

}  // namespace entroscope
