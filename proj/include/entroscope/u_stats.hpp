#pragma once

#include <span>
#include <vector>

#include "entroscope/poly_approx.hpp"

namespace entroscope {

//! Kernel values K_h(x - X_j) at one evaluation point, with the maximum
//! U-statistic order.
struct UStatInput {
  std::vector<double> values;
  int max_order = 1;
};

//! Power sums p_l = sum_i v_i^l for l = 1..k (compensated summation).
std::vector<double> power_sums(std::span<const double> values, int k);

//! Elementary symmetric polynomials e_0..e_k from power sums via Newton's
//! identity l e_l = sum_{i=1..l} (-1)^{i-1} e_{l-i} p_i.
std::vector<double> elementary_symmetric(std::span<const double> power_sums);

//! Order-l U-statistic e_l / C(n, l); unbiased for (E v)^l under iid values.
double u_statistic(const UStatInput& input, int l);

//! Unbiased estimator of Q(f_h(x)): sum_l a_l U_l, accumulated in the
//! delta-scaled basis sum_l b_l (U_l / delta^l) to avoid overflow.
double h1_nonsmooth(const UStatInput& input, const PolyApprox& poly);

//! Box-kernel fast path: U_l reduces to falling factorials of the in-window
//! count Z_x.  Equals h1_nonsmooth on the same data to ~1e-9 relative.
double h1_box_fastpath(long z_count, long n, double h, int d, const PolyApprox& poly);

//! (2 / (n(n-1))) sum_{i<j} v_i v_j = (p1^2 - p2) / (n(n-1)).
double second_order_u(std::span<const double> values);

}  // namespace entroscope
