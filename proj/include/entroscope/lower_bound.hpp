#pragma once

#include <cstdint>
#include <vector>

#include "entroscope/densities.hpp"

namespace entroscope {

//! Two discrete measures with matched moments, their zero-atom tilts, and
//! the dilated pair whose entropy-functional gap is Delta.
struct MomentMatchedPriors {
  int q = 1;      // negative-power order
  int k = 1;      // matched polynomial degree
  double eta = 0.1;
  std::vector<double> grid;  // support points in [eta, 1] (log-spaced)
  std::vector<double> nu0, nu1;        // LP-optimal weights on the grid
  std::vector<double> mu0_w, mu1_w;    // tilted grid weights
  double atom0 = 0.0, atom1 = 0.0;     // tilted mass at zero
  double dilation = 1.0;               // support scale (d3 ln n / n)
  double lp_objective = 0.0;           // phi_q gap between nu1 and nu0
  double delta = 0.0;                  // int t ln t d(mu1 - mu0), dilated
  std::vector<double> tilted_moment_residuals;  // l = 0..q+k
  double tilted_q_moment0 = 0.0, tilted_q_moment1 = 0.0;  // should equal eta^q

  //! Moments of the dilated measures.
  double moment(int which, double power) const;
};

//! Solves the discretized moment-matching linear program (objective: the
//! phi_q(t) = t^{1-q} ln t gap), applies the (eta/t)^q zero-atom tilt, and
//! dilates the support by `dilation`.
//! Throws on LP infeasibility (solver bug by construction) and on
//! non-positive objective (grid too coarse).
MomentMatchedPriors build_priors(int q, int k, double eta, int grid_m, double dilation);

//! Delta = int t ln t dmu1 - int t ln t dmu0 (exact weighted sum).
double entropy_gap(const MomentMatchedPriors& priors);

//! Total variation between the mixed Poisson laws gamma_i = int Poi(n t)
//! dmu_i(t): half the l1 distance of the pmfs on {0..cutoff} plus tail mass.
//! cutoff <= 0 selects a cutoff with tail mass below 1e-12.
double poisson_mixture_tv(const MomentMatchedPriors& priors, double n, long cutoff = 0);

struct MembershipReport {
  int draws = 0;
  double pass_rate_moment = 0.0;  // (1/S) sum p_i^p <= (2 C1/(n ln n))^p
  double pass_rate_mass = 0.0;    // |sum(p_i - alpha)| <= mass threshold
  double pass_rate_both = 0.0;
  double c1 = 0.0;
  double alpha = 0.0;
  double moment_threshold = 0.0;
  double mass_threshold = 0.0;
};

//! Draws P ~ mu_i x S and reports empirical pass rates of the
//! class-membership conditions for the bump-mixture construction.
MembershipReport lipschitz_membership_check(const MomentMatchedPriors& priors,
                                            const LipschitzSpec& spec, int S, double h, double n,
                                            int draws, std::uint64_t seed);

struct TwoPointReport {
  double amplification = 1.0;  // dilation factor A
  double epsilon = 0.0;
  double chi_sq = 0.0;
  double chi_sq_bound = 0.0;  // epsilon^2
  double entropy_f0 = 0.0;
  double entropy_f1 = 0.0;
  double separation = 0.0;
  bool chi_sq_ok = false;
};

//! Parametric-rate demonstration: a fixed floor-bounded density, its
//! A-dilation, and the eps-mixtures; chi^2 and entropy separation by
//! quadrature.  eps_override/a_override < 0 select the defaults
//! eps = 1/sqrt(n), A = min(L^{1/(s+d)}, n^{1/(4d)}).
TwoPointReport two_point_demo(double L, double n, double s = 1.0, double eps_override = -1.0,
                              double a_override = -1.0);

}  // namespace entroscope
