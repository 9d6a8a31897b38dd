#include "entroscope/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entroscope/linprog.hpp"
#include "entroscope/rng.hpp"
#include "entroscope/special.hpp"

namespace entroscope {

double MomentMatchedPriors::moment(int which, double power) const {
  const auto& w = which == 0 ? mu0_w : mu1_w;
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    acc += w[j] * std::pow(dilation * grid[j], power);
  // atom at zero contributes nothing for power > 0
  if (power == 0.0) acc += which == 0 ? atom0 : atom1;
  return acc;
}

MomentMatchedPriors build_priors(int q, int k, double eta, int grid_m, double dilation) {
  if (q < 1) throw std::invalid_argument("build_priors: q must be >= 1");
  if (k < 1) throw std::invalid_argument("build_priors: k must be >= 1");
  if (!(eta > 0.0) || !(eta < 1.0)) throw std::invalid_argument("build_priors: eta must lie in (0,1)");
  if (grid_m < 10 * (k + q)) throw std::invalid_argument("build_priors: grid_m must be >= 10(k+q)");
  if (!(dilation > 0.0)) throw std::invalid_argument("build_priors: dilation must be positive");

  MomentMatchedPriors pr;
  pr.q = q;
  pr.k = k;
  pr.eta = eta;
  pr.dilation = dilation;

  // Log-spaced support grid on [eta, 1]: phi_q and the tilt vary fastest
  // near eta.
  pr.grid.resize(grid_m);
  const double lmin = std::log(eta);
  for (int j = 0; j < grid_m; ++j)
    pr.grid[j] = std::exp(lmin * (1.0 - static_cast<double>(j) / (grid_m - 1)));
  pr.grid.front() = eta;
  pr.grid.back() = 1.0;

  // LP variables: [w1 (m), w0 (m)], maximize sum phi_q (w1 - w0).
  LinearProgram lp;
  lp.num_vars = 2 * grid_m;
  lp.objective.resize(2 * grid_m);
  for (int j = 0; j < grid_m; ++j) {
    const double t = pr.grid[j];
    const double phi = std::pow(t, 1.0 - q) * std::log(t);
    lp.objective[j] = phi;
    lp.objective[grid_m + j] = -phi;
  }
  auto mass_row = [&](bool first) {
    LinearProgram::Row r;
    r.coeffs.assign(2 * grid_m, 0.0);
    for (int j = 0; j < grid_m; ++j) r.coeffs[(first ? 0 : grid_m) + j] = 1.0;
    r.rhs = 1.0;
    r.type = 'E';
    return r;
  };
  lp.rows.push_back(mass_row(true));
  lp.rows.push_back(mass_row(false));
  // Moment equalities folded in as paired inequalities at 1e-10 on
  // max-normalized rows.
  constexpr double kPairTol = 1e-10;
  for (int l = -q + 1; l <= k; ++l) {
    if (l == 0) continue;
    std::vector<double> coef(grid_m);
    double scale = 0.0;
    for (int j = 0; j < grid_m; ++j) {
      coef[j] = std::pow(pr.grid[j], l);
      scale = std::max(scale, std::fabs(coef[j]));
    }
    LinearProgram::Row up, dn;
    up.coeffs.assign(2 * grid_m, 0.0);
    dn.coeffs.assign(2 * grid_m, 0.0);
    for (int j = 0; j < grid_m; ++j) {
      const double c = coef[j] / scale;
      up.coeffs[j] = c;
      up.coeffs[grid_m + j] = -c;
      dn.coeffs[j] = -c;
      dn.coeffs[grid_m + j] = c;
    }
    up.rhs = kPairTol;
    up.type = 'L';
    dn.rhs = kPairTol;
    dn.type = 'L';
    lp.rows.push_back(std::move(up));
    lp.rows.push_back(std::move(dn));
  }

  const LpResult res = solve_lp(lp);
  if (res.status == LpResult::Status::infeasible)
    throw std::runtime_error("build_priors: LP infeasible (solver bug: nu0 = nu1 is feasible)");
  if (res.status != LpResult::Status::optimal)
    throw std::runtime_error("build_priors: LP did not reach optimality");
  pr.lp_objective = res.value;
  if (!(pr.lp_objective > 0.0))
    throw std::runtime_error("build_priors: nonpositive objective (grid too coarse)");

  pr.nu1.assign(res.x.begin(), res.x.begin() + grid_m);
  pr.nu0.assign(res.x.begin() + grid_m, res.x.end());

  // Tilt by (eta/t)^q with the remaining mass as an atom at zero.
  pr.mu0_w.resize(grid_m);
  pr.mu1_w.resize(grid_m);
  double s0 = 0.0, s1 = 0.0;
  for (int j = 0; j < grid_m; ++j) {
    const double tilt = std::pow(eta / pr.grid[j], q);
    pr.mu0_w[j] = tilt * pr.nu0[j];
    pr.mu1_w[j] = tilt * pr.nu1[j];
    s0 += pr.mu0_w[j];
    s1 += pr.mu1_w[j];
  }
  pr.atom0 = 1.0 - s0;
  pr.atom1 = 1.0 - s1;

  pr.tilted_moment_residuals.resize(q + k + 1);
  for (int l = 0; l <= q + k; ++l) {
    double m0 = l == 0 ? pr.atom0 : 0.0;
    double m1 = l == 0 ? pr.atom1 : 0.0;
    for (int j = 0; j < grid_m; ++j) {
      const double tl = std::pow(pr.grid[j], l);
      m0 += pr.mu0_w[j] * tl;
      m1 += pr.mu1_w[j] * tl;
    }
    pr.tilted_moment_residuals[l] = std::fabs(m1 - m0);
  }
  pr.tilted_q_moment0 = 0.0;
  pr.tilted_q_moment1 = 0.0;
  for (int j = 0; j < grid_m; ++j) {
    const double tq = std::pow(pr.grid[j], q);
    pr.tilted_q_moment0 += pr.mu0_w[j] * tq;
    pr.tilted_q_moment1 += pr.mu1_w[j] * tq;
  }

  pr.delta = entropy_gap(pr);
  return pr;
}

double entropy_gap(const MomentMatchedPriors& priors) {
  double acc = 0.0;
  for (std::size_t j = 0; j < priors.grid.size(); ++j) {
    const double t = priors.dilation * priors.grid[j];
    acc += (priors.mu1_w[j] - priors.mu0_w[j]) * xlogx(t);
  }
  return acc;
}

double poisson_mixture_tv(const MomentMatchedPriors& priors, double n, long cutoff) {
  const double lam_max = n * priors.dilation;  // grid values are <= 1
  if (cutoff <= 0)
    cutoff = static_cast<long>(std::ceil(lam_max + 14.0 * std::sqrt(lam_max + 1.0) + 40.0));
  std::vector<double> g0(cutoff + 1, 0.0), g1(cutoff + 1, 0.0);
  g0[0] += priors.atom0;
  g1[0] += priors.atom1;
  for (std::size_t j = 0; j < priors.grid.size(); ++j) {
    const double w0 = priors.mu0_w[j], w1 = priors.mu1_w[j];
    if (w0 <= 0.0 && w1 <= 0.0) continue;
    const double lam = n * priors.dilation * priors.grid[j];
    double pmf = std::exp(-lam);
    for (long z = 0; z <= cutoff; ++z) {
      g0[z] += w0 * pmf;
      g1[z] += w1 * pmf;
      pmf *= lam / static_cast<double>(z + 1);
    }
  }
  double l1 = 0.0, tot0 = 0.0, tot1 = 0.0;
  for (long z = 0; z <= cutoff; ++z) {
    l1 += std::fabs(g1[z] - g0[z]);
    tot0 += g0[z];
    tot1 += g1[z];
  }
  const double tail = std::max(0.0, 1.0 - tot0) + std::max(0.0, 1.0 - tot1);
  return 0.5 * l1 + 0.5 * tail;
}

MembershipReport lipschitz_membership_check(const MomentMatchedPriors& priors,
                                            const LipschitzSpec& spec, int S, double h, double n,
                                            int draws, std::uint64_t seed) {
  if (S < 1 || draws < 1) throw std::invalid_argument("lipschitz_membership_check: bad S/draws");
  MembershipReport rep;
  rep.draws = draws;
  rep.alpha = priors.moment(0, 1.0);
  const double qm = priors.moment(0, static_cast<double>(priors.q));
  rep.c1 = n * std::log(n) * std::pow(qm, 1.0 / priors.q);
  rep.moment_threshold = std::pow(2.0 * rep.c1 / (n * std::log(n)), spec.p);
  const double lnL = std::max(std::log(spec.L), 1e-3);
  rep.mass_threshold = 1.0 / (n * std::pow(h, spec.d) * std::pow(std::log(n), 3.0) * lnL);

  // Cumulative sampler over {0} + grid.
  std::vector<double> cum(priors.grid.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < priors.grid.size(); ++j) {
    acc += priors.mu0_w[j];
    cum[j] = acc;
  }
  Rng rng(seed);
  int pass_m = 0, pass_s = 0, pass_b = 0;
  for (int it = 0; it < draws; ++it) {
    double sum_p = 0.0, sum_pp = 0.0;
    for (int i = 0; i < S; ++i) {
      const double u = rng.uniform01();
      double p = 0.0;
      if (u < acc) {
        const auto pos = std::lower_bound(cum.begin(), cum.end(), u);
        p = priors.dilation * priors.grid[pos - cum.begin()];
      }
      sum_p += p;
      sum_pp += std::pow(p, spec.p);
    }
    const bool ok_m = sum_pp / S <= rep.moment_threshold;
    const bool ok_s = std::fabs(sum_p - S * rep.alpha) <= rep.mass_threshold;
    pass_m += ok_m;
    pass_s += ok_s;
    pass_b += ok_m && ok_s;
  }
  rep.pass_rate_moment = static_cast<double>(pass_m) / draws;
  rep.pass_rate_mass = static_cast<double>(pass_s) / draws;
  rep.pass_rate_both = static_cast<double>(pass_b) / draws;
  return rep;
}

namespace {

// Floor-bounded fixture on [1/4, 3/4]: 0.3 uniform + 0.7 quartic bump.
double two_point_f(double x) {
  if (x < 0.25 || x > 0.75) return 0.0;
  return 0.6 + 1.4 * quartic::pdf(2.0 * (x - 0.25));
}

}  // namespace

TwoPointReport two_point_demo(double L, double n, double s, double eps_override,
                              double a_override) {
  if (!(L >= 1.0)) throw std::invalid_argument("two_point_demo: L must be >= 1");
  TwoPointReport rep;
  rep.epsilon = eps_override >= 0.0 ? eps_override : 1.0 / std::sqrt(n);
  const double d = 1.0;
  rep.amplification = a_override >= 0.0
                          ? a_override
                          : std::min(std::pow(L, 1.0 / (s + d)), std::pow(n, 1.0 / (4.0 * d)));
  const double A = rep.amplification;
  const double eps = rep.epsilon;

  auto g = [A](double x) { return A * two_point_f(A * (x - 0.5) + 0.5); };
  auto f0 = [&](double x) { return 0.5 * (two_point_f(x) + g(x)); };
  auto f1 = [&](double x) {
    return 0.5 * ((1.0 - eps) * two_point_f(x) + (1.0 + eps) * g(x));
  };

  // Composite midpoint over the support at high resolution.
  const int res = 1 << 17;
  const double lo = 0.25, hi = 0.75;
  const double w = (hi - lo) / res;
  double chi = 0.0, h0 = 0.0, h1 = 0.0;
  for (int i = 0; i < res; ++i) {
    const double x = lo + (i + 0.5) * w;
    const double a = f0(x), b = f1(x);
    if (a > 0.0) chi += (b - a) * (b - a) / a * w;
    h0 -= xlogx(a) * w;
    h1 -= xlogx(b) * w;
  }
  rep.chi_sq = chi;
  rep.chi_sq_bound = eps * eps;
  rep.entropy_f0 = h0;
  rep.entropy_f1 = h1;
  rep.separation = std::fabs(h0 - h1);
  rep.chi_sq_ok = chi <= eps * eps + 1e-10;
  return rep;
}

}  // namespace entroscope
