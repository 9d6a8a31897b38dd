#include "entroscope/poly_approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace entroscope {

namespace {

using ld = long double;

// Target on the rescaled interval: G(u) = -(delta u) ln(delta u), G(0) = 0.
inline ld target(ld delta, ld u) {
  const ld t = delta * u;
  return t > 0.0L ? -t * std::log(t) : 0.0L;
}

// Clenshaw evaluation of sum c_j T_j(v), v in [-1, 1].
inline ld clenshaw(const std::vector<ld>& c, ld v) {
  ld b1 = 0.0L, b2 = 0.0L;
  for (int j = static_cast<int>(c.size()) - 1; j >= 1; --j) {
    const ld b0 = 2.0L * v * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return v * b1 - b2 + c[0];
}

// Solve the (k+2)x(k+2) reference system for Chebyshev coefficients and the
// levelled error E: sum_j c_j T_j(v_i) + (-1)^i E = G(u_i).
void solve_reference(const std::vector<ld>& ref_u, ld delta, int k, std::vector<ld>& cheb,
                     ld& lev) {
  const int m = k + 2;
  std::vector<ld> A(static_cast<std::size_t>(m) * m);
  std::vector<ld> rhs(m);
  for (int i = 0; i < m; ++i) {
    const ld v = 2.0L * ref_u[i] - 1.0L;
    ld t0 = 1.0L, t1 = v;
    for (int j = 0; j <= k; ++j) {
      ld tv;
      if (j == 0)
        tv = 1.0L;
      else if (j == 1)
        tv = v;
      else {
        tv = 2.0L * v * t1 - t0;
        t0 = t1;
        t1 = tv;
      }
      A[i * m + j] = tv;
    }
    A[i * m + k + 1] = (i % 2 == 0) ? 1.0L : -1.0L;
    rhs[i] = target(delta, ref_u[i]);
  }
  // Gaussian elimination with partial pivoting.
  std::vector<int> piv(m);
  for (int i = 0; i < m; ++i) piv[i] = i;
  for (int col = 0; col < m; ++col) {
    int best = col;
    for (int r = col + 1; r < m; ++r)
      if (std::fabs(A[r * m + col]) > std::fabs(A[best * m + col])) best = r;
    if (best != col) {
      for (int j = 0; j < m; ++j) std::swap(A[col * m + j], A[best * m + j]);
      std::swap(rhs[col], rhs[best]);
    }
    const ld p = A[col * m + col];
    if (p == 0.0L) throw std::runtime_error("remez_minimax: singular reference system");
    for (int r = col + 1; r < m; ++r) {
      const ld f = A[r * m + col] / p;
      if (f == 0.0L) continue;
      for (int j = col; j < m; ++j) A[r * m + j] -= f * A[col * m + j];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<ld> sol(m);
  for (int r = m - 1; r >= 0; --r) {
    ld s = rhs[r];
    for (int j = r + 1; j < m; ++j) s -= A[r * m + j] * sol[j];
    sol[r] = s / A[r * m + r];
  }
  cheb.assign(sol.begin(), sol.begin() + k + 1);
  lev = sol[k + 1];
}

struct Candidate {
  ld u;
  ld e;
};

}  // namespace

double PolyApprox::a(int l) const { return b[l] * std::pow(delta, -l); }

double PolyApprox::value(double t) const {
  std::vector<ld> c(cheb.begin(), cheb.end());
  const ld v = 2.0L * (static_cast<ld>(t) / delta) - 1.0L;
  return static_cast<double>(clenshaw(c, v));
}

double eval_poly(const PolyApprox& poly, double t) {
  const double u = t / poly.delta;
  double acc = 0.0;
  for (int l = poly.degree; l >= 0; --l) acc = acc * u + poly.b[l];
  return acc;
}

PolyApprox remez_minimax(double delta, int degree) {
  if (!(delta > 0.0)) throw std::invalid_argument("remez_minimax: delta must be positive");
  if (degree < 0 || degree > 64) throw std::invalid_argument("remez_minimax: degree must be in [0, 64]");
  const int k = degree;
  const int m = k + 2;
  const ld dl = static_cast<ld>(delta);

  // theta-parametrized dense grid, u = (1 - cos theta)/2, clustered where the
  // error extrema cluster.
  const int grid_n = std::max(16384, 256 * m) + 1;
  std::vector<ld> grid_u(grid_n), grid_theta(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    const ld th = std::numbers::pi_v<ld> * i / (grid_n - 1);
    grid_theta[i] = th;
    grid_u[i] = 0.5L * (1.0L - std::cos(th));
  }
  grid_u.front() = 0.0L;
  grid_u.back() = 1.0L;

  // Strictly interior Chebyshev nodes: endpoint initialization can make the
  // first reference system degenerate (both endpoints are zeros of the
  // target when delta = 1); the exchange recovers the endpoints on its own.
  auto init_reference = [&](ld jitter) {
    std::vector<ld> ref(m);
    for (int i = 0; i < m; ++i) {
      ld u = 0.5L * (1.0L - std::cos((i + 0.5L) * std::numbers::pi_v<ld> / m));
      if (jitter != 0.0L) u = std::clamp(u * (1.0L + jitter * (i % 2 ? 1 : -1)), 1e-6L, 1.0L - 1e-6L);
      ref[i] = u;
    }
    return ref;
  };

  std::ostringstream trace;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<ld> ref = init_reference(attempt == 0 ? 0.0L : 1e-3L);
    std::vector<ld> cheb;
    ld lev = 0.0L;
    ld prev_sup = -1.0L;
    bool degenerate = false;

    for (int iter = 1; iter <= 100; ++iter) {
      solve_reference(ref, dl, k, cheb, lev);

      // Error on the dense grid.
      std::vector<ld> err(grid_n);
      for (int i = 0; i < grid_n; ++i)
        err[i] = target(dl, grid_u[i]) - clenshaw(cheb, 2.0L * grid_u[i] - 1.0L);

      // Candidates: endpoints plus interior local extrema of the error.
      std::vector<Candidate> cand;
      cand.push_back({grid_u[0], err[0]});
      for (int i = 1; i + 1 < grid_n; ++i) {
        const bool is_max = err[i] >= err[i - 1] && err[i] >= err[i + 1];
        const bool is_min = err[i] <= err[i - 1] && err[i] <= err[i + 1];
        if (!is_max && !is_min) continue;
        // Parabolic refinement in theta.
        const ld t0 = grid_theta[i - 1], t1 = grid_theta[i], t2 = grid_theta[i + 1];
        const ld e0 = err[i - 1], e1 = err[i], e2 = err[i + 1];
        const ld denom = (e0 - 2.0L * e1 + e2);
        ld th = t1;
        if (std::fabs(denom) > 0.0L) {
          ld shift = 0.5L * (e0 - e2) / denom * (t1 - t0);
          if (std::fabs(shift) <= (t2 - t0)) th = t1 + shift;
        }
        const ld u = 0.5L * (1.0L - std::cos(th));
        cand.push_back({u, target(dl, u) - clenshaw(cheb, 2.0L * u - 1.0L)});
      }
      cand.push_back({grid_u[grid_n - 1], err[grid_n - 1]});

      // Alternating compression: keep the larger |e| among same-sign runs.
      std::vector<Candidate> alt;
      for (const auto& c : cand) {
        if (!alt.empty() && ((alt.back().e >= 0) == (c.e >= 0))) {
          if (std::fabs(c.e) > std::fabs(alt.back().e)) alt.back() = c;
        } else {
          alt.push_back(c);
        }
      }

      if (static_cast<int>(alt.size()) < m) {
        trace << "iter " << iter << ": only " << alt.size() << " alternations (need " << m << ")\n";
        degenerate = true;
        break;
      }

      // Select the m consecutive candidates containing the global max of |e|
      // that maximize the smallest |e|.
      std::size_t gmax = 0;
      for (std::size_t i = 1; i < alt.size(); ++i)
        if (std::fabs(alt[i].e) > std::fabs(alt[gmax].e)) gmax = i;
      std::size_t best_start = 0;
      ld best_min = -1.0L;
      for (std::size_t s = 0; s + m <= alt.size(); ++s) {
        if (gmax < s || gmax >= s + m) continue;
        ld mn = std::fabs(alt[s].e);
        for (std::size_t j = s; j < s + m; ++j) mn = std::min(mn, std::fabs(alt[j].e));
        if (mn > best_min) {
          best_min = mn;
          best_start = s;
        }
      }

      ld sup = std::fabs(alt[gmax].e);
      for (int i = 0; i < m; ++i) ref[i] = alt[best_start + i].u;

      // Collision check.
      for (int i = 0; i + 1 < m; ++i)
        if (!(ref[i + 1] > ref[i])) {
          trace << "iter " << iter << ": reference points collided\n";
          degenerate = true;
        }
      if (degenerate) break;

      const bool levelled = sup <= std::fabs(lev) * (1.0L + 1e-10L);
      const bool stable = prev_sup > 0.0L && std::fabs(sup - prev_sup) <= 1e-10L * sup;
      prev_sup = sup;
      if (levelled || stable || iter == 100) {
        if (iter == 100 && !(levelled || stable))
          throw std::runtime_error("remez_minimax: no convergence in 100 iterations\n" + trace.str());

        PolyApprox out;
        out.delta = delta;
        out.degree = k;
        out.iterations = iter;
        out.cheb.assign(cheb.begin(), cheb.end());
        // Final levelled solve on the converged reference for the certificate.
        solve_reference(ref, dl, k, cheb, lev);
        out.cheb.assign(cheb.begin(), cheb.end());
        ld cert_sup = 0.0L;
        for (int i = 0; i < grid_n; ++i) {
          const ld e = target(dl, grid_u[i]) - clenshaw(cheb, 2.0L * grid_u[i] - 1.0L);
          cert_sup = std::max(cert_sup, std::fabs(e));
        }
        out.sup_error = static_cast<double>(std::max(cert_sup, std::fabs(lev)));
        out.alternation_points.resize(m);
        out.alternation_errors.resize(m);
        ld dvp = cert_sup;
        for (int i = 0; i < m; ++i) {
          const ld e = target(dl, ref[i]) - clenshaw(cheb, 2.0L * ref[i] - 1.0L);
          out.alternation_points[i] = static_cast<double>(ref[i] * dl);
          out.alternation_errors[i] = static_cast<double>(e);
          dvp = std::min(dvp, std::fabs(e));
        }
        out.dvp_lower_bound = static_cast<double>(dvp);

        // Monomial conversion via the Chebyshev recurrence in u.
        std::vector<std::vector<ld>> polys;
        polys.push_back({1.0L});
        if (k >= 1) polys.push_back({-1.0L, 2.0L});
        for (int j = 2; j <= k; ++j) {
          std::vector<ld> pj(j + 1, 0.0L);
          for (std::size_t l = 0; l < polys[j - 1].size(); ++l) {
            pj[l + 1] += 4.0L * polys[j - 1][l];
            pj[l] -= 2.0L * polys[j - 1][l];
          }
          for (std::size_t l = 0; l < polys[j - 2].size(); ++l) pj[l] -= polys[j - 2][l];
          polys.push_back(std::move(pj));
        }
        std::vector<ld> mono(k + 1, 0.0L);
        for (int j = 0; j <= k; ++j)
          for (std::size_t l = 0; l < polys[j].size(); ++l) mono[l] += cheb[j] * polys[j][l];
        out.b.assign(mono.begin(), mono.end());
        return out;
      }
    }
    if (!degenerate) break;
    trace << "restarting from perturbed Chebyshev nodes\n";
  }
  throw std::runtime_error("remez_minimax: alternation degeneracy persisted\n" + trace.str());
}

std::string poly_coefficients_csv(const PolyApprox& poly) {
  std::ostringstream os;
  os.precision(17);
  os << "l,b,a\n";
  for (int l = 0; l <= poly.degree; ++l) os << l << "," << poly.b[l] << "," << poly.a(l) << "\n";
  return os.str();
}

}  // namespace entroscope
