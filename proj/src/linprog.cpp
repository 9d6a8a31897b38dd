#include "entroscope/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace entroscope {

namespace {

constexpr double kEps = 1e-11;

struct Tableau {
  int m = 0;          // constraint rows
  int cols = 0;       // structural + slack + artificial
  int art_begin = 0;  // first artificial column
  std::vector<std::vector<double>> a;  // m rows, cols+1 (rhs last)
  std::vector<int> basis;

  double& rhs(int i) { return a[i][cols]; }

  void pivot(int prow, int pcol) {
    auto& pr = a[prow];
    const double pv = pr[pcol];
    for (int j = 0; j <= cols; ++j) pr[j] /= pv;
    for (int i = 0; i < m; ++i) {
      if (i == prow) continue;
      const double f = a[i][pcol];
      if (f == 0.0) continue;
      auto& row = a[i];
      for (int j = 0; j <= cols; ++j) row[j] -= f * pr[j];
    }
    basis[prow] = pcol;
  }
};

// Runs primal simplex maximizing `cost` over the current tableau basis.
// `allowed[j]` masks columns that may enter.  Returns false on iteration
// trouble (unbounded reported via flag).
enum class RunStatus { optimal, unbounded, iteration_limit };

RunStatus run_simplex(Tableau& t, const std::vector<double>& cost, const std::vector<bool>& allowed,
                      int& iterations) {
  const int max_iter = 200000;
  // Reduced-cost vector maintained implicitly: r_j = cost_j - y.A_j where
  // y solves over the basis; with a full tableau, r_j = cost_j - sum_i
  // cost_{basis_i} a_ij.
  std::vector<double> cb(t.m);
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < t.m; ++i) cb[i] = cost[t.basis[i]];
    // Pricing: Dantzig rule, Bland after a long stall.
    const bool bland = it > 20000;
    int enter = -1;
    double best = kEps;
    for (int j = 0; j < t.cols; ++j) {
      if (!allowed[j]) continue;
      double r = cost[j];
      for (int i = 0; i < t.m; ++i) {
        const double aij = t.a[i][j];
        if (aij != 0.0) r -= cb[i] * aij;
      }
      if (r > best) {
        enter = j;
        if (bland) break;
        best = r;
      }
    }
    if (enter < 0) {
      iterations += it;
      return RunStatus::optimal;
    }
    // Ratio test.
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < t.m; ++i) {
      const double aij = t.a[i][enter];
      if (aij > kEps) {
        const double ratio = t.rhs(i) / aij;
        if (leave < 0 || ratio < best_ratio - kEps ||
            (ratio < best_ratio + kEps && t.basis[i] > t.basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) {
      iterations += it;
      return RunStatus::unbounded;
    }
    t.pivot(leave, enter);
  }
  iterations += max_iter;
  return RunStatus::iteration_limit;
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const int n = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());
  if (static_cast<int>(lp.objective.size()) != n)
    throw std::invalid_argument("solve_lp: objective size mismatch");
  int n_slack = 0;
  for (const auto& r : lp.rows) {
    if (static_cast<int>(r.coeffs.size()) != n)
      throw std::invalid_argument("solve_lp: row size mismatch");
    if (r.rhs < 0.0) throw std::invalid_argument("solve_lp: right-hand sides must be nonnegative");
    if (r.type == 'L')
      ++n_slack;
    else if (r.type != 'E')
      throw std::invalid_argument("solve_lp: row type must be 'E' or 'L'");
  }

  Tableau t;
  t.m = m;
  t.art_begin = n + n_slack;
  t.cols = n + n_slack + m;  // one artificial per row (unused ones stay nonbasic)
  t.a.assign(m, std::vector<double>(t.cols + 1, 0.0));
  t.basis.assign(m, -1);

  int slack_idx = n;
  for (int i = 0; i < m; ++i) {
    const auto& r = lp.rows[i];
    for (int j = 0; j < n; ++j) t.a[i][j] = r.coeffs[j];
    t.a[i][t.cols] = r.rhs;
    if (r.type == 'L') {
      t.a[i][slack_idx] = 1.0;
      t.basis[i] = slack_idx;
      ++slack_idx;
    } else {
      t.a[i][t.art_begin + i] = 1.0;
      t.basis[i] = t.art_begin + i;
    }
  }

  LpResult out;

  // Phase 1: maximize -sum(artificials).
  {
    std::vector<double> cost(t.cols, 0.0);
    std::vector<bool> allowed(t.cols, true);
    for (int i = 0; i < m; ++i) cost[t.art_begin + i] = -1.0;
    const RunStatus rs = run_simplex(t, cost, allowed, out.iterations);
    if (rs == RunStatus::iteration_limit) {
      out.status = LpResult::Status::iteration_limit;
      return out;
    }
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
      if (t.basis[i] >= t.art_begin) art_sum += t.rhs(i);
    if (art_sum > 1e-7) {
      out.status = LpResult::Status::infeasible;
      return out;
    }
    // Drive lingering zero-level artificials out of the basis when possible.
    for (int i = 0; i < m; ++i) {
      if (t.basis[i] < t.art_begin) continue;
      int pcol = -1;
      for (int j = 0; j < t.art_begin; ++j)
        if (std::fabs(t.a[i][j]) > 1e-9) {
          pcol = j;
          break;
        }
      if (pcol >= 0) t.pivot(i, pcol);
    }
  }

  // Phase 2: maximize the real objective, artificials barred.
  {
    std::vector<double> cost(t.cols, 0.0);
    std::vector<bool> allowed(t.cols, true);
    for (int j = 0; j < n; ++j) cost[j] = lp.objective[j];
    for (int i = 0; i < m; ++i) allowed[t.art_begin + i] = false;
    const RunStatus rs = run_simplex(t, cost, allowed, out.iterations);
    if (rs == RunStatus::unbounded) {
      out.status = LpResult::Status::unbounded;
      return out;
    }
    if (rs == RunStatus::iteration_limit) {
      out.status = LpResult::Status::iteration_limit;
      return out;
    }
  }

  // Re-solve the basis against the original data to remove tableau drift.
  out.x.assign(n, 0.0);
  {
    std::vector<int> brows;
    std::vector<int> bcols;
    for (int i = 0; i < m; ++i) {
      brows.push_back(i);
      bcols.push_back(t.basis[i]);
    }
    // Build B (m x m) from original standardized columns.
    auto orig_col = [&](int j, int i) -> double {
      if (j < n) return lp.rows[i].coeffs[j];
      if (j < t.art_begin) {
        // Slack s: +1 in its own row.
        int s = n;
        for (int r = 0; r < m; ++r) {
          if (lp.rows[r].type == 'L') {
            if (s == j) return r == i ? 1.0 : 0.0;
            ++s;
          }
        }
        return 0.0;
      }
      return (j - t.art_begin) == i ? 1.0 : 0.0;
    };
    std::vector<std::vector<double>> B(m, std::vector<double>(m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
      for (int kk = 0; kk < m; ++kk) B[i][kk] = orig_col(bcols[kk], i);
      B[i][m] = lp.rows[i].rhs;
    }
    // Gaussian elimination with partial pivoting.
    bool ok = true;
    for (int col = 0; col < m && ok; ++col) {
      int best = col;
      for (int r = col + 1; r < m; ++r)
        if (std::fabs(B[r][col]) > std::fabs(B[best][col])) best = r;
      std::swap(B[col], B[best]);
      if (std::fabs(B[col][col]) < 1e-14) {
        ok = false;
        break;
      }
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = B[r][col] / B[col][col];
        if (f == 0.0) continue;
        for (int j = col; j <= m; ++j) B[r][j] -= f * B[col][j];
      }
    }
    if (ok) {
      for (int kk = 0; kk < m; ++kk) {
        const double v = B[kk][m] / B[kk][kk];
        if (bcols[kk] < n) out.x[bcols[kk]] = v;
      }
    } else {
      for (int i = 0; i < m; ++i)
        if (t.basis[i] < n) out.x[t.basis[i]] = t.rhs(i);
    }
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += lp.objective[j] * out.x[j];
  out.value = obj;
  out.status = LpResult::Status::optimal;
  return out;
}

}  // namespace entroscope
