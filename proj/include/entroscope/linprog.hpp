#pragma once

#include <vector>

namespace entroscope {

//! Dense linear program: maximize c.x subject to row constraints and x >= 0.
//! Row types: 'E' (equality) and 'L' (<=); right-hand sides must be
//! nonnegative.  Sized for few rows (tens) and many columns (tens of
//! thousands), which covers the moment-matching and discretized-minimax
//! problems in this project.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  struct Row {
    std::vector<double> coeffs;
    double rhs = 0.0;
    char type = 'E';
  };
  std::vector<Row> rows;
};

struct LpResult {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::optimal;
  double value = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

//! Two-phase primal simplex with a final basis re-solve against the original
//! constraint matrix to remove accumulated tableau drift.
LpResult solve_lp(const LinearProgram& lp);

}  // namespace entroscope
