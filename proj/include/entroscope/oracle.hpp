#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "entroscope/densities.hpp"

namespace entroscope {

using PdfFn = std::function<double(std::span<const double>)>;
using VecFn = std::function<void(std::span<const double>, std::span<double>)>;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

//! Entropy int -f ln f over `domain` by composite midpoint with Richardson
//! extrapolation between `resolution` and `resolution`/2 cells per axis.
//! `resolution` must be a power of two.  0 ln 0 = 0 at zeros.
QuadratureResult quadrature_entropy(const PdfFn& pdf, const Box& domain, int resolution,
                                    double tolerance = 1e-7);

//! Convenience overload on a zoo density (uses its support box and the
//! construction-time default resolution for its dimension).
QuadratureResult quadrature_entropy(const DensityModel& density);

struct FisherResult {
  double value = 0.0;       // +inf when divergence was detected
  bool divergent = false;
  double excluded_mass = 0.0;  // mass of cells with f < 1e-12
};

//! Fisher information J(f) = int |grad f|^2 / f by grid quadrature over
//! `domain`.  Cells with f < 1e-12 are excluded (their mass is recorded).
//! Divergence (value growing with resolution) is reported as +inf.
FisherResult fisher_information(const PdfFn& pdf, const Box& domain, int grid,
                                const VecFn& gradient = nullptr);

//! sum_i || d^2 f / dx_i^2 ||_p over the interior of `domain` by grid
//! quadrature (analytic second derivatives when provided, interior central
//! differences otherwise).
double second_derivative_norm(const PdfFn& pdf, double p, const Box& domain, int grid,
                              const VecFn& second_derivs = nullptr);

struct FisherProbeRow {
  std::string id;
  double fisher = 0.0;
  double grad_sq_norm = 0.0;  // int |grad f|^2 (no 1/f), diagnostic
  double second_norm = 0.0;
  double ratio = 0.0;  // fisher / second_norm, 0 for the 0/0 convention
  bool divergent = false;
  bool smooth_boundary = true;  // vanishes smoothly at the support boundary
};

struct FisherProbeReport {
  std::vector<FisherProbeRow> rows;
  double max_ratio = 0.0;
  bool all_finite = true;
};

//! Ratio table J(f) / sum_i ||d_ii f||_p over a density suite; records the
//! empirical constant witness.  Densities that do not vanish smoothly at the
//! boundary are computed anyway and flagged.
FisherProbeReport fisher_probe(const std::vector<DensityModel>& suite, double p, int grid = 4096);

}  // namespace entroscope
