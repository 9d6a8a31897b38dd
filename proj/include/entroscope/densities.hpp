#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "entroscope/grid.hpp"
#include "entroscope/rng.hpp"

namespace entroscope {

//! Smoothness-class membership declaration (s, p, d, L).
struct LipschitzSpec {
  double s = 1.0;  // smoothness, in (0, 2] for estimator guarantees
  double p = 2.0;  // norm parameter, >= 1
  int d = 1;
  double L = 1.0;  // class radius

  bool upper_bound_regime() const { return p >= 2.0; }
  void validate() const;
};

enum class SupportKind { unit_cube, scaled_cube, real_line };

enum class EntropyProvenance { closed_form, quadrature };

//! Sum of disjoint sub-cube bumps plus a frame-supported background.
//! `weights[i]` is the mass of the bump in sub-cube i of edge `edge` tiling
//! [1/4, 3/4]^d in row-major order; background mass is 1 - sum(weights).
struct BumpMixtureSpec {
  std::vector<double> weights;
  double edge = 0.0;
  int d = 1;
};

struct UniformCubeSpec {
  int d = 1;
};
struct BetaProductSpec {
  double alpha = 2.0;
  double beta = 2.0;
  int d = 1;
};
struct CosineBumpSpec {
  double amplitude = 0.5;  // must be < 1
  int d = 1;
};

using DensitySpec = std::variant<UniformCubeSpec, BetaProductSpec, CosineBumpSpec, BumpMixtureSpec>;

//! Evaluable probability density with sampler and ground-truth entropy.
//! Immutable after construction; safe to share across threads.
struct DensityModel {
  int dim = 1;
  std::string id;
  SupportKind support = SupportKind::unit_cube;
  Box box;  // support bounding box

  std::function<double(std::span<const double>)> pdf;
  //! Exact mass of an axis-aligned box (intersected with the support), when
  //! a closed-form cell integral exists.
  std::function<double(const Box&)> box_mass;
  //! Per-axis gradient, when analytic (used by the Fisher probe).
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  //! Per-axis second derivatives d^2 f / dx_i^2, when analytic.
  std::function<void(std::span<const double>, std::span<double>)> second_derivs;
  //! Native sampler writing one point; rejection sampling is used when absent.
  std::function<void(Rng&, std::span<double>)> sampler;

  double entropy_truth = 0.0;
  EntropyProvenance provenance = EntropyProvenance::closed_form;
  std::optional<LipschitzSpec> declared_class;
  double sup_norm = 1.0;  // envelope for rejection sampling
};

//! Instantiates a zoo density.  Throws std::invalid_argument on bad specs
//! (cosine amplitude >= 1, bump weights summing above 1, ...).
DensityModel make_density(const DensitySpec& spec);

//! Draw n points from `density` into a flat row-major array (n x d).
//! Uses the native sampler when present, otherwise rejection sampling with
//! the sup-norm envelope; aborts if the acceptance rate falls below 1e-4.
std::vector<double> sample(const DensityModel& density, std::size_t n, Rng& rng);

//! Quartic bump kernel pieces shared by the zoo and the lower-bound lab.
namespace quartic {
double pdf(double u);      // 30 u^2 (1-u)^2 on [0,1]
double cdf(double u);      // 10u^3 - 15u^4 + 6u^5
double cdf_inv(double p);  // Newton with bisection guard
double entropy();          // closed form, nats
}  // namespace quartic

//! Entropy of the weight vector plus derivation constants for bump mixtures:
//! H(f_P) = C0 + H(P) + (H(g) + d ln h) sum(p_i), with disjoint supports.
double bump_mixture_entropy(const BumpMixtureSpec& spec);

}  // namespace entroscope
