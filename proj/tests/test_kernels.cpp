#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "entroscope/kernels.hpp"
#include "entroscope/rng.hpp"

using namespace entroscope;

TEST_CASE("kernel_at box and triangle") {
  const Kernel box1 = Kernel::box(1);
  double t0 = 0.0;
  CHECK(kernel_at(box1, 0.2, std::span<const double>(&t0, 1)) == doctest::Approx(5.0));
  double t1 = 0.2;
  CHECK(kernel_at(box1, 0.2, std::span<const double>(&t1, 1)) == 0.0);
  const Kernel tri2 = Kernel::triangle_product(2);
  std::vector<double> origin{0.0, 0.0};
  CHECK(kernel_at(tri2, 0.5, origin) == doctest::Approx(4.0));
  std::vector<double> mid{0.25, -0.25};
  // (1/h^2) (1-0.5)(1-0.5) = 1.0
  CHECK(kernel_at(tri2, 0.5, mid) == doctest::Approx(1.0));
}

TEST_CASE("kde basics") {
  const Kernel box1 = Kernel::box(1);
  std::vector<double> one{0.5};
  std::vector<double> x{0.5};
  CHECK(kde(one, 1, box1, 0.2, x, BoundaryMode::zero_extension) == doctest::Approx(5.0));
  std::vector<double> far{0.1, 0.9};
  x[0] = 0.5;
  CHECK(kde(far, 1, box1, 0.2, x, BoundaryMode::zero_extension) == 0.0);
  // periodic wrap: sample at 0.99, x = 0.01, h = 0.1 -> wrapped distance 0.02
  std::vector<double> near_wrap{0.99};
  x[0] = 0.01;
  CHECK(kde(near_wrap, 1, box1, 0.1, x, BoundaryMode::periodic) == doctest::Approx(10.0));
  CHECK(kde(near_wrap, 1, box1, 0.1, x, BoundaryMode::zero_extension) == 0.0);
}

TEST_CASE("kde never exceeds the sup bound and periodic kde is shift-invariant") {
  const Kernel box1 = Kernel::box(1);
  Rng rng(5);
  std::vector<double> samples(50);
  for (auto& s : samples) s = rng.uniform01();
  const double h = 0.07;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x{rng.uniform01()};
    const double v = kde(samples, 1, box1, h, x, BoundaryMode::periodic);
    CHECK(v <= 1.0 / h + 1e-9);
    // shift everything by the same amount mod 1
    const double shift = 0.3711;
    std::vector<double> shifted(samples);
    for (auto& s : shifted) s = s + shift - std::floor(s + shift);
    std::vector<double> xs{x[0] + shift - std::floor(x[0] + shift)};
    const double v2 = kde(shifted, 1, box1, h, xs, BoundaryMode::periodic);
    CHECK(v2 == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("smoothed_density exact box path") {
  const DensityModel uni = make_density(UniformCubeSpec{1});
  const Kernel box1 = Kernel::box(1);
  std::vector<double> x{0.5};
  CHECK(smoothed_density(uni, box1, 0.2, x, BoundaryMode::zero_extension) == doctest::Approx(1.0));
  // near the boundary the zero-extension convolution halves
  x[0] = 0.0;
  CHECK(smoothed_density(uni, box1, 0.2, x, BoundaryMode::zero_extension) == doctest::Approx(0.5));
  // periodic uniform is exactly 1 everywhere
  for (double xx : {0.0, 0.03, 0.5, 0.99}) {
    x[0] = xx;
    CHECK(smoothed_density(uni, box1, 0.2, x, BoundaryMode::periodic) == doctest::Approx(1.0));
  }
}

TEST_CASE("smoothed_density of a bump mixture at sub-cube centers") {
  // box kernel with h equal to the sub-cube edge, x at the center of cell i:
  // the window is exactly the cell, so f_h = p_i / h (no background inside
  // the inner cube).
  BumpMixtureSpec spec{{0.1, 0.2, 0.15, 0.05}, 0.125, 1};
  const DensityModel m = make_density(spec);
  const Kernel box1 = Kernel::box(1);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> x{0.25 + (i + 0.5) * 0.125};
    const double expect = spec.weights[i] / 0.125;
    CHECK(smoothed_density(m, box1, 0.125, x, BoundaryMode::zero_extension) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("smoothed_density quadrature path matches the exact box path") {
  const DensityModel beta = make_density(BetaProductSpec{2, 2, 1});
  DensityModel no_mass = beta;
  no_mass.box_mass = nullptr;  // force quadrature
  const Kernel box1 = Kernel::box(1);
  for (double xx : {0.1, 0.33, 0.5, 0.92}) {
    std::vector<double> x{xx};
    const double exact = smoothed_density(beta, box1, 0.11, x, BoundaryMode::zero_extension);
    const double quad = smoothed_density(no_mass, box1, 0.11, x, BoundaryMode::zero_extension);
    CHECK(quad == doctest::Approx(exact).epsilon(1e-7));
  }
}

TEST_CASE("kde is unbiased for the smoothed density (Monte Carlo)") {
  const DensityModel beta = make_density(BetaProductSpec{2, 2, 1});
  const Kernel tri = Kernel::triangle_product(1);
  const double h = 0.15;
  Rng rng(11);
  const std::size_t n = 2000, reps = 200;
  for (int pt = 0; pt < 20; ++pt) {
    std::vector<double> x{rng.uniform01()};
    const double truth = smoothed_density(beta, tri, h, x, BoundaryMode::zero_extension);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      Rng srng(derive_seed(123, "kde-unbiased", pt, r));
      const auto pts = sample(beta, n, srng);
      const double v = kde(pts, 1, tri, h, x, BoundaryMode::zero_extension);
      mean += v;
      m2 += v * v;
    }
    mean /= reps;
    const double var = m2 / reps - mean * mean;
    const double se = std::sqrt(std::max(var, 1e-12) / reps);
    INFO("x = " << x[0]);
    CHECK(std::fabs(mean - truth) <= 3.0 * se + 1e-4);
  }
}

TEST_CASE("kernel assumption checks") {
  for (int d : {1, 2, 3}) {
    const auto rep_box = check_kernel_assumptions(Kernel::box(d), 1e-8);
    CHECK(rep_box.all_pass());
    const auto rep_tri = check_kernel_assumptions(Kernel::triangle_product(d), 1e-8);
    CHECK(rep_tri.all_pass());
    // triangle second moment: d/6
    CHECK(rep_tri.second_moment == doctest::Approx(d / 6.0).epsilon(1e-6));
  }
  // deliberately shifted kernel: zero-mean check fails
  const auto shifted = check_kernel_assumptions_fn(
      [](double t) { return std::fabs(t - 0.2) <= 0.5 ? 1.0 : 0.0; }, 0.8, 1e-8);
  CHECK_FALSE(shifted.zero_mean);
  CHECK(shifted.nonnegative);
  // a kernel with negative parts trips the non-negativity item
  const auto signed_k = check_kernel_assumptions_fn(
      [](double t) { return std::fabs(t) <= 1.0 ? 1.0 - 2.0 * t * t : 0.0; }, 1.0, 1e-8);
  CHECK_FALSE(signed_k.nonnegative);
}

TEST_CASE("kde unbiasedness for the bump mixture (box kernel, exact f_h)") {
  const DensityModel m = make_density(BumpMixtureSpec{{0.1, 0.2, 0.15, 0.05}, 0.125, 1});
  const Kernel box1 = Kernel::box(1);
  const double h = 0.09;
  Rng rng(19);
  const std::size_t n = 2000, reps = 200;
  for (int pt = 0; pt < 10; ++pt) {
    std::vector<double> x{rng.uniform01()};
    const double truth = smoothed_density(m, box1, h, x, BoundaryMode::zero_extension);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      Rng srng(derive_seed(321, "kde-unbiased-bump", pt, r));
      const auto pts = sample(m, n, srng);
      const double v = kde(pts, 1, box1, h, x, BoundaryMode::zero_extension);
      mean += v;
      m2 += v * v;
    }
    mean /= reps;
    const double se = std::sqrt(std::max(m2 / reps - mean * mean, 1e-12) / reps);
    INFO("x = " << x[0]);
    CHECK(std::fabs(mean - truth) <= 3.0 * se + 1e-4);
  }
}
