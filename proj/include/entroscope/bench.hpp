#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroscope/densities.hpp"
#include "entroscope/estimator.hpp"

namespace entroscope {

struct ExperimentRecord {
  std::string estimator;
  std::string density;
  long n = 0;  // total samples handed to the estimator
  int replicate = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double error = 0.0;  // estimate - truth, exactly
  double wall_ms = 0.0;
};

struct BenchConfig {
  std::vector<DensitySpec> densities;
  std::vector<std::string> estimators;  // optimal | plugin | discrete-mm | discrete-poly | resub
  std::vector<long> n_grid;
  int replicates = 1;
  std::uint64_t master_seed = 0;
  EstimatorConfig est;
  std::string output_path;

  //! Parses and schema-validates a config; throws std::runtime_error with a
  //! descriptive message on malformed input.
  static BenchConfig from_json_text(const std::string& text);
  static BenchConfig from_json_file(const std::string& path);
};

//! The scattered-mass benchmark fixture used for rate studies (d = 1).
BumpMixtureSpec hard_bump_mixture_spec();

//! Parse a density spec from its JSON object form.
DensitySpec density_spec_from_json_text(const std::string& text);

//! Runs all missing (density, n, replicate) x estimator cells and appends
//! them to `existing` in deterministic order.  Replicate r of cell
//! (density, n) draws its samples from seed = splitmix(master, density_id,
//! n, r); every estimator sees the same samples for a cell.
std::vector<ExperimentRecord> run_bench(const BenchConfig& config,
                                        const std::vector<ExperimentRecord>& existing = {},
                                        int override_threads = 0);

//! CSV with the fixed header; RFC-4180 quoting, LF line endings.
std::string records_to_csv(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> records_from_csv(const std::string& text);

struct RateFit {
  std::string estimator;
  std::string density;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double ci_lo = 0.0;  // bootstrap 90% CI on the slope
  double ci_hi = 0.0;
  std::vector<long> n_used;
  double rmse_at_largest_n = 0.0;
};

//! OLS of ln RMSE on ln n per (estimator, density), with a 200-resample
//! bootstrap CI on the slope.  Requires >= 3 distinct n and >= 20
//! replicates each; throws std::runtime_error otherwise.
std::vector<RateFit> fit_rate(const std::vector<ExperimentRecord>& records);

std::string rate_table_csv(const std::vector<RateFit>& fits);

//! Parse a whitespace-separated sample file ('#' comments allowed).
//! Returns the flat array; the dimension is inferred from the first row.
std::vector<double> read_samples_file(const std::string& path, int& dim_out);

}  // namespace entroscope
