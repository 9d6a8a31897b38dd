#include "entroscope/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "entroscope/baselines.hpp"
#include "entroscope/grid.hpp"

namespace entroscope {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw std::runtime_error("config: " + what);
}

DensitySpec density_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) config_error("density spec needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform_cube") return UniformCubeSpec{j.value("d", 1)};
  if (kind == "beta_product")
    return BetaProductSpec{j.value("alpha", 2.0), j.value("beta", 2.0), j.value("d", 1)};
  if (kind == "cosine_bump") return CosineBumpSpec{j.value("amplitude", 0.5), j.value("d", 1)};
  if (kind == "bump_mixture") {
    BumpMixtureSpec s;
    if (!j.contains("weights") || !j.at("weights").is_array())
      config_error("bump_mixture needs a 'weights' array");
    s.weights = j.at("weights").get<std::vector<double>>();
    if (!j.contains("edge")) config_error("bump_mixture needs 'edge'");
    s.edge = j.at("edge").get<double>();
    s.d = j.value("d", 1);
    return s;
  }
  if (kind == "bump_mixture_hard") return hard_bump_mixture_spec();
  config_error("unknown density kind '" + kind + "'");
}

KernelKind kernel_from_string(const std::string& s) {
  if (s == "box") return KernelKind::box;
  if (s == "triangle_product") return KernelKind::triangle_product;
  config_error("unknown kernel '" + s + "'");
}

BoundaryMode boundary_from_string(const std::string& s) {
  if (s == "zero_extension") return BoundaryMode::zero_extension;
  if (s == "periodic") return BoundaryMode::periodic;
  config_error("unknown boundary mode '" + s + "'");
}

EstimatorConfig estimator_config_from_json(const json& j) {
  EstimatorConfig c;
  if (!j.contains("class")) config_error("estimator_config needs 'class'");
  const auto& cls = j.at("class");
  c.cls.s = cls.value("s", 1.0);
  c.cls.p = cls.value("p", 2.0);
  c.cls.d = cls.value("d", 1);
  c.cls.L = cls.value("L", 1.0);
  if (j.contains("constants")) {
    const auto& k = j.at("constants");
    c.c0 = k.value("c0", 1.0);
    c.c1 = k.value("c1", -1.0);
    c.c2 = k.value("c2", 0.05);
    c.eps = k.value("eps", 0.3);
  }
  c.kernel = kernel_from_string(j.value("kernel", std::string("box")));
  c.boundary = boundary_from_string(j.value("boundary", std::string("zero_extension")));
  c.resolution_multiplier = j.value("resolution", 4);
  c.seed = j.value("seed", 0ULL);
  c.validate();
  return c;
}

constexpr const char* kCsvHeader = "estimator,density,n,replicate,seed,estimate,truth,error,wall_ms";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct CellKey {
  std::string density;
  long n;
  int replicate;
  auto operator<=>(const CellKey&) const = default;
};

}  // namespace

BumpMixtureSpec hard_bump_mixture_spec() {
  // 32 bumps of edge 1/64 on [1/4, 3/4].  The four-scale mass pattern spans
  // the smooth/non-smooth threshold across the benchmark n grid, and the
  // exact-zero cells keep a positive-measure region where the polynomial
  // branch pays its full approximation error at every n.
  BumpMixtureSpec s;
  s.d = 1;
  s.edge = 1.0 / 64.0;
  const double pattern[4] = {0.0, 1.0, 6.0, 25.0};
  s.weights.resize(32);
  double total = 0.0;
  for (int i = 0; i < 32; ++i) {
    s.weights[i] = pattern[i % 4];
    total += s.weights[i];
  }
  for (auto& w : s.weights) w *= 0.5 / total;
  return s;
}

DensitySpec density_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    config_error(std::string("bad density JSON: ") + e.what());
  }
  return density_spec_from_json(j);
}

BenchConfig BenchConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    config_error(std::string("bad JSON: ") + e.what());
  }
  BenchConfig c;
  if (!j.contains("densities") || !j.at("densities").is_array() || j.at("densities").empty())
    config_error("'densities' must be a nonempty array");
  for (const auto& d : j.at("densities")) c.densities.push_back(density_spec_from_json(d));
  if (!j.contains("estimators") || !j.at("estimators").is_array() || j.at("estimators").empty())
    config_error("'estimators' must be a nonempty array");
  for (const auto& e : j.at("estimators")) {
    const std::string id = e.get<std::string>();
    if (id != "optimal" && id != "plugin" && id != "discrete-mm" && id != "discrete-poly" &&
        id != "resub")
      config_error("unknown estimator id '" + id + "'");
    c.estimators.push_back(id);
  }
  if (!j.contains("n_grid") || !j.at("n_grid").is_array() || j.at("n_grid").empty())
    config_error("'n_grid' must be a nonempty array");
  for (const auto& n : j.at("n_grid")) {
    const long v = n.get<long>();
    if (v < 48) config_error("n_grid entries must be >= 48");
    c.n_grid.push_back(v);
  }
  c.replicates = j.value("replicates", 1);
  if (c.replicates < 1) config_error("'replicates' must be >= 1");
  c.master_seed = j.value("master_seed", 0ULL);
  if (!j.contains("estimator_config")) config_error("missing 'estimator_config'");
  c.est = estimator_config_from_json(j.at("estimator_config"));
  c.output_path = j.value("output", std::string("results.csv"));
  return c;
}

BenchConfig BenchConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

namespace {

double run_one_estimator(const std::string& id, std::span<const double> samples, int dim,
                         const EstimatorConfig& cfg, long total_n) {
  if (id == "optimal") {
    return estimate_entropy(samples, dim, cfg, 1).entropy;
  }
  const Kernel kernel =
      cfg.kernel == KernelKind::box ? Kernel::box(dim) : Kernel::triangle_product(dim);
  const double s = cfg.cls.s;
  if (id == "plugin") {
    const double h = cfg.c0 * std::pow(cfg.cls.L * total_n, -1.0 / (s + dim));
    return plugin_entropy(samples, dim, kernel, h, cfg.boundary, cfg.resolution_multiplier, 1);
  }
  if (id == "discrete-mm" || id == "discrete-poly") {
    const double lnn = std::log(static_cast<double>(total_n));
    const double h_star = std::pow(cfg.cls.L * total_n * lnn, -1.0 / (s + dim));
    const int bins = std::max(2, static_cast<int>(std::lround(1.0 / h_star)));
    const double h = 1.0 / bins;
    return discrete_reduction_entropy(samples, dim, h,
                                      id == "discrete-mm" ? DiscreteMode::miller_madow
                                                          : DiscreteMode::poly);
  }
  if (id == "resub") {
    const double h = cfg.c0 * std::pow(cfg.cls.L * total_n, -1.0 / (s + dim));
    return resubstitution_entropy(samples, dim, kernel, h, cfg.boundary);
  }
  throw std::runtime_error("unknown estimator id '" + id + "'");
}

}  // namespace

std::vector<ExperimentRecord> run_bench(const BenchConfig& config,
                                        const std::vector<ExperimentRecord>& existing,
                                        int override_threads) {
  std::vector<DensityModel> models;
  models.reserve(config.densities.size());
  for (const auto& spec : config.densities) models.push_back(make_density(spec));

  std::set<std::pair<CellKey, std::string>> have;
  for (const auto& r : existing)
    have.insert({CellKey{r.density, r.n, r.replicate}, r.estimator});

  struct WorkItem {
    int density_idx;
    long n;
    int replicate;
    std::vector<std::string> estimators;
  };
  std::vector<WorkItem> work;
  for (std::size_t di = 0; di < models.size(); ++di)
    for (long n : config.n_grid)
      for (int r = 0; r < config.replicates; ++r) {
        WorkItem item{static_cast<int>(di), n, r, {}};
        for (const auto& est : config.estimators)
          if (!have.contains({CellKey{models[di].id, n, r}, est})) item.estimators.push_back(est);
        if (!item.estimators.empty()) work.push_back(std::move(item));
      }

  std::vector<std::vector<ExperimentRecord>> produced(work.size());
  parallel_for(
      static_cast<std::int64_t>(work.size()),
      [&](std::int64_t wi) {
        const WorkItem& item = work[wi];
        const DensityModel& model = models[item.density_idx];
        const std::uint64_t seed =
            derive_seed(config.master_seed, model.id, static_cast<std::uint64_t>(item.n),
                        static_cast<std::uint64_t>(item.replicate));
        Rng rng(seed);
        const std::vector<double> samples = sample(model, item.n, rng);
        for (const auto& est : item.estimators) {
          ExperimentRecord rec;
          rec.estimator = est;
          rec.density = model.id;
          rec.n = item.n;
          rec.replicate = item.replicate;
          rec.seed = seed;
          rec.truth = model.entropy_truth;
          const auto t0 = std::chrono::steady_clock::now();
          rec.estimate = run_one_estimator(est, samples, model.dim, config.est, item.n);
          rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                            .count();
          rec.error = rec.estimate - rec.truth;
          produced[wi].push_back(std::move(rec));
        }
      },
      override_threads);

  std::vector<ExperimentRecord> out = existing;
  for (auto& block : produced)
    for (auto& rec : block) out.push_back(std::move(rec));
  return out;
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = kCsvHeader;
  out.push_back('\n');
  for (const auto& r : records) {
    out += csv_field(r.estimator);
    out.push_back(',');
    out += csv_field(r.density);
    out.push_back(',');
    out += std::to_string(r.n);
    out.push_back(',');
    out += std::to_string(r.replicate);
    out.push_back(',');
    out += std::to_string(r.seed);
    out.push_back(',');
    out += fmt_double(r.estimate);
    out.push_back(',');
    out += fmt_double(r.truth);
    out.push_back(',');
    out += fmt_double(r.error);
    out.push_back(',');
    out += fmt_double(r.wall_ms);
    out.push_back('\n');
  }
  return out;
}

std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
  std::vector<ExperimentRecord> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return out;
  if (line != kCsvHeader) throw std::runtime_error("records_from_csv: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw std::runtime_error("records_from_csv: bad row");
    ExperimentRecord r;
    r.estimator = f[0];
    r.density = f[1];
    r.n = std::stol(f[2]);
    r.replicate = std::stoi(f[3]);
    r.seed = std::stoull(f[4]);
    r.estimate = std::stod(f[5]);
    r.truth = std::stod(f[6]);
    r.error = std::stod(f[7]);
    r.wall_ms = std::stod(f[8]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RateFit> fit_rate(const std::vector<ExperimentRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::map<long, std::vector<double>>> groups;
  for (const auto& r : records) groups[{r.estimator, r.density}][r.n].push_back(r.error);

  auto rmse = [](const std::vector<double>& errs) {
    double acc = 0.0;
    for (double e : errs) acc += e * e;
    return std::sqrt(acc / errs.size());
  };
  auto ols_slope = [](const std::vector<double>& lx, const std::vector<double>& ly, double& slope,
                      double& intercept, double& r2) {
    const std::size_t m = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
      syy += ly[i] * ly[i];
    }
    const double denom = m * sxx - sx * sx;
    slope = (m * sxy - sx * sy) / denom;
    intercept = (sy - slope * sx) / m;
    const double ss_tot = syy - sy * sy / m;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double pred = intercept + slope * lx[i];
      ss_res += (ly[i] - pred) * (ly[i] - pred);
    }
    r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  };

  std::vector<RateFit> out;
  for (const auto& [key, by_n] : groups) {
    if (by_n.size() < 3)
      throw std::runtime_error("fit_rate: need >= 3 distinct n for " + key.first + "/" + key.second);
    for (const auto& [n, errs] : by_n)
      if (errs.size() < 20)
        throw std::runtime_error("fit_rate: need >= 20 replicates per n for " + key.first + "/" +
                                 key.second);
    RateFit fit;
    fit.estimator = key.first;
    fit.density = key.second;
    std::vector<double> lx, ly;
    for (const auto& [n, errs] : by_n) {
      fit.n_used.push_back(n);
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(rmse(errs)));
    }
    fit.rmse_at_largest_n = std::exp(ly.back());
    ols_slope(lx, ly, fit.slope, fit.intercept, fit.r_squared);

    // Bootstrap over replicates within each n (200 resamples, fixed seed).
    Rng rng(derive_seed(0x626f6f74ULL, key.first + "|" + key.second, 200, 0));
    std::vector<double> slopes;
    slopes.reserve(200);
    for (int b = 0; b < 200; ++b) {
      std::vector<double> byl;
      for (const auto& [n, errs] : by_n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < errs.size(); ++i) {
          const double e = errs[static_cast<std::size_t>(rng.uniform01() * errs.size())];
          acc += e * e;
        }
        byl.push_back(0.5 * std::log(acc / errs.size()));
      }
      double s, ic, r2;
      ols_slope(lx, byl, s, ic, r2);
      slopes.push_back(s);
    }
    std::sort(slopes.begin(), slopes.end());
    fit.ci_lo = slopes[static_cast<std::size_t>(0.05 * (slopes.size() - 1))];
    fit.ci_hi = slopes[static_cast<std::size_t>(0.95 * (slopes.size() - 1))];
    out.push_back(std::move(fit));
  }
  return out;
}

std::string rate_table_csv(const std::vector<RateFit>& fits) {
  std::string out = "estimator,density,slope,ci_lo,ci_hi,intercept,r_squared,n_count,rmse_at_largest_n\n";
  for (const auto& f : fits) {
    out += csv_field(f.estimator);
    out.push_back(',');
    out += csv_field(f.density);
    out.push_back(',');
    out += fmt_double(f.slope);
    out.push_back(',');
    out += fmt_double(f.ci_lo);
    out.push_back(',');
    out += fmt_double(f.ci_hi);
    out.push_back(',');
    out += fmt_double(f.intercept);
    out.push_back(',');
    out += fmt_double(f.r_squared);
    out.push_back(',');
    out += std::to_string(f.n_used.size());
    out.push_back(',');
    out += fmt_double(f.rmse_at_largest_n);
    out.push_back('\n');
  }
  return out;
}

std::vector<double> read_samples_file(const std::string& path, int& dim_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file '" + path + "'");
  std::vector<double> flat;
  std::string line;
  int dim = 0;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (dim == 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw std::runtime_error("sample file: inconsistent column count at line " +
                               std::to_string(line_no));
    for (double x : row) {
      if (!std::isfinite(x))
        throw std::runtime_error("sample file: non-finite value at line " + std::to_string(line_no));
      flat.push_back(x);
    }
  }
  if (flat.empty()) throw std::runtime_error("sample file: no data rows");
  dim_out = dim;
  return flat;
}

}  // namespace entroscope
