#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "entroscope/rng.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ENTROSCOPE_CLI_PATH) + " " + args + " > cli_out.txt 2> cli_err.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string out_text() {
  std::ifstream in("cli_out.txt");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("cli usage errors exit 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("estimate") == 1);  // missing required arguments
}

TEST_CASE("cli data errors exit 2") {
  CHECK(run("estimate missing_file.txt missing_cfg.json") == 2);
  CHECK(run("bench missing_cfg.json") == 2);
  CHECK(run("rate missing.csv") == 2);
}

TEST_CASE("cli selfcheck exits 0 on a clean build") {
  CHECK(run("selfcheck") == 0);
  const std::string text = out_text();
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}

TEST_CASE("cli estimate and rate round trip") {
  {
    std::ofstream cfg("cli_cfg.json");
    cfg << R"({"class": {"s": 2, "p": 2, "d": 1, "L": 2}})";
    std::ofstream sm("cli_samples.txt");
    sm << "# three hundred uniform points\n";
    entroscope::Rng rng(5);
    sm.precision(17);
    for (int i = 0; i < 300; ++i) sm << rng.uniform01() << "\n";
  }
  CHECK(run("estimate cli_samples.txt cli_cfg.json") == 0);
  const std::string text = out_text();
  CHECK(text.find("entropy=") != std::string::npos);
  CHECK(text.find("h=") != std::string::npos);
  CHECK(text.find("nonsmooth_fraction=") != std::string::npos);

  {
    std::ofstream cfg("cli_bench.json");
    cfg << R"({
      "densities": [{"kind": "uniform_cube", "d": 1}],
      "estimators": ["optimal"],
      "n_grid": [300, 600, 1200],
      "replicates": 20,
      "master_seed": 3,
      "estimator_config": {"class": {"s": 2, "p": 2, "d": 1, "L": 2}},
      "output": "cli_results.csv"
    })";
  }
  std::remove("cli_results.csv");
  CHECK(run("bench cli_bench.json") == 0);
  CHECK(run("rate cli_results.csv") == 0);
  CHECK(out_text().find("estimator,density,slope") == 0);

  // byte-identical rerun of the same config leaves the CSV unchanged
  std::ifstream first("cli_results.csv", std::ios::binary);
  std::stringstream b1;
  b1 << first.rdbuf();
  CHECK(run("bench cli_bench.json") == 0);
  std::ifstream second("cli_results.csv", std::ios::binary);
  std::stringstream b2;
  b2 << second.rdbuf();
  CHECK(b1.str() == b2.str());

  for (const char* f : {"cli_cfg.json", "cli_samples.txt", "cli_bench.json", "cli_results.csv",
                        "cli_out.txt", "cli_err.txt"})
    std::remove(f);
}

TEST_CASE("cli lower-bound report") {
  {
    std::ofstream cfg("cli_lb.json");
    cfg << R"({"q": 1, "k": 6, "n": 10000, "d3": 1.0, "grid_m": 128, "out_prefix": "cli_lb"})";
  }
  CHECK(run("lb cli_lb.json") == 0);
  const std::string text = out_text();
  CHECK(text.find("entropy-functional gap") != std::string::npos);
  CHECK(text.find("poisson mixture TV") != std::string::npos);
  std::ifstream weights("cli_lb_weights.csv");
  CHECK(weights.good());
  for (const char* f : {"cli_lb.json", "cli_lb_weights.csv", "cli_lb_residuals.csv", "cli_out.txt",
                        "cli_err.txt"})
    std::remove(f);
}

TEST_CASE("cli estimate with an orlicz tail section") {
  {
    std::ofstream cfg("cli_orlicz.json");
    cfg << R"({"class": {"s": 1, "p": 2, "d": 1, "L": 2}, "orlicz": {"q": 1}})";
    std::ofstream sm("cli_orlicz_samples.txt");
    entroscope::Rng rng(9);
    sm.precision(17);
    for (int i = 0; i < 3 * 200; ++i) sm << 4.0 * rng.uniform01() - 2.0 << "\n";
  }
  CHECK(run("estimate cli_orlicz_samples.txt cli_orlicz.json") == 0);
  const std::string text = out_text();
  CHECK(text.find("truncated_samples=") != std::string::npos);
  for (const char* f : {"cli_orlicz.json", "cli_orlicz_samples.txt", "cli_out.txt", "cli_err.txt"})
    std::remove(f);
}
