#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "bnpreg/cli.hpp"

using namespace bnpreg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bnpreg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path path = dir / "experiment.cfg";
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kSmallSpline =
    "prior.kind = spline\ntruth.alpha = 1\ntruth.radius = 2\ngrid.n = 100, 200, 400\n"
    "replications = 4\nposterior.draws = 50\nseed = 5\n";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const Run missing = run({"contract", "--config", "/no/such/dir/x.cfg"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/no/such/dir/x.cfg") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"contract", "--threads", "0"}).code == 2);
  CHECK(run({"--help"}).code == 0);

  const fs::path dir = scratch("bad");
  const Run bad = run({"contract", "--config", write_config(dir, "prior.kind = spline\nbogus.key = 1\n").string(),
                       "--out-dir", dir.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bogus.key") != std::string::npos);
}

TEST_CASE("contract writes the rate table and fit") {
  const fs::path dir = scratch("contract");
  const fs::path cfg = write_config(dir, kSmallSpline);
  const Run r = run({"contract", "--config", cfg.string(), "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "rate_table.csv");
  CHECK(csv.rfind("n,replication,err_mean,err_q50,err_q90\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  const auto fit = nlohmann::json::parse(slurp(dir / "rate_fit.json"));
  CHECK(fit["n_values"].size() == 3);
}

TEST_CASE("thread count does not change output bytes") {
  const fs::path one = scratch("threads1");
  const fs::path four = scratch("threads4");
  const fs::path cfg = write_config(one, kSmallSpline);
  REQUIRE(run({"contract", "--config", cfg.string(), "--out-dir", one.string(), "--threads", "1"}).code == 0);
  REQUIRE(run({"contract", "--config", cfg.string(), "--out-dir", four.string(), "--threads", "4"}).code == 0);
  CHECK(slurp(one / "rate_table.csv") == slurp(four / "rate_table.csv"));
  CHECK(slurp(one / "rate_fit.json") == slurp(four / "rate_fit.json"));

  // --seed overrides the file and changes the study.
  const fs::path other = scratch("seed");
  REQUIRE(run({"contract", "--config", cfg.string(), "--out-dir", other.string(), "--seed", "6"}).code == 0);
  CHECK(slurp(one / "rate_table.csv") != slurp(other / "rate_table.csv"));
}

TEST_CASE("sample-prior, fit and test-power") {
  const fs::path dir = scratch("misc");
  const fs::path prior_cfg = write_config(dir, "prior.kind = random_series\ngrid.n = 100\nsample.count = 7\n");
  REQUIRE(run({"sample-prior", "--config", prior_cfg.string(), "--out-dir", dir.string()}).code == 0);
  const std::string draws = slurp(dir / "prior_draws.jsonl");
  CHECK(std::count(draws.begin(), draws.end(), '\n') == 7);

  const fs::path fit_cfg = write_config(
      dir, "prior.kind = random_series\ngrid.n = 100\nmcmc.iterations = 300\nmcmc.burn_in = 100\n");
  REQUIRE(run({"fit", "--config", fit_cfg.string(), "--out-dir", dir.string()}).code == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "fit_summary.json"));
  CHECK(summary["kept"].get<int>() == 200);
  CHECK(summary["acceptance"].contains("birth"));

  const fs::path test_cfg = write_config(dir, "test.n = 50, 100\ntest.f1 = 0, 0.3\ntest.replications = 200\n");
  REQUIRE(run({"test-power", "--config", test_cfg.string(), "--out-dir", dir.string()}).code == 0);
  const std::string csv = slurp(dir / "test_power.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("check-conditions reports passing conditions") {
  const fs::path dir = scratch("check");
  const Run r = run({"check-conditions", "--out-dir", dir.string()});
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "conditions.json"));
  CHECK(report["block_conditions"]["pass"].get<bool>());
  CHECK(report["discrepancy"].size() == 5);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(BNPREG_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg" || entry.path().filename() == "test_power.cfg") continue;
    INFO(entry.path());
    // Sampling a few prior draws exercises parsing and validation without a full study.
    const fs::path dir = scratch("shipped");
    CHECK(run({"sample-prior", "--config", entry.path().string(), "--out-dir", dir.string()}).code == 0);
  }
}
