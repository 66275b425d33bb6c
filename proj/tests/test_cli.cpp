#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinctl/equilibria.hpp"
#include "basinctl/models.hpp"
#include "basinctl/trace_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace basinctl;
namespace fs = std::filesystem;

namespace {

const std::string kBin = BASINCTL_BIN;
const std::string kConfigs = CONFIG_DIR;

struct RunResult {
  int exit_code;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {WEXITSTATUS(rc)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "basinctl_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("census command reproduces the library census to full precision") {
  const fs::path out = temp_dir() / "census_1d.csv";
  const RunResult r =
      run_cli("census --config " + kConfigs + "/census_1d.json --out " + out.string());
  REQUIRE(r.exit_code == 0);

  std::ifstream in(out);
  const auto rows = parse_csv(in);
  REQUIRE(rows.size() == 4);  // header + three roots

  const ParamModel m = make_model_1d();
  Box box;
  box.lower = Vec::Constant(1, -2.0);
  box.upper = Vec::Constant(1, 2.0);
  const EquilibriumCensus census = find_equilibria(m, Vec::Zero(1), box, 50, 42);
  REQUIRE(census.equilibria.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[i + 1][1] == to_string(census.equilibria[i].classification));
    CHECK(parse_double(rows[i + 1][2]) == census.equilibria[i].x[0]);
    CHECK(parse_double(rows[i + 1][3]) == census.equilibria[i].eigenvalues[0].real());
  }
}

TEST_CASE("shipped 2D census is byte-deterministic across runs") {
  const fs::path out1 = temp_dir() / "census_2d_a.csv";
  const fs::path out2 = temp_dir() / "census_2d_b.csv";
  REQUIRE(run_cli("census --config " + kConfigs + "/census_2d.json --out " + out1.string())
              .exit_code == 0);
  REQUIRE(run_cli("census --config " + kConfigs + "/census_2d.json --out " + out2.string())
              .exit_code == 0);
  const std::string a = slurp(out1);
  CHECK(!a.empty());
  CHECK(a == slurp(out2));
  // Fig-4 layout: at least 9 equilibria.
  std::istringstream in(a);
  CHECK(parse_csv(in).size() >= 10);
}

TEST_CASE("json output format parses and matches csv values") {
  const fs::path out = temp_dir() / "census_1d.json";
  REQUIRE(run_cli("census --config " + kConfigs + "/census_1d.json --format json --out " +
                  out.string())
              .exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["counts"]["stable"] == 2);
  CHECK(j["counts"]["saddle"] == 1);
  REQUIRE(j["equilibria"].size() == 3);
  CHECK(j["equilibria"][0]["x"][0].get<double>() == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("boolean report is deterministic and flags the epithelial discrepancy") {
  const fs::path out1 = temp_dir() / "bool_a.csv";
  const fs::path out2 = temp_dir() / "bool_b.csv";
  REQUIRE(run_cli("boolean --out " + out1.string()).exit_code == 0);
  REQUIRE(run_cli("boolean --out " + out2.string()).exit_code == 0);
  const std::string a = slurp(out1);
  CHECK(a == slurp(out2));
  CHECK(a.find("(1,0,1,0)") != std::string::npos);
  CHECK(a.find("(0,1,1,1)") != std::string::npos);
  CHECK(a.find("discrepancy") != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
  const fs::path bad = temp_dir() / "bad.json";
  std::ofstream(bad) << R"({"model": {"name": "model1d"}, "unknown_block": 1})";
  CHECK(run_cli("census --config " + bad.string()).exit_code == 2);

  const fs::path missing = temp_dir() / "missing_census.json";
  std::ofstream(missing) << R"({"model": {"name": "model1d"}})";
  CHECK(run_cli("census --config " + missing.string()).exit_code == 2);

  CHECK(run_cli("census --config " + (temp_dir() / "nonexistent.json").string()).exit_code == 2);
  CHECK(run_cli("definitely-not-a-command").exit_code == 2);
}

TEST_CASE("computation failures exit with code 3") {
  const fs::path cfg = temp_dir() / "empty_box.json";
  std::ofstream(cfg) << R"({
    "model": {"name": "model1d"},
    "census": {"box": {"lower": [5.0], "upper": [6.0]}, "n_seeds": 20}
  })";
  const fs::path out = temp_dir() / "never.csv";
  CHECK(run_cli("census --config " + cfg.string() + " --out " + out.string()).exit_code == 3);
}

TEST_CASE("ambiguous selectors exit with code 4") {
  const fs::path cfg = temp_dir() / "ambiguous.json";
  std::ofstream(cfg) << R"({
    "model": {"name": "model1d"},
    "census": {"box": {"lower": [-2.0], "upper": [2.0]}, "n_seeds": 50},
    "control": {"mode": "eigenvalue", "anchor": [0.0],
                "eigen": {"indices": [0], "delta": 0.1}}
  })";
  CHECK(run_cli("control --config " + cfg.string() + " --out " +
                (temp_dir() / "amb.csv").string())
            .exit_code == 4);
}

TEST_CASE("n_ite = 0 writes a header-only trace") {
  const fs::path cfg = temp_dir() / "zero_iter.json";
  std::ofstream(cfg) << R"({
    "model": {"name": "model1d"},
    "census": {"box": {"lower": [-2.0], "upper": [2.0]}, "n_seeds": 50},
    "control": {"mode": "eigenvalue", "n_ite": 0, "anchor": [0.9],
                "eigen": {"indices": [0], "delta": 0.5}}
  })";
  const fs::path out = temp_dir() / "zero_iter.csv";
  REQUIRE(run_cli("control --config " + cfg.string() + " --out " + out.string()).exit_code == 0);
  std::ifstream in(out);
  const auto rows = parse_csv(in);
  CHECK(rows.size() == 1);
  CHECK(rows[0][0] == "iteration");
}

TEST_CASE("control command writes the reproduction trace") {
  const fs::path out = temp_dir() / "control_2d.csv";
  REQUIRE(run_cli("control --config " + kConfigs + "/control_2d.json --out " + out.string())
              .exit_code == 0);
  std::ifstream in(out);
  const auto rows = parse_csv(in);
  REQUIRE(rows.size() >= 3);
  CHECK(rows.back().back().find("termination: goal_reached") != std::string::npos);

  // Final targeted eigenvalues are at least one unit below the initial ones.
  const auto& header = rows[0];
  int col_l0 = -1, col_l1 = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "lambda_0_re") col_l0 = static_cast<int>(c);
    if (header[c] == "lambda_1_re") col_l1 = static_cast<int>(c);
  }
  REQUIRE(col_l0 >= 0);
  REQUIRE(col_l1 >= 0);
  CHECK(parse_double(rows.back()[col_l0]) <= parse_double(rows[1][col_l0]) - 1.0);
  CHECK(parse_double(rows.back()[col_l1]) <= parse_double(rows[1][col_l1]) - 1.0);
}

TEST_CASE("seed override changes sampling but keeps determinism") {
  const fs::path cfg = temp_dir() / "basin_1d.json";
  std::ofstream(cfg) << R"({
    "model": {"name": "model1d"},
    "seed": 5,
    "census": {"box": {"lower": [-2.0], "upper": [2.0]}, "n_seeds": 50},
    "basin": {"box": {"lower": [-2.0], "upper": [2.0]}, "n_samples": 400, "t_max": 200.0}
  })";
  const fs::path a = temp_dir() / "basin_a.csv";
  const fs::path b = temp_dir() / "basin_b.csv";
  const fs::path c = temp_dir() / "basin_c.csv";
  REQUIRE(run_cli("basin --config " + cfg.string() + " --out " + a.string()).exit_code == 0);
  REQUIRE(run_cli("basin --config " + cfg.string() + " --out " + b.string()).exit_code == 0);
  REQUIRE(run_cli("basin --config " + cfg.string() + " --seed 6 --out " + c.string()).exit_code ==
          0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));

  // Thread count must not change the bytes.
  const fs::path d = temp_dir() / "basin_d.csv";
  REQUIRE(run_cli("basin --config " + cfg.string() + " --threads 3 --out " + d.string())
              .exit_code == 0);
  CHECK(slurp(a) == slurp(d));
}

TEST_CASE("checked-in EMT defaults document matches the library values") {
  const auto j = nlohmann::json::parse(slurp(fs::path(kConfigs) / "emt_default_params.json"));
  const EmtParams q = emt_default_params();
  REQUIRE(j["alpha"].size() == 11);
  for (int i = 0; i < 11; ++i) CHECK(j["alpha"][i].get<double>() == q.alpha[i]);
  REQUIRE(j["k"].size() == 16);
  for (int i = 0; i < 16; ++i) CHECK(j["k"][i].get<double>() == q.k[i]);
  CHECK(j["beta"]["S"].get<double>() == q.beta_S);
  CHECK(j["beta"]["E"].get<double>() == q.beta_E);
  CHECK(j["beta"]["N"].get<double>() == q.beta_N);
  CHECK(j["beta"]["P"].get<double>() == q.beta_P);
  CHECK(j["p"].get<double>() == q.p);
}
