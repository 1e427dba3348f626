#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "hisd/cli.hpp"
#include "hisd/errors.hpp"

using namespace hisd;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = HISD_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hisd_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hisd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json index1_doc() {
  auto doc = nlohmann::json::parse(slurp(kConfigs / "fig1_index1.json"));
  return doc;
}

}  // namespace

TEST_CASE("bundled configs parse and prepare") {
  for (const char* name : {"table1.json", "table2.json", "fig1_index1.json", "fig1_index2.json",
                           "fig2.json", "residual_index1.json", "residual_sphere.json",
                           "check.json"}) {
    CAPTURE(name);
    const ExperimentConfig cfg = load_config(kConfigs / name);
    CHECK_NOTHROW(prepare(cfg));
  }
  const ExperimentConfig t1 = load_config(kConfigs / "table1.json");
  CHECK(t1.mode == Mode::Converge);
  REQUIRE(t1.taus.size() == 4);
  CHECK(t1.taus[0] == 7 * 0x1p-6);
  CHECK(t1.ref_tau == 7 * 0x1p-13);

  const PreparedExperiment t2 = prepare(load_config(kConfigs / "table2.json"));
  CHECK(t2.init.frame.orthonormality_defect() > 0.1);  // used verbatim
  REQUIRE(t2.warnings.size() == 1);
}

TEST_CASE("load-time adjustments") {
  ExperimentConfig cfg = parse_config(index1_doc());
  cfg.x0 = Eigen::Vector2d(1.0, 0.5);
  cfg.v0 = Eigen::Vector2d(-1.0, -1.0);
  const PreparedExperiment p = prepare(cfg);
  CHECK(std::abs(p.init.frame.vector(0).norm() - 1.0) < 1e-15);
  REQUIRE(p.warnings.size() == 1);

  cfg.v0 = Eigen::Vector2d(-std::sqrt(0.5), -std::sqrt(0.5));
  CHECK(prepare(cfg).warnings.empty());

  ExperimentConfig sphere = parse_config(nlohmann::json::parse(slurp(kConfigs / "residual_sphere.json")));
  sphere.x0 = Eigen::Vector2d(2.0, 2.0);
  sphere.v0 = Eigen::Vector2d(0.0, 1.0);
  const PreparedExperiment s = prepare(sphere);
  CHECK(std::abs(s.init.x.norm() - 1.0) < 1e-15);
  CHECK(std::abs(s.init.frame.vector(0).dot(s.init.x)) < 1e-15);
  CHECK(s.warnings.size() == 3);
}

TEST_CASE("parse errors name the field") {
  auto doc = index1_doc();
  doc["k"] = 3;
  try {
    prepare(parse_config(doc));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "k");
  }
  doc = index1_doc();
  doc["tau"] = "fast";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = index1_doc();
  doc["mode"] = "dance";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = index1_doc();
  doc["scheme"] = "rk4";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("run command") {
  const fs::path dir = scratch("run");
  const Result r = invoke({"--config", (kConfigs / "fig1_index1.json").string(), "--output",
                           dir.string(), "--svg"});
  CHECK(r.code == cli::exit_code::kSuccess);
  CHECK(r.out.find("|F(x_N)|") != std::string::npos);
  const std::string csv = slurp(dir / "trajectory.csv");
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 702);
  CHECK(rows[0] == "t,x1,x2,v1_1,v1_2");
  CHECK(csv.back() == '\n');
  CHECK(fs::exists(dir / "trajectory.svg"));

  // Final x within 1e-2 of the index-1 saddle.
  std::istringstream last(rows.back());
  std::string t, x1, x2;
  std::getline(last, t, ',');
  std::getline(last, x1, ',');
  std::getline(last, x2, ',');
  CHECK(std::hypot(std::stod(x1), std::stod(x2)) < 1e-2);

  // Byte-identical on repeat.
  const fs::path again = scratch("run_again");
  invoke({"--config", (kConfigs / "fig1_index1.json").string(), "--output", again.string()});
  CHECK(slurp(again / "trajectory.csv") == csv);
}

TEST_CASE("run command, index-2 config") {
  const fs::path dir = scratch("run2");
  const Result r =
      invoke({"--config", (kConfigs / "fig1_index2.json").string(), "--output", dir.string()});
  CHECK(r.code == cli::exit_code::kSuccess);
  CHECK(r.err.find("warning") != std::string::npos);
  const auto rows = lines(slurp(dir / "trajectory.csv"));
  std::istringstream last(rows.back());
  std::string t, x1, x2;
  std::getline(last, t, ',');
  std::getline(last, x1, ',');
  std::getline(last, x2, ',');
  CHECK(std::hypot(std::stod(x1) - 1.0, std::stod(x2)) < 1e-2);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(invoke({}).code == cli::exit_code::kConfigError);
  CHECK(invoke({"--config", (dir / "missing.json").string()}).code == cli::exit_code::kConfigError);
  {
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(invoke({"--config", (dir / "broken.json").string()}).code == cli::exit_code::kConfigError);
  }
  auto doc = index1_doc();
  doc["k"] = 3;
  const Result bad_k = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string()});
  CHECK(bad_k.code == cli::exit_code::kConfigError);
  CHECK(bad_k.err.find("[k]") != std::string::npos);

  doc = index1_doc();
  doc["model"] = {{"name", "quadratic"}, {"matrix", {{-100.0, 0.0}, {0.0, -100.0}}}};
  doc["T"] = 100.0;
  const Result diverged = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string()});
  CHECK(diverged.code == cli::exit_code::kDivergence);
}

TEST_CASE("converge command") {
  const fs::path dir = scratch("converge");
  auto doc = nlohmann::json::parse(slurp(kConfigs / "table1.json"));
  doc["tau"] = {7 * 0x1p-6};
  doc["ref_tau"] = 7 * 0x1p-10;
  Result r = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string()});
  CHECK(r.code == cli::exit_code::kSuccess);
  auto rows = lines(slurp(dir / "convergence.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "tau,err_x,cr_x,err_v1,cr_v1");
  CHECK(rows[1].find(",,") != std::string::npos);

  doc["tau"] = {7 * 0x1p-6, 7 * 0x1p-7};
  r = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string(), "--strict"});
  CHECK(r.code == cli::exit_code::kSuccess);
  rows = lines(slurp(dir / "convergence.csv"));
  REQUIRE(rows.size() == 3);

  doc["tau"] = {7 * 0x1p-6, 7 * 0x1p-10};
  r = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string()});
  CHECK(r.code == cli::exit_code::kConfigError);
}

TEST_CASE("converge --strict fails on a non-first-order rate") {
  // Only 2^-6 vs 2^-7 against a reference two halvings away: the rate drifts
  // above 1.3 because the reference error is no longer negligible.
  const fs::path dir = scratch("strict");
  auto doc = nlohmann::json::parse(slurp(kConfigs / "table1.json"));
  doc["tau"] = {7 * 0x1p-6, 7 * 0x1p-7};
  doc["ref_tau"] = 7 * 0x1p-8;
  const Result r = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string(), "--strict"});
  CHECK(r.code == cli::exit_code::kCheckFailed);
  const Result lax = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string()});
  CHECK(lax.code == cli::exit_code::kSuccess);
}

TEST_CASE("compare command") {
  const fs::path dir = scratch("compare");
  auto doc = nlohmann::json::parse(slurp(kConfigs / "fig2.json"));
  doc["tau"] = {0.01, 0.005};
  Result r = invoke({"--config", write_config(dir, doc).string(), "--output", dir.string(), "--svg"});
  CHECK(r.code == cli::exit_code::kSuccess);
  REQUIRE(fs::exists(dir / "difference_N700.csv"));
  REQUIRE(fs::exists(dir / "difference_N1400.csv"));
  CHECK(fs::exists(dir / "difference_x.svg"));
  const auto rows = lines(slurp(dir / "difference_N700.csv"));
  CHECK(rows[0] == "t,dx,dv1");
  CHECK(rows[1] == "0.00000000000e+00,0.00000000000e+00,0.00000000000e+00");

  doc["compare_with"] = "gs";
  const fs::path same = scratch("compare_same");
  r = invoke({"--config", write_config(same, doc).string(), "--output", same.string()});
  CHECK(r.code == cli::exit_code::kSuccess);
  for (const auto& row : lines(slurp(same / "difference_N700.csv"))) {
    if (row[0] == 't') continue;
    CHECK(row.substr(row.find(',')) == ",0.00000000000e+00,0.00000000000e+00");
  }

  doc["scheme"] = "constrained";
  r = invoke({"--config", write_config(same, doc).string(), "--output", same.string()});
  CHECK(r.code == cli::exit_code::kConfigError);
}

TEST_CASE("residual command") {
  const fs::path dir = scratch("residual");
  const Result r =
      invoke({"--config", (kConfigs / "residual_sphere.json").string(), "--output", dir.string()});
  CHECK(r.code == cli::exit_code::kSuccess);
  CHECK(r.out.find("slope x") != std::string::npos);
  CHECK(lines(slurp(dir / "residual.csv")).size() == 5);
}

TEST_CASE("check command") {
  const ExperimentConfig cfg = load_config(kConfigs / "check.json");
  SUBCASE("double well passes") {
    std::ostringstream out;
    CHECK(cli::cmd_check(cfg, make_double_well(), out) == cli::exit_code::kSuccess);
    CHECK(out.str().find("FAIL") == std::string::npos);
    CHECK(invoke({"--config", (kConfigs / "check.json").string()}).code == cli::exit_code::kSuccess);
  }
  SUBCASE("corrupted gradient fails") {
    EnergyModel bad = make_double_well();
    bad.neg_gradient = [](const Vector& p) {
      Vector f(2);
      f << p(0) * p(0) * p(0) - 0.9 * p(0), p(1);
      return f;
    };
    std::ostringstream out;
    CHECK(cli::cmd_check(cfg, bad, out) == cli::exit_code::kCheckFailed);
    CHECK(out.str().find("FAIL gradient") != std::string::npos);
  }
  SUBCASE("dimer error drops about fourfold per halving") {
    for (const cli::CheckGroup& g : cli::run_checks(cfg, make_double_well())) {
      if (g.name == "dimer_order") CHECK(g.passed);
    }
  }
}
