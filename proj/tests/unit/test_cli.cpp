#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "vpd/io.hpp"

using namespace vpd;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
  const fs::path d = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << body;
  return p;
}

const char* kHeaviside = R"({"epsilon": 0.05, "grid": {"n1": 128, "n2": 128}})";

}  // namespace

TEST(Solve, WritesOutputsAndManifest) {
  const fs::path d = workdir("solve_ok");
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_solve(write_config(d, kHeaviside).string(), (d / "out").string(), log), cli::kSuccess)
      << log.str();
  for (const char* f : {"bundle.json", "zeta.csv", "psi.csv", "velocity.csv", "zeta_full.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(d / "out" / f)) << f;
  }
  const auto m = nlohmann::json::parse(read_text((d / "out" / "manifest.json").string()));
  EXPECT_EQ(m["outputs"].size(), 5u);
  for (const auto& o : m["outputs"]) {
    EXPECT_EQ(o["sha256"], cli::sha256_file((d / "out" / o["path"].get<std::string>()).string()));
  }
  EXPECT_EQ(m["config_sha256"], cli::sha256_text(config_to_json(parse_config(m["config"].dump()))));
}

TEST(Solve, AdmissibilityViolationIsAConfigError) {
  const fs::path d = workdir("solve_20");
  std::ostringstream log;
  const auto cfg = write_config(d, R"({"epsilon": 2.0, "grid": {"n1": 32, "n2": 32}})");
  EXPECT_EQ(cli::cmd_solve(cfg.string(), (d / "out").string(), log), cli::kConfigError);
  EXPECT_NE(log.str().find("(sup f / eps^2)|D| > kappa"), std::string::npos) << log.str();
  EXPECT_FALSE(fs::exists(d / "out" / "bundle.json"));
}

TEST(Solve, MissingOrMalformedConfig) {
  const fs::path d = workdir("solve_bad");
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_solve((d / "nope.json").string(), (d / "out").string(), log), cli::kConfigError);
  EXPECT_EQ(cli::cmd_solve(write_config(d, "{ not json").string(), (d / "out").string(), log), cli::kConfigError);
}

TEST(Solve, UnconvergedBundleIsStillWritten) {
  const fs::path d = workdir("solve_unconv");
  std::ostringstream log;
  const auto cfg = write_config(d, R"({"epsilon": 0.05, "max_iter": 1, "grid": {"n1": 64, "n2": 64}})");
  EXPECT_EQ(cli::cmd_solve(cfg.string(), (d / "out").string(), log), cli::kUnconverged);
  const auto b = nlohmann::json::parse(read_text((d / "out" / "bundle.json").string()));
  EXPECT_FALSE(b["converged"].get<bool>());
  EXPECT_TRUE(fs::exists(d / "out" / "manifest.json"));
}

TEST(Solve, OutputsAreByteIdentical) {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const fs::path d = workdir("solve_det");
  const auto cfg = write_config(d, R"({"epsilon": 0.05, "profile": {"kind": "power", "p": 1},
                                      "grid": {"n1": 64, "n2": 64}})");
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_solve(cfg.string(), (d / "a").string(), log), cli::kSuccess) << log.str();
  ASSERT_EQ(cli::cmd_solve(cfg.string(), (d / "b").string(), log), cli::kSuccess) << log.str();
  ::unsetenv("SOURCE_DATE_EPOCH");
  for (const char* f : {"bundle.json", "zeta.csv", "psi.csv", "velocity.csv", "zeta_full.csv", "manifest.json"}) {
    EXPECT_EQ(read_text((d / "a" / f).string()), read_text((d / "b" / f).string())) << f;
  }
}

TEST(Sweep, NeedsThreeEpsilons) {
  const fs::path d = workdir("sweep_one");
  std::ostringstream log;
  const auto cfg = write_config(d, kHeaviside);
  EXPECT_EQ(cli::cmd_sweep(cfg.string(), {0.05}, (d / "out").string(), log), cli::kConfigError);
  EXPECT_EQ(cli::cmd_sweep(cfg.string(), {0.1, 0.05, 0.05}, (d / "out").string(), log), cli::kConfigError);
  EXPECT_EQ(cli::cmd_sweep(cfg.string(), {0.1, 0.05, 3.0}, (d / "out").string(), log), cli::kConfigError);
}

TEST(Sweep, DefaultEpsilonsWriteBothFits) {
  const fs::path d = workdir("sweep_default");
  std::ostringstream log;
  const auto cfg = write_config(d, kHeaviside);
  ASSERT_EQ(cli::cmd_sweep(cfg.string(), {0.1, 0.07, 0.05, 0.035, 0.025}, (d / "out").string(), log),
            cli::kSuccess)
      << log.str();
  const double pi = std::acos(-1.0);
  const auto mu = nlohmann::json::parse(read_text((d / "out" / "fit_mu.json").string()));
  const auto en = nlohmann::json::parse(read_text((d / "out" / "fit_energy_E.json").string()));
  EXPECT_NEAR(mu["expected_slope"].get<double>(), 1.0 / (2.0 * pi), 1e-15);
  EXPECT_NEAR(en["expected_slope"].get<double>(), 1.0 / (4.0 * pi), 1e-15);
  EXPECT_EQ(mu["n_points"], 5);
  std::ifstream csv(d / "out" / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header,
            "epsilon,lambda,mu,energy_E,core_energy_I,penalty_J,diameter,centroid_x1,centroid_x2,residual,converged");
}

TEST(Sweep, UnconvergedPointIsExcludedFromFits) {
  const fs::path d = workdir("sweep_unconv");
  std::ostringstream log;
  const auto cfg = write_config(d, R"({"epsilon": 0.05, "profile": {"kind": "power", "p": 1}, "max_iter": 150,
                                      "grid": {"n1": 128, "n2": 128}})");
  EXPECT_EQ(cli::cmd_sweep(cfg.string(), {0.1, 0.07, 0.05, 0.035, 0.025}, (d / "out").string(), log), cli::kUnconverged)
      << log.str();
  const auto mu = nlohmann::json::parse(read_text((d / "out" / "fit_mu.json").string()));
  EXPECT_EQ(mu["n_points"], 4) << log.str();
  EXPECT_NE(log.str().find("epsilon = 0.035 did not converge"), std::string::npos) << log.str();
}

TEST(Verify, FreshBundlePasses) {
  const fs::path d = workdir("verify_ok");
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_solve(write_config(d, kHeaviside).string(), (d / "out").string(), log), cli::kSuccess);
  std::ostringstream vlog;
  EXPECT_EQ(cli::cmd_verify((d / "out").string(), vlog), cli::kSuccess) << vlog.str();
  EXPECT_EQ(vlog.str().find("FAIL"), std::string::npos);
}

TEST(Verify, PowerBundlePasses) {
  const fs::path d = workdir("verify_power");
  std::ostringstream log;
  const auto cfg = write_config(d, R"({"epsilon": 0.05, "profile": {"kind": "power", "p": 2},
                                      "grid": {"n1": 128, "n2": 128}})");
  ASSERT_EQ(cli::cmd_solve(cfg.string(), (d / "out").string(), log), cli::kSuccess) << log.str();
  std::ostringstream vlog;
  EXPECT_EQ(cli::cmd_verify((d / "out").string(), vlog), cli::kSuccess) << vlog.str();
}

TEST(Verify, PerturbedFieldFailsResidual) {
  const fs::path d = workdir("verify_tamper");
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_solve(write_config(d, kHeaviside).string(), (d / "out").string(), log), cli::kSuccess);
  const GridSpec g = build_grid(1.0, 128, 128);
  const std::string path = (d / "out" / "zeta.csv").string();
  ScalarField z = read_field_csv(path, g, FieldRole::vorticity);
  const auto [i, j] = g.locate({1.0, 0.002});
  z(i, j) = 0.5 * z(i, j);
  write_field_csv(path, z);
  std::ostringstream vlog;
  EXPECT_EQ(cli::cmd_verify((d / "out").string(), vlog), cli::kVerificationFailed);
  const std::string out = vlog.str();
  const auto row = out.find("residual L1 / kappa");
  ASSERT_NE(row, std::string::npos);
  EXPECT_NE(out.substr(row, out.find('\n', row) - row).find("FAIL"), std::string::npos) << out;
}

TEST(Verify, GridMismatchIsAConfigError) {
  const fs::path d = workdir("verify_grid");
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_solve(write_config(d, kHeaviside).string(), (d / "out").string(), log), cli::kSuccess);
  const std::string path = (d / "out" / "bundle.json").string();
  auto b = nlohmann::json::parse(read_text(path));
  b["grid"]["n1"] = 96;
  write_text(path, b.dump(2));
  std::ostringstream vlog;
  EXPECT_EQ(cli::cmd_verify((d / "out").string(), vlog), cli::kConfigError) << vlog.str();
}

TEST(Verify, UnreadableBundle) {
  const fs::path d = workdir("verify_missing");
  std::ostringstream vlog;
  EXPECT_EQ(cli::cmd_verify((d / "nothing").string(), vlog), cli::kConfigError);
  ASSERT_EQ(cli::cmd_solve(write_config(d, kHeaviside).string(), (d / "out").string(), vlog), cli::kSuccess);
  write_text((d / "out" / "psi.csv").string(), "x1,x2,value\n1,2,3\n");
  EXPECT_EQ(cli::cmd_verify((d / "out").string(), vlog), cli::kConfigError);
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(cli::sha256_text("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
