// Runs the mvps binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mvps_cli_" + name);
  fs::remove_all(p);
  return p;
}

int mvps(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MVPS_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSmall = "--set grid.cells=[32,32,32] --set run.particles=1000 --set run.t_end=0.6283185307179586";

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  const fs::path out = scratch("usage");
  fs::create_directories(out);
  EXPECT_EQ(mvps("frobnicate", out / "log"), 2);
  EXPECT_NE(slurp(out / "log").find("verify-kinematics"), std::string::npos);
  EXPECT_EQ(mvps("", out / "log"), 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path out = scratch("config");
  fs::create_directories(out);
  EXPECT_EQ(mvps("simulate --out " + out.string() + " --set run.dt=1 --set mag.omega=100", out / "log"), 2);
  EXPECT_NE(slurp(out / "log").find("exceeds"), std::string::npos);
  EXPECT_EQ(mvps("simulate --out " + out.string() + " --set run.nope=1", out / "log"), 2);
  EXPECT_EQ(mvps("simulate --config /nonexistent.ini", out / "log"), 2);
  EXPECT_EQ(mvps("scan-singularity --out " + out.string() + " --set mag.omega=0", out / "log"), 2);
}

TEST(Cli, VerifyKinematicsPassesWithManifest) {
  const fs::path out = scratch("kin");
  ASSERT_EQ(mvps("verify-kinematics --out " + out.string() + " --set harness.kinematics_samples=200",
                 fs::temp_directory_path() / "mvps_cli_kin.log"),
            0);
  for (const char* f : {"config.ini", "reports.txt", "summary.csv", "manifest.sha256"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_NE(slurp(out / "reports.txt").find("kinematics.group_law.pass=true"), std::string::npos);
  const std::string check = "cd " + out.string() + " && sha256sum --quiet -c manifest.sha256";
  EXPECT_EQ(std::system(check.c_str()), 0);
  EXPECT_EQ(slurp(out / "manifest.sha256").find("manifest.sha256"), std::string::npos);
}

TEST(Cli, SimulateWritesSeries) {
  const fs::path out = scratch("sim");
  ASSERT_EQ(mvps("simulate --out " + out.string() + " " + kSmall, fs::temp_directory_path() / "mvps_cli_sim.log"), 0);
  std::ifstream in(out / "series.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,M0,", 0), 0u) << header;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_GE(rows, 2);
  EXPECT_NE(slurp(out / "manifest.sha256").find("series.csv"), std::string::npos);
}

TEST(Cli, DeterministicRunsAreBitwiseIdentical) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string args = std::string(kSmall) + " --deterministic --seed 5 --out ";
  ASSERT_EQ(mvps("simulate " + args + a.string(), fs::temp_directory_path() / "mvps_cli_det.log"), 0);
  ASSERT_EQ(mvps("simulate " + args + b.string(), fs::temp_directory_path() / "mvps_cli_det.log"), 0);
  EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
  EXPECT_NE(slurp(a / "config.ini").find("seed = 5"), std::string::npos);
}

TEST(Cli, EchoedConfigReproducesRun) {
  const fs::path a = scratch("echo_a"), b = scratch("echo_b");
  const fs::path log = fs::temp_directory_path() / "mvps_cli_echo.log";
  ASSERT_EQ(mvps("simulate --deterministic " + std::string(kSmall) + " --out " + a.string(), log), 0);
  ASSERT_EQ(mvps("simulate --config " + (a / "config.ini").string() + " --out " + b.string(), log), 0);
  EXPECT_EQ(slurp(a / "config.ini"), slurp(b / "config.ini"));
  EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
}

TEST(Cli, FailingCheckIsNamed) {
  const fs::path out = scratch("fail");
  fs::create_directories(out);
  const int code = mvps("verify-representation --out " + out.string() +
                            " --set harness.representation_particles=500 --set harness.representation_tol=1e-12",
                        out / "log");
  EXPECT_EQ(code, 1);
  EXPECT_NE(slurp(out / "log").find("first failing check: representation."), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "reports.txt"));
}

TEST(Cli, ScanSingularityTable) {
  const fs::path out = scratch("scan");
  ASSERT_EQ(mvps("scan-singularity --out " + out.string(), fs::temp_directory_path() / "mvps_cli_scan.log"), 0);
  std::ifstream in(out / "singularity.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "s,jacobian_psi_abs,singular_amplification,zeta");
}
