#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mvp/config.hpp"
#include "mvp/errors.hpp"
#include "mvp/pipelines.hpp"

using namespace mvp;
using std::numbers::pi;

namespace {

const char* kMinimal = R"(# minimal run
[run]
particles = 1000
t_end = 3.141592653589793

[mag]
omega = 1

[initial]
family = maxwellian
)";

int error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Config, MinimalFillsDefaults) {
  const ExperimentConfig c = parse_config_text(kMinimal);
  EXPECT_EQ(c.run.particles, 1000u);
  EXPECT_EQ(c.run.omega, 1.0);
  EXPECT_EQ(c.run.initial.family, "maxwellian");
  EXPECT_EQ(c.run.grid, RunConfig{}.grid);
  EXPECT_EQ(c.harness, HarnessConfig{});
  EXPECT_DOUBLE_EQ(*c.run.magnetic().t_omega(), pi);
  const std::string echo = format_config(c);
  EXPECT_NE(echo.find("# t_omega = 3.141592653589793"), std::string::npos);
}

TEST(Config, EmptyTextIsTheDefaultExperiment) {
  EXPECT_EQ(parse_config_text(""), ExperimentConfig{});
}

TEST(Config, OverrideSelectsUnmagnetizedBranch) {
  const ExperimentConfig c = parse_config_text(kMinimal, {"mag.omega=0"});
  EXPECT_FALSE(c.run.magnetic().magnetized());
  EXPECT_NE(format_config(c).find("t_omega = none"), std::string::npos);
  EXPECT_THROW(pipeline::scan_singularity(c, ""), ConfigError);
}

TEST(Config, TimeStepBoundAgainstOmega) {
  try {
    parse_config_text("[run]\ndt = 1\n[mag]\nomega = 100\n");
    FAIL() << "expected a validation error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("0.05 * 2 pi / omega"), std::string::npos) << e.what();
  }
}

TEST(Config, ErrorsCarryLineAndColumn) {
  EXPECT_EQ(error_line("[run]\nparticles = many\n"), 2);
  EXPECT_EQ(error_line("[run]\n\n\nseed = 1\nseed = 2\n"), 5);
  EXPECT_EQ(error_line("[nowhere]\n"), 1);
  EXPECT_EQ(error_line("[run]\nbogus = 1\n"), 2);
  EXPECT_EQ(error_line("[grid]\ncells = [8, 8\n"), 2);
  EXPECT_EQ(error_line("particles = 1\n"), 1);
  EXPECT_EQ(error_line("[initial]\nfamily = \"maxwellian\n"), 2);
  try {
    parse_config_text("[run]\nparticles = x\n");
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.column(), 13);
  }
}

TEST(Config, OverridesMustNameExistingKeys) {
  EXPECT_THROW(parse_config_text("", {"run.nothing=1"}), ConfigError);
  EXPECT_THROW(parse_config_text("", {"particles=1"}), ConfigError);
  EXPECT_EQ(parse_config_text("", {"run.seed=7"}).run.seed, 7u);
  EXPECT_EQ(parse_config_text("", {"diagnostics.ks=[0, 2, 3.5, 4, 6]"}).run.ks,
            (std::vector<double>{0.0, 2.0, 3.5, 4.0, 6.0}));
}

TEST(Config, ValuesOfEveryType) {
  const ExperimentConfig c = parse_config_text(
      "[initial]\ncenter = [1, -2.5, 3e-1]  # trailing comment\n"
      "[diagnostics]\nfield_exponents = [2, inf]\n"
      "[run]\ndeterministic = true\n"
      "[harness]\ncheck_bounded_density = false\n");
  EXPECT_EQ(c.run.initial.center, (Vec3{{1.0, -2.5, 0.3}}));
  EXPECT_TRUE(std::isinf(c.run.field_exponents.back()));
  EXPECT_TRUE(c.run.deterministic);
  EXPECT_FALSE(c.harness.check_bounded_density);
  EXPECT_THROW(parse_config_text("[run]\ndeterministic = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[run]\nparticles = -3\n"), ConfigError);
}

TEST(Config, HarnessValidation) {
  EXPECT_THROW(parse_config_text("[harness]\nsmall_time_d = [1.5]\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[harness]\ngronwall_ks = [5]\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[harness]\npoisson_cells = [32, 48]\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[harness]\nrepresentation_levels = [32, 16]\n"), ConfigError);
}

TEST(Config, EchoRoundTrips) {
  for (const auto& overrides : std::vector<std::vector<std::string>>{
           {}, {"mag.omega=0"}, {"initial.family=compact-bump", "run.seed=42"}, {"run.dt=0.01"}}) {
    const ExperimentConfig c = parse_config_text(kMinimal, overrides);
    EXPECT_EQ(parse_config_text(format_config(c)), c);
  }
  ExperimentConfig odd;
  odd.run.dt = 0.1 / 3.0;
  odd.run.snapshot_times = {0.5, 1.25};
  odd.run.initial.center = {{1e-17, -0.0, 1.0 / 7.0}};
  EXPECT_EQ(parse_config_text(format_config(odd)), odd);
}

TEST(Config, KeyListCoversEverySection) {
  const auto keys = config_keys();
  for (const char* k : {"run.particles", "mag.omega", "initial.family", "grid.cells", "diagnostics.ks",
                        "harness.representation_levels"}) {
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
  }
}

TEST(SingularityTable, Rows) {
  const MagneticConfig mag(2.0);
  const auto rows = pipeline::singularity_table(mag, 400, 6);
  ASSERT_GT(rows.size(), 400u);
  bool saw_half_turn = false;
  for (const auto& r : rows) {
    EXPECT_GT(r.s, 0.0);
    EXPECT_LT(r.s, 4.0 * pi / mag.omega());
    if (std::abs(mag.omega() * r.s - pi) < 1e-12) {
      saw_half_turn = true;
      EXPECT_NEAR(r.jacobian, 4.0 * r.s / (mag.omega() * mag.omega()), 1e-14);
    }
  }
  EXPECT_TRUE(saw_half_turn);
  // Amplification grows monotonically over the last decade below 2 pi / omega.
  const double ts = 2.0 * pi / mag.omega();
  double prev = 0.0;
  for (const auto& r : rows) {
    if (r.s >= ts) break;
    if (ts - r.s > 0.1 * ts) continue;
    EXPECT_GT(r.amplification, prev) << "s = " << r.s;
    prev = r.amplification;
  }
  EXPECT_THROW(pipeline::singularity_table(MagneticConfig(0.0), 400, 6), ConfigError);
}

TEST(Config, ShippedExamplesParse) {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(MVP_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    const ExperimentConfig c = parse_config(e.path().string());
    EXPECT_EQ(parse_config_text(format_config(c)), c) << e.path();
    ++n;
  }
  EXPECT_GE(n, 3);
}
