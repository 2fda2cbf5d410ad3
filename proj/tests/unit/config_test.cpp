#include <gtest/gtest.h>

#include <fstream>
#include <numbers>

#include "json.hpp"
#include "mechrom/config.hpp"
#include "support/expect_error.hpp"
#include "support/testing.hpp"

namespace mechrom {
namespace {

using testing::expect_error;

TEST(ParseConfig, EmptyFileGivesDefaults) {
  const auto config = parse_config("");
  EXPECT_EQ(config.system.n, 30);
  EXPECT_EQ(config.integrator.dt, 0.01);
  EXPECT_EQ(config.resolved_input_nodes(), std::vector<Index>{29});
  EXPECT_EQ(config.resolved_lambda_grid().size(), 14u);
  EXPECT_EQ(config.resolved_lambda_grid().front(), 0.0);
  EXPECT_EQ(config.resolved_lambda_grid().back(), 1.0);
  EXPECT_TRUE(config.has_method("copinf"));
  EXPECT_EQ(config.copinf.omega, 1e-8);
  config.validate();
}

TEST(ParseConfig, ReadsEverySection) {
  const auto config = parse_config(R"(
# comment
[system]
source = chain
n = 12
stiffness = 400
input_nodes = 3, 7

[integrator]
dt = 0.001
alpha = -0.1

[input]
waveform = sine
frequency = 10
phase = 0.5

[initial]
displacement = random
scale = 1e-4

[horizon]
train = 0.5
test = 1

[basis]
tol = 1e-3
criterion = energy

[data]
derivatives = finite-difference

[opinf]
lambda_grid = 0, 1e-6, 1e-3
separate = false

[copinf]
omega = 1e-6
max_iter = 100
trace = true

[run]
methods = pod, copinf
out = somewhere
seed = 42
)");
  EXPECT_EQ(config.system.n, 12);
  EXPECT_EQ(config.system.stiffness, 400.0);
  EXPECT_EQ(config.system.input_nodes, (std::vector<Index>{3, 7}));
  EXPECT_EQ(config.integrator.alpha, -0.1);
  EXPECT_NEAR(config.input.angular_frequency, 20 * std::numbers::pi, 1e-12);
  EXPECT_EQ(config.input.phase, 0.5);
  EXPECT_EQ(config.initial.displacement, InitialSpec::Displacement::kRandom);
  EXPECT_EQ(config.horizon.train, 0.5);
  EXPECT_EQ(config.basis.criterion, BasisSpec::Criterion::kEnergy);
  EXPECT_EQ(config.data.derivatives, DataSpec::Derivatives::kFiniteDifference);
  EXPECT_EQ(config.opinf.lambda_grid, (std::vector<double>{0, 1e-6, 1e-3}));
  EXPECT_FALSE(config.opinf.separate);
  EXPECT_EQ(config.copinf.max_iter, 100);
  EXPECT_TRUE(config.copinf.trace);
  EXPECT_EQ(config.run.methods, (std::vector<std::string>{"pod", "copinf"}));
  EXPECT_FALSE(config.has_method("opinf"));
  EXPECT_EQ(config.run.out, "somewhere");
  EXPECT_EQ(config.run.seed, 42u);
  config.validate();
}

TEST(ParseConfig, UnknownEntriesAreUsageErrors) {
  expect_error(ErrorKind::kUsage, [] { parse_config("[sytem]\nn = 3\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("[system]\nnn = 3\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("n = 3\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("[system\n"); });
}

TEST(ParseConfig, MalformedValuesAreUsageErrors) {
  expect_error(ErrorKind::kUsage, [] { parse_config("[system]\nn = three\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("[integrator]\ndt = 1e-2x\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("[input]\nwaveform = square\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("[opinf]\nseparate = maybe\n"); });
  expect_error(ErrorKind::kUsage,
               [] { parse_config("[input]\nfrequency = 1\nangular_frequency = 2\n"); });
  expect_error(ErrorKind::kUsage, [] { parse_config("[run]\nseed = -1\n"); });
  try {
    parse_config("[system]\nn = three\n", "exp.ini");
    ADD_FAILURE();
  } catch (const Error& error) {
    const std::string what = error.what();
    EXPECT_NE(what.find("exp.ini"), std::string::npos);
    EXPECT_NE(what.find("three"), std::string::npos);
  }
}

TEST(ExperimentConfig, ValidateRejectsInconsistentSettings) {
  auto check = [](const std::string& text) {
    expect_error(ErrorKind::kInvalidParameter, [&] { parse_config(text).validate(); });
  };
  check("[horizon]\ntrain = 2\ntest = 1\n");
  check("[integrator]\ndt = 0\n");
  check("[system]\nn = 4\ninput_nodes = 4\n");
  check("[run]\nmethods = pod, dmd\n");
  check("[basis]\ntol = 2\n");
  check("[copinf]\nomega = 0\n");
  check("[opinf]\nlambda_grid = 0, -1\n");
  check("[system]\nsource = files\n");
}

TEST(ApplyOverrides, FlagsWinOverTheFile) {
  auto config = parse_config("[basis]\nrank = 5\n[run]\nseed = 3\n");
  ConfigOverrides overrides;
  overrides.tol = 1e-3;
  overrides.lambda = 1e-4;
  overrides.methods = {"pod,opinf"};
  overrides.out = "elsewhere";
  overrides.seed = 9;
  apply_overrides(config, overrides);
  EXPECT_FALSE(config.basis.rank.has_value());
  EXPECT_EQ(config.basis.tol, 1e-3);
  EXPECT_EQ(config.resolved_lambda_grid(), std::vector<double>{1e-4});
  EXPECT_EQ(config.run.methods, (std::vector<std::string>{"pod", "opinf"}));
  EXPECT_EQ(config.run.out, "elsewhere");
  EXPECT_EQ(config.run.seed, 9u);

  ConfigOverrides rank_only;
  rank_only.rank = 7;
  apply_overrides(config, rank_only);
  EXPECT_EQ(config.basis.rank, 7);
}

TEST(DescribeConfig, RecordsResolvedDefaults) {
  const auto description = nlohmann::json::parse(describe_config(parse_config("")));
  EXPECT_EQ(description["integrator"]["gamma"], 0.5);
  EXPECT_EQ(description["integrator"]["beta"], 0.25);
  EXPECT_TRUE(description["integrator"]["gamma_set"].is_null());
  EXPECT_EQ(description["system"]["input_nodes"], nlohmann::json::array({29}));
  EXPECT_EQ(description["opinf"]["lambda_grid"].size(), 14u);
  EXPECT_EQ(description["copinf"]["max_iter"], 50000);
  EXPECT_EQ(description["run"]["seed"], 0);
  for (const char* section : {"system", "integrator", "input", "initial", "horizon", "basis",
                              "data", "opinf", "copinf", "run"})
    EXPECT_TRUE(description.contains(section)) << section;
  EXPECT_FALSE(description["run"].contains("out"));
}

TEST(DescribeConfig, IsStableAcrossEquivalentFiles) {
  EXPECT_EQ(describe_config(parse_config("[input]\nangular_frequency = 1\n")),
            describe_config(parse_config("")));
}

TEST(LoadConfig, MissingFileIsUsageError) {
  expect_error(ErrorKind::kUsage, [] { load_config("/nonexistent/experiment.ini"); });
}

TEST(LoadConfig, MatrixDirectoryIsRelativeToTheFile) {
  const auto dir = testing::scratch_dir("config-relative");
  std::ofstream(dir / "exp.ini") << "[system]\nsource = files\nmatrix_dir = mats\n";
  const auto config = load_config(dir / "exp.ini");
  EXPECT_EQ(config.system.matrix_dir, (dir / "mats").lexically_normal());
}

}  // namespace
}  // namespace mechrom
