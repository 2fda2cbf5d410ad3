#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mechrom/types.hpp"

namespace mechrom {

/// Full-order model source: a generated mass-spring chain or four matrix files.
struct SystemSpec {
  enum class Source { kChain, kFiles };
  Source source = Source::kChain;
  Index n = 30;
  double mass = 1.0;
  double stiffness = 1.0;
  double alpha_r = 0.01;
  double beta_r = 1e-3;
  std::vector<Index> input_nodes;  // empty means {n - 1}
  std::filesystem::path matrix_dir;
};

struct IntegratorSpec {
  double dt = 0.01;
  std::optional<double> gamma;
  std::optional<double> beta;
  double alpha = 0.0;
};

/// Named waveform applied identically to every input channel.
struct InputSpec {
  enum class Waveform { kSine, kConstant, kChirp };
  Waveform waveform = Waveform::kSine;
  double amplitude = 1.0;
  double angular_frequency = 1.0;  // sine, rad/s
  double phase = 0.0;              // sine and chirp, rad
  double start_frequency = 0.0;    // chirp, Hz
  double end_frequency = 1.0;      // chirp, Hz
  std::optional<double> sweep_time;  // chirp; defaults to the test horizon
};

struct InitialSpec {
  enum class Displacement { kZero, kRandom };
  Displacement displacement = Displacement::kZero;
  double scale = 1e-3;
};

struct HorizonSpec {
  double train = 1.0;
  double test = 1.0;
};

struct BasisSpec {
  enum class Criterion { kRatio, kEnergy };
  std::optional<Index> rank;
  double tol = 1e-2;
  Criterion criterion = Criterion::kRatio;
};

struct DataSpec {
  enum class Derivatives { kIntegrator, kFiniteDifference };
  Derivatives derivatives = Derivatives::kIntegrator;
};

struct OpinfSpec {
  std::vector<double> lambda_grid;  // empty means the default grid
  bool separate = true;
};

struct CopinfSpec {
  double omega = 1e-8;
  Index max_iter = 50000;
  double tol_abs = 1e-9;
  double tol_rel = 1e-9;
  double penalty = 1.0;
  bool trace = false;
};

struct RunSpec {
  std::vector<std::string> methods{"pod", "opinf", "copinf"};
  std::filesystem::path out = "mechrom-run";
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  SystemSpec system;
  IntegratorSpec integrator;
  InputSpec input;
  InitialSpec initial;
  HorizonSpec horizon;
  BasisSpec basis;
  DataSpec data;
  OpinfSpec opinf;
  CopinfSpec copinf;
  RunSpec run;

  bool has_method(const std::string& name) const;
  std::vector<double> resolved_lambda_grid() const;
  std::vector<Index> resolved_input_nodes() const;

  /// Throws invalid-parameter on inconsistent settings.
  void validate() const;
};

/// {0} together with 1e-12, 1e-11, ..., 1.
std::vector<double> default_lambda_grid();

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::filesystem::path> out;
  std::vector<std::string> methods;
  std::optional<Index> rank;
  std::optional<double> tol;
  std::optional<double> lambda;
  std::optional<double> omega;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

/// Parses the INI-style experiment file. Unknown sections or keys and
/// malformed values raise usage errors naming the offending entry.
ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every resolved setting, defaults included, as pretty-printed JSON.
std::string describe_config(const ExperimentConfig& config);

}  // namespace mechrom
