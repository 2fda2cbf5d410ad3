#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mechrom/config.hpp"
#include "mechrom/model.hpp"
#include "mechrom/pod.hpp"

namespace mechrom {

inline constexpr const char* kToolVersion = "0.1.0";

/// An error raised inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& message)
      : Error(kind, "stage '" + stage + "': " + message),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// 0 success, 1 usage, 2 data or format problem, 3 numerical failure.
int exit_code(ErrorKind kind);

/// u(t) for the configured waveform, one entry per input channel.
std::function<VectorXd(double)> make_input_signal(const ExperimentConfig& config,
                                                  Index channels);

/// Initial displacement; random draws use the run seed.
VectorXd initial_displacement(const ExperimentConfig& config, Index n);

/// Builds or loads the full-order model (stage "load_system").
SecondOrderSystemd load_full_order_system(const ExperimentConfig& config);

/// The stages of one experiment. Every stage reads its inputs from the
/// artifact directory and writes its outputs back, so running the stages
/// one by one produces the same files as `run`.
///
/// Layout under config.run.out:
///   manifest.json
///   system/{M,E,K,B}.mtx
///   snapshots/{X,Xd,Xdd,U,F}.csv, snapshots/initial_state.mtx
///   basis/{V.mtx, singular_values.csv, summary.json}
///   pod/{M,E,K,B}.mtx
///   opinf/{E_M,K_M,B_M}.mtx, opinf/lambda_selection.csv, opinf/report.json
///   opinf/separated/{M,E,K,B}.mtx   (when separation succeeds)
///   copinf/{M,E,K}.mtx, copinf/report.json, copinf/trace.csv
///   evaluation/<method>_trajectory.csv, evaluation/<method>_error.csv,
///   evaluation/summary.json
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config, std::ostream* log = nullptr);

  const ExperimentConfig& config() const { return config_; }
  const std::filesystem::path& out() const { return config_.run.out; }

  void simulate();
  void basis();
  void infer();
  void infer_constrained();
  void evaluate();

  /// All stages in order. Inference stages are skipped for methods that
  /// were not requested.
  void run();

  /// Wall-clock seconds per completed stage, in execution order.
  const std::vector<std::pair<std::string, double>>& timings() const {
    return timings_;
  }

 private:
  template <typename Fn>
  void stage(const std::string& name, Fn&& body);

  void write_manifest() const;
  void say(const std::string& line) const;

  ExperimentConfig config_;
  std::ostream* log_;
  std::vector<std::pair<std::string, double>> timings_;
};

/// Stand-alone basis computation on a snapshot CSV: writes V.mtx and
/// singular_values.csv into `out` and returns the basis.
PodBasisd basis_from_snapshots(const std::filesystem::path& snapshots,
                               const BasisSelector<double>& selector,
                               const std::filesystem::path& out);

}  // namespace mechrom
