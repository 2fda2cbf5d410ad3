#include "mechrom/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "json.hpp"
#include "mechrom/copinf.hpp"
#include "mechrom/eval.hpp"
#include "mechrom/io.hpp"
#include "mechrom/newmark.hpp"
#include "mechrom/opinf.hpp"
#include "mechrom/snapshots.hpp"

namespace mechrom {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// JSON has no infinities; spell them out.
json number(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

std::string message_of(const Error& error) {
  const std::string what = error.what();
  const std::string prefix = std::string(to_string(error.kind())) + ": ";
  return what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

IntegratorConfig<double> scheme_of(const ExperimentConfig& config) {
  IntegratorConfig<double> scheme;
  scheme.dt = config.integrator.dt;
  scheme.t_end = config.horizon.test;
  scheme.gamma = config.integrator.gamma;
  scheme.beta = config.integrator.beta;
  scheme.alpha = config.integrator.alpha;
  return scheme;
}

BasisSelector<double> selector_of(const ExperimentConfig& config) {
  if (config.basis.rank) return FixedRank{*config.basis.rank};
  if (config.basis.criterion == BasisSpec::Criterion::kEnergy)
    return CumulativeEnergy<double>{config.basis.tol};
  return SingularValueRatio<double>{config.basis.tol};
}

struct Paths {
  fs::path root;

  fs::path system() const { return root / "system"; }
  fs::path snapshots() const { return root / "snapshots"; }
  fs::path initial_state() const { return snapshots() / "initial_state.mtx"; }
  fs::path basis() const { return root / "basis"; }
  fs::path method(const std::string& name) const { return root / name; }
  fs::path evaluation() const { return root / "evaluation"; }
};

SecondOrderSystemd saved_system(const Paths& paths) {
  return io::load_system(io::SystemFiles::in(paths.system()));
}

TrajectoryDatad saved_snapshots(const Paths& paths) {
  return io::load_csv(io::TrajectoryFiles::in(paths.snapshots()));
}

BasisHandle<double> saved_basis(const Paths& paths) {
  PodBasisd basis;
  basis.V = io::read_matrix_market(paths.basis() / "V.mtx");
  return std::make_shared<const PodBasisd>(std::move(basis));
}

void write_json(const fs::path& path, const json& value) {
  io::write_text(path, value.dump(2) + "\n");
}

/// Training window projected onto the saved basis, with derivatives taken
/// from the integrator or recomputed by finite differences.
ReducedTrajectoryDatad reduced_training_data(const ExperimentConfig& config,
                                             const Paths& paths) {
  const auto data = saved_snapshots(paths);
  const auto train = data.head_until(config.horizon.train);
  auto basis = saved_basis(paths);
  auto reduced = project(train, basis);
  if (config.data.derivatives == DataSpec::Derivatives::kFiniteDifference) {
    auto [velocity, acceleration] =
        finite_difference_derivatives(reduced.X, config.integrator.dt);
    reduced.Xd = std::move(velocity);
    reduced.Xdd = std::move(acceleration);
  }
  return reduced;
}

json spectrum_summary(const Matrix<double>& M, const Matrix<double>& E,
                      const Matrix<double>& K) {
  try {
    const auto values = pencil_spectrum(M, E, K);
    double max_real = -std::numeric_limits<double>::infinity();
    for (const auto& value : values) max_real = std::max(max_real, value.real());
    return {{"max_real_part", number(max_real)}, {"stable", max_real <= 1e-10}};
  } catch (const Error& error) {
    return {{"max_real_part", nullptr},
            {"stable", false},
            {"error", message_of(error)}};
  }
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kInvalidParameter:
    case ErrorKind::kInvalidInput:
    case ErrorKind::kFormat:
    case ErrorKind::kDegenerateInput:
    case ErrorKind::kMissingData:
    case ErrorKind::kInsufficientData:
    case ErrorKind::kInvalidComparison:
      return 2;
    case ErrorKind::kSingularOperator:
    case ErrorKind::kNotSeparable:
    case ErrorKind::kIllConditionedModes:
    case ErrorKind::kNoViableLambda:
      return 3;
  }
  return 2;
}

std::function<VectorXd(double)> make_input_signal(const ExperimentConfig& config,
                                                  Index channels) {
  const InputSpec spec = config.input;
  const double sweep = spec.sweep_time.value_or(config.horizon.test);
  return [spec, sweep, channels](double t) {
    double value = 0;
    switch (spec.waveform) {
      case InputSpec::Waveform::kSine:
        value = spec.amplitude * std::sin(spec.angular_frequency * t + spec.phase);
        break;
      case InputSpec::Waveform::kConstant:
        value = spec.amplitude;
        break;
      case InputSpec::Waveform::kChirp: {
        const double cycles =
            spec.start_frequency * t +
            (spec.end_frequency - spec.start_frequency) * t * t / (2.0 * sweep);
        value = spec.amplitude *
                std::sin(2.0 * std::numbers::pi * cycles + spec.phase);
        break;
      }
    }
    return VectorXd::Constant(channels, value);
  };
}

VectorXd initial_displacement(const ExperimentConfig& config, Index n) {
  if (config.initial.displacement == InitialSpec::Displacement::kZero ||
      config.initial.scale == 0.0)
    return VectorXd::Zero(n);
  // Raw engine output is portable across standard libraries, unlike
  // std::uniform_real_distribution.
  std::mt19937_64 engine(config.run.seed);
  VectorXd x0(n);
  for (Index i = 0; i < n; ++i) {
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    x0(i) = config.initial.scale * (2.0 * unit - 1.0);
  }
  return x0;
}

SecondOrderSystemd load_full_order_system(const ExperimentConfig& config) {
  if (config.system.source == SystemSpec::Source::kFiles)
    return io::load_system(io::SystemFiles::in(config.system.matrix_dir));
  return uniform_chain<double>(config.system.n, config.system.mass,
                               config.system.stiffness, config.system.alpha_r,
                               config.system.beta_r,
                               config.resolved_input_nodes());
}

Experiment::Experiment(ExperimentConfig config, std::ostream* log)
    : config_(std::move(config)), log_(log) {
  config_.validate();
}

template <typename Fn>
void Experiment::stage(const std::string& name, Fn&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& error) {
    throw StageError(name, error.kind(), message_of(error));
  } catch (const fs::filesystem_error& error) {
    throw StageError(name, ErrorKind::kInvalidInput, error.what());
  }
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  timings_.emplace_back(name, elapsed.count());
}

void Experiment::say(const std::string& line) const {
  if (log_) *log_ << line << '\n';
}

void Experiment::write_manifest() const {
  json manifest{{"tool", "mechrom"},
                {"version", kToolVersion},
                {"config", json::parse(describe_config(config_))}};
  write_json(out() / "manifest.json", manifest);
}

void Experiment::simulate() {
  const Paths paths{out()};
  std::optional<SecondOrderSystemd> system;
  stage("load_system", [&] { system = load_full_order_system(config_); });

  stage("simulate", [&] {
    write_manifest();
    const Index n = system->n();
    const VectorXd x0 = initial_displacement(config_, n);
    const VectorXd v0 = VectorXd::Zero(n);
    const auto data = mechrom::simulate(
        *system, Excitation<double>::input(make_input_signal(config_, system->m())),
        x0, v0, scheme_of(config_));
    io::save_system(*system, io::SystemFiles::in(paths.system()));
    io::save_csv(data, io::TrajectoryFiles::in(paths.snapshots()));
    MatrixXd initial(n, 2);
    initial << x0, v0;
    io::write_matrix_market(paths.initial_state(), initial, io::Symmetry::kGeneral);
    say("simulate: n = " + std::to_string(n) + ", " +
        std::to_string(data.samples()) + " snapshots");
  });
}

void Experiment::basis() {
  const Paths paths{out()};
  stage("basis", [&] {
    write_manifest();
    const auto data = saved_snapshots(paths);
    const auto train = data.head_until(config_.horizon.train);
    const auto basis = compute_basis(train.X, selector_of(config_));
    io::write_matrix_market(paths.basis() / "V.mtx", basis.V, io::Symmetry::kGeneral);
    io::write_spectrum_csv(paths.basis() / "singular_values.csv", basis.sigma);
    const double error = projection_error(train.X, basis);
    write_json(paths.basis() / "summary.json",
               {{"n", basis.n()},
                {"r", basis.r()},
                {"training_samples", train.samples()},
                {"projection_error", number(error)},
                {"relative_projection_error", number(error / train.X.norm())}});

    if (config_.has_method("pod")) {
      const auto reduced = intrusive_reduce(saved_system(paths), basis);
      io::save_system(reduced, io::SystemFiles::in(paths.method("pod")));
    }
    say("basis: r = " + std::to_string(basis.r()) + " from " +
        std::to_string(train.samples()) + " training snapshots");
  });
}

void Experiment::infer() {
  const Paths paths{out()};
  stage("infer", [&] {
    write_manifest();
    const auto reduced = reduced_training_data(config_, paths);
    const auto regression = assemble_opinf_data(reduced);
    const fs::path dir = paths.method("opinf");

    LambdaSelection<double> selection;
    try {
      selection = select_lambda(regression.D, regression.rhs,
                                config_.resolved_lambda_grid(), reduced,
                                scheme_of(config_));
    } catch (const NoViableLambdaError<double>& error) {
      io::write_lambda_table_csv(dir / "lambda_selection.csv", error.table());
      throw;
    }
    io::write_lambda_table_csv(dir / "lambda_selection.csv", selection.table);

    auto [rom, report] = mechrom::infer(regression, selection.lambda, reduced.basis);
    io::write_matrix_market(dir / "E_M.mtx", rom.E_M, io::Symmetry::kGeneral);
    io::write_matrix_market(dir / "K_M.mtx", rom.K_M, io::Symmetry::kGeneral);
    io::write_matrix_market(dir / "B_M.mtx", rom.B_M, io::Symmetry::kGeneral);

    json separation{{"attempted", config_.opinf.separate}};
    if (config_.opinf.separate) {
      try {
        const auto separated = separate_operators(rom);
        const io::SystemFiles files = io::SystemFiles::in(dir / "separated");
        io::write_matrix_market(files.mass, separated.M, io::Symmetry::kGeneral);
        io::write_matrix_market(files.damping, separated.E, io::Symmetry::kGeneral);
        io::write_matrix_market(files.stiffness, separated.K);
        io::write_matrix_market(files.input, separated.B, io::Symmetry::kGeneral);
        separation["status"] = "separated";
        separation["mode_condition"] = number(separated.mode_condition);
      } catch (const Error& error) {
        if (error.kind() != ErrorKind::kNotSeparable &&
            error.kind() != ErrorKind::kIllConditionedModes)
          throw;
        separation["status"] = std::string(to_string(error.kind()));
        separation["message"] = message_of(error);
      }
    }

    write_json(dir / "report.json",
               {{"lambda", selection.lambda},
                {"residual", number(report.residual)},
                {"condition", number(report.condition)},
                {"rank_estimate", report.rank_estimate},
                {"unknowns_per_row", regression.D.rows()},
                {"rank_deficient", report.rank_deficient},
                {"underdetermined", report.underdetermined},
                {"solver", report.solver},
                {"separation", separation},
                {"spectrum", spectrum_summary(MatrixXd::Identity(rom.r(), rom.r()),
                                              rom.E_M, rom.K_M)}});
    say("infer: lambda = " + io::format_double(selection.lambda) +
        (report.rank_deficient ? " (rank-deficient data)" : ""));
  });
}

void Experiment::infer_constrained() {
  const Paths paths{out()};
  stage("infer-constrained", [&] {
    write_manifest();
    const auto reduced = reduced_training_data(config_, paths);
    const auto regression = assemble_force_data(reduced);
    ConstrainedOptions<double> options;
    options.max_iter = config_.copinf.max_iter;
    options.tol_abs = config_.copinf.tol_abs;
    options.tol_rel = config_.copinf.tol_rel;
    options.penalty = config_.copinf.penalty;
    options.record_trace = config_.copinf.trace;
    auto [rom, report] = mechrom::infer_constrained(
        regression, config_.copinf.omega, options, reduced.basis);

    const fs::path dir = paths.method("copinf");
    io::write_matrix_market(dir / "M.mtx", rom.M);
    io::write_matrix_market(dir / "E.mtx", rom.E);
    io::write_matrix_market(dir / "K.mtx", rom.K);
    if (config_.copinf.trace) io::write_trace_csv(dir / "trace.csv", report.trace);
    write_json(dir / "report.json",
               {{"omega", config_.copinf.omega},
                {"objective", number(report.objective)},
                {"iterations", report.iterations},
                {"converged", report.converged},
                {"primal_residual", number(report.primal_residual)},
                {"dual_residual", number(report.dual_residual)},
                {"final_penalty", number(report.final_penalty)},
                {"min_eigenvalue_M", number(min_eigenvalue(rom.M))},
                {"min_eigenvalue_E", number(min_eigenvalue(rom.E))},
                {"min_eigenvalue_K", number(min_eigenvalue(rom.K))},
                {"spectrum", spectrum_summary(rom.M, rom.E, rom.K)}});
    say("infer-constrained: " + std::to_string(report.iterations) +
        " iterations" + (report.converged ? "" : " (tolerance not reached)"));
  });
}

void Experiment::evaluate() {
  const Paths paths{out()};
  stage("evaluate", [&] {
    write_manifest();
    const auto reference = saved_snapshots(paths);
    const auto system = saved_system(paths);
    const auto basis = saved_basis(paths);
    const MatrixXd initial = io::read_matrix_market(paths.initial_state());
    require(initial.rows() == system.n() && initial.cols() == 2,
            ErrorKind::kInvalidInput,
            "initial state has shape " + shape_of(initial) + ", expected " +
                std::to_string(system.n()) + "x2");
    require(basis->n() == system.n(), ErrorKind::kInvalidInput,
            "basis rows " + std::to_string(basis->n()) + " != system size " +
                std::to_string(system.n()));

    const MatrixXd& V = basis->V;
    const VectorXd q0 = V.transpose() * initial.col(0);
    const VectorXd qd0 = V.transpose() * initial.col(1);
    const auto u = make_input_signal(config_, system.m());
    const auto scheme = scheme_of(config_);

    json summary = json::object();
    for (const auto& method : config_.run.methods) {
      SecondOrderOperators<double> ops;
      Excitation<double> excitation;
      const fs::path dir = paths.method(method);
      if (method == "pod") {
        const auto reduced = io::load_system(io::SystemFiles::in(dir));
        ops = reduced.operators();
        excitation = Excitation<double>::input(u);
      } else if (method == "opinf") {
        MassNormalizedRom<double> rom;
        rom.E_M = io::read_matrix_market(dir / "E_M.mtx");
        rom.K_M = io::read_matrix_market(dir / "K_M.mtx");
        rom.B_M = io::read_matrix_market(dir / "B_M.mtx");
        ops = rom.operators();
        excitation = Excitation<double>::input(u);
      } else {
        StructuredRom<double> rom;
        rom.M = io::read_matrix_market(dir / "M.mtx");
        rom.E = io::read_matrix_market(dir / "E.mtx");
        rom.K = io::read_matrix_market(dir / "K.mtx");
        ops = rom.operators();
        const MatrixXd projected_input = V.transpose() * system.input_map();
        excitation = Excitation<double>::force(
            [projected_input, u](double t) -> VectorXd {
              return projected_input * u(t);
            });
      }
      require(ops.n() == basis->r(), ErrorKind::kInvalidInput,
              method + " model has dimension " + std::to_string(ops.n()) +
                  ", basis has rank " + std::to_string(basis->r()));

      const auto trajectory = mechrom::simulate(ops, excitation, q0, qd0, scheme);
      require(trajectory.samples() == reference.samples(),
              ErrorKind::kInvalidInput,
              "reference trajectory has " + std::to_string(reference.samples()) +
                  " samples but the " + method + " trajectory has " +
                  std::to_string(trajectory.samples()));
      const auto series = relative_error(reference.X, V * trajectory.X,
                                         reference.times, config_.horizon.train);

      io::write_snapshot_csv(paths.evaluation() / (method + "_trajectory.csv"),
                             trajectory.times, trajectory.X, "q_");
      io::write_error_series_csv(paths.evaluation() / (method + "_error.csv"),
                                 series);

      double train_max = 0;
      double test_max = 0;
      const double slack = 1e-9 * config_.integrator.dt;
      for (Index i = 0; i < series.eps.size(); ++i) {
        double& bucket =
            series.times(i) <= config_.horizon.train + slack ? train_max : test_max;
        bucket = std::max(bucket, series.eps(i));
      }
      summary[method] = {{"max_error", number(series.max_eps)},
                         {"max_error_train", number(train_max)},
                         {"max_error_beyond_train", number(test_max)},
                         {"spectrum", spectrum_summary(ops.M, ops.E, ops.K)}};
      say("evaluate: " + method + " max error " + io::format_double(series.max_eps));
    }
    write_json(paths.evaluation() / "summary.json", summary);
  });
}

void Experiment::run() {
  simulate();
  basis();
  if (config_.has_method("opinf")) infer();
  if (config_.has_method("copinf")) infer_constrained();
  evaluate();
}

PodBasisd basis_from_snapshots(const fs::path& snapshots,
                               const BasisSelector<double>& selector,
                               const fs::path& out) {
  try {
    const auto table = io::read_snapshot_csv(snapshots);
    auto basis = compute_basis(table.values, selector);
    io::write_matrix_market(out / "V.mtx", basis.V, io::Symmetry::kGeneral);
    io::write_spectrum_csv(out / "singular_values.csv", basis.sigma);
    return basis;
  } catch (const Error& error) {
    throw StageError("basis", error.kind(), message_of(error));
  }
}

}  // namespace mechrom
