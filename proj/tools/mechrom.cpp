// Command-line driver for the experiment pipeline.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mechrom/experiment.hpp"
#include "mechrom/io.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::vector<std::string> methods;
  std::optional<long long> rank;
  std::optional<double> tol;
  std::optional<double> lambda;
  std::optional<double> omega;
  std::optional<std::uint64_t> seed;
  std::string snapshots;
  bool timings = false;
};

void add_common_flags(CLI::App& command, Options& options) {
  command.add_option("--config", options.config, "experiment file");
  command.add_option("--out", options.out, "artifact directory");
  command.add_option("--method", options.methods,
                     "methods to run: pod, opinf, copinf (repeatable)")
      ->delimiter(',');
  command.add_option("--rank", options.rank, "fixed basis rank")
      ->check(CLI::PositiveNumber);
  command.add_option("--tol", options.tol, "singular value ratio tolerance");
  command.add_option("--lambda", options.lambda,
                     "single regularization value instead of a grid")
      ->check(CLI::NonNegativeNumber);
  command.add_option("--omega", options.omega, "definiteness margin")
      ->check(CLI::PositiveNumber);
  command.add_option("--seed", options.seed, "seed for randomized fixtures");
  command.add_flag("--timings", options.timings,
                   "write per-stage wall-clock times to timings.json");
}

mechrom::ExperimentConfig resolve_config(const Options& options) {
  if (options.config.empty())
    mechrom::fail(mechrom::ErrorKind::kUsage, "--config is required");
  auto config = mechrom::load_config(options.config);
  mechrom::ConfigOverrides overrides;
  if (options.out) overrides.out = *options.out;
  overrides.methods = options.methods;
  if (options.rank) overrides.rank = static_cast<mechrom::Index>(*options.rank);
  overrides.tol = options.tol;
  overrides.lambda = options.lambda;
  overrides.omega = options.omega;
  overrides.seed = options.seed;
  mechrom::apply_overrides(config, overrides);
  return config;
}

void report_timings(const mechrom::Experiment& experiment, bool write) {
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (const auto& [stage, seconds] : experiment.timings()) {
    std::cout << "  " << stage << ": " << seconds << " s\n";
    table[stage] = seconds;
  }
  if (write)
    mechrom::io::write_text(experiment.out() / "timings.json", table.dump(2) + "\n");
}

int standalone_basis(const Options& options) {
  if (!options.out)
    mechrom::fail(mechrom::ErrorKind::kUsage, "--snapshots needs --out");
  mechrom::BasisSelector<double> selector =
      mechrom::SingularValueRatio<double>{options.tol.value_or(1e-2)};
  if (options.rank) selector = mechrom::FixedRank{*options.rank};
  const auto basis =
      mechrom::basis_from_snapshots(options.snapshots, selector, *options.out);
  std::cout << "selected r = " << basis.r() << " of " << basis.sigma.size()
            << " singular values\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order models of second-order mechanical systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mechrom::kToolVersion);

  Options options;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "build the full-order model and record snapshots"},
      {"basis", "compute the POD basis from the training snapshots"},
      {"infer", "learn a mass-normalized model by operator inference"},
      {"infer-constrained", "learn a model with definite M, E, K from forces"},
      {"evaluate", "simulate every requested model and compare"},
      {"run", "all stages in order"}};
  for (const auto& [name, help] : commands) {
    auto* command = app.add_subcommand(name, help);
    add_common_flags(*command, options);
    if (name == "basis")
      command->add_option("--snapshots", options.snapshots,
                          "snapshot CSV to decompose instead of a run directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "basis" && !options.snapshots.empty())
      return standalone_basis(options);

    mechrom::Experiment experiment(resolve_config(options), &std::cout);
    if (name == "simulate") {
      experiment.simulate();
    } else if (name == "basis") {
      experiment.basis();
    } else if (name == "infer") {
      experiment.infer();
    } else if (name == "infer-constrained") {
      experiment.infer_constrained();
    } else if (name == "evaluate") {
      experiment.evaluate();
    } else {
      experiment.run();
    }
    report_timings(experiment, options.timings);
    return 0;
  } catch (const mechrom::Error& error) {
    std::cerr << "mechrom " << name << ": " << error.what() << '\n';
    return mechrom::exit_code(error.kind());
  } catch (const std::exception& error) {
    std::cerr << "mechrom " << name << ": " << error.what() << '\n';
    return 2;
  }
}
