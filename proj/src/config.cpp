#include "mechrom/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"

namespace mechrom {

namespace {

namespace pt = boost::property_tree;
using json = nlohmann::ordered_json;

const std::set<std::string>& known_methods() {
  static const std::set<std::string> methods{"pod", "opinf", "copinf"};
  return methods;
}

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

/// Typed reader for one section; remembers which keys were consumed.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree, std::string origin)
      : name_(std::move(name)), tree_(tree), origin_(std::move(origin)) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    const auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return trim(child->data());
  }

  void read(const std::string& key, double& value) {
    if (auto text = raw(key)) value = to_double(key, *text);
  }
  void read(const std::string& key, std::optional<double>& value) {
    if (auto text = raw(key)) value = to_double(key, *text);
  }
  void read(const std::string& key, Index& value) {
    if (auto text = raw(key)) value = to_index(key, *text);
  }
  void read(const std::string& key, std::optional<Index>& value) {
    if (auto text = raw(key)) value = to_index(key, *text);
  }
  void read(const std::string& key, bool& value) {
    if (auto text = raw(key)) {
      if (*text == "true" || *text == "yes" || *text == "1") {
        value = true;
      } else if (*text == "false" || *text == "no" || *text == "0") {
        value = false;
      } else {
        bad(key, *text, "expected true or false");
      }
    }
  }

  template <typename Enum>
  void read(const std::string& key, Enum& value,
            const std::map<std::string, Enum>& choices) {
    auto text = raw(key);
    if (!text) return;
    const auto it = choices.find(*text);
    if (it == choices.end()) {
      std::string allowed;
      for (const auto& [name, unused] : choices)
        allowed += (allowed.empty() ? "" : ", ") + name;
      bad(key, *text, "expected one of " + allowed);
    }
    value = it->second;
  }

  std::optional<std::vector<double>> doubles(const std::string& key) {
    auto text = raw(key);
    if (!text) return std::nullopt;
    std::vector<double> values;
    for (const auto& item : split_list(*text)) values.push_back(to_double(key, item));
    if (values.empty()) bad(key, *text, "expected a comma-separated list");
    return values;
  }

  std::optional<std::vector<Index>> indices(const std::string& key) {
    auto text = raw(key);
    if (!text) return std::nullopt;
    std::vector<Index> values;
    for (const auto& item : split_list(*text)) values.push_back(to_index(key, item));
    if (values.empty()) bad(key, *text, "expected a comma-separated list");
    return values;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, unused] : *tree_) {
      if (!seen_.contains(key))
        fail(ErrorKind::kUsage,
             origin_ + ": unknown key '" + key + "' in [" + name_ + "]");
    }
  }

  [[noreturn]] void bad(const std::string& key, const std::string& text,
                        const std::string& why) const {
    fail(ErrorKind::kUsage, origin_ + ": [" + name_ + "] " + key + " = '" +
                                text + "': " + why);
  }

 private:
  double to_double(const std::string& key, const std::string& text) const {
    double value = 0;
    std::string_view view(text);
    if (!view.empty() && view.front() == '+') view.remove_prefix(1);
    const auto [ptr, ec] =
        std::from_chars(view.data(), view.data() + view.size(), value);
    if (view.empty() || ec != std::errc() || ptr != view.data() + view.size() ||
        !std::isfinite(value))
      bad(key, text, "expected a finite number");
    return value;
  }

  Index to_index(const std::string& key, const std::string& text) const {
    long long value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
      bad(key, text, "expected an integer");
    return static_cast<Index>(value);
  }

  std::string name_;
  const pt::ptree* tree_;
  std::string origin_;
  std::set<std::string> seen_;
};

std::string waveform_name(InputSpec::Waveform waveform) {
  switch (waveform) {
    case InputSpec::Waveform::kSine: return "sine";
    case InputSpec::Waveform::kConstant: return "constant";
    case InputSpec::Waveform::kChirp: return "chirp";
  }
  return "sine";
}

json optional_number(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

}  // namespace

std::vector<double> default_lambda_grid() {
  std::vector<double> grid{0.0};
  for (int e = -12; e <= 0; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

bool ExperimentConfig::has_method(const std::string& name) const {
  return std::find(run.methods.begin(), run.methods.end(), name) !=
         run.methods.end();
}

std::vector<double> ExperimentConfig::resolved_lambda_grid() const {
  return opinf.lambda_grid.empty() ? default_lambda_grid() : opinf.lambda_grid;
}

std::vector<Index> ExperimentConfig::resolved_input_nodes() const {
  if (!system.input_nodes.empty()) return system.input_nodes;
  return {system.n - 1};
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& message) {
    require(ok, ErrorKind::kInvalidParameter, message);
  };
  if (system.source == SystemSpec::Source::kChain) {
    check(system.n >= 1, "[system] n must be >= 1");
    check(system.mass > 0 && system.stiffness > 0,
          "[system] mass and stiffness must be positive");
    check(system.alpha_r >= 0 && system.beta_r >= 0,
          "[system] rayleigh coefficients must be nonnegative");
    for (Index node : resolved_input_nodes())
      check(node >= 0 && node < system.n,
            "[system] input node " + std::to_string(node) + " outside [0, " +
                std::to_string(system.n) + ")");
  } else {
    check(!system.matrix_dir.empty(), "[system] files source needs matrix_dir");
  }
  check(integrator.dt > 0, "[integrator] dt must be positive");
  check(integrator.alpha >= -1.0 / 3.0 && integrator.alpha <= 0,
        "[integrator] alpha must lie in [-1/3, 0]");
  check(horizon.train >= integrator.dt,
        "[horizon] train must cover at least one step");
  check(horizon.test >= horizon.train, "[horizon] test must be >= train");
  if (basis.rank) check(*basis.rank >= 1, "[basis] rank must be >= 1");
  check(basis.tol > 0 && basis.tol < 1, "[basis] tol must lie in (0, 1)");
  check(!run.methods.empty(), "[run] methods must not be empty");
  for (const auto& method : run.methods)
    check(known_methods().contains(method),
          "[run] unknown method '" + method + "'");
  for (double lambda : resolved_lambda_grid())
    check(lambda >= 0, "[opinf] lambda values must be >= 0");
  check(copinf.omega > 0, "[copinf] omega must be positive");
  check(copinf.max_iter >= 1, "[copinf] max_iter must be >= 1");
  check(copinf.tol_abs >= 0 && copinf.tol_rel >= 0,
        "[copinf] tolerances must be nonnegative");
  check(copinf.penalty > 0, "[copinf] penalty must be positive");
  check(initial.scale >= 0, "[initial] scale must be nonnegative");
  if (input.waveform == InputSpec::Waveform::kChirp && input.sweep_time)
    check(*input.sweep_time > 0, "[input] sweep_time must be positive");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream stream(text);
    pt::read_ini(stream, tree);
  } catch (const pt::ini_parser_error& error) {
    fail(ErrorKind::kUsage, origin + ":" + std::to_string(error.line()) + ": " +
                                error.message());
  }

  static const std::set<std::string> sections{
      "system", "integrator", "input", "initial", "horizon",
      "basis",  "data",       "opinf", "copinf",  "run"};
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty())
      fail(ErrorKind::kUsage, origin + ": key '" + name + "' outside a section");
    if (!sections.contains(name))
      fail(ErrorKind::kUsage, origin + ": unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
    return Section(name, child ? &*child : nullptr, origin);
  };

  ExperimentConfig config;

  auto system = section("system");
  system.read("source", config.system.source,
              {{"chain", SystemSpec::Source::kChain},
               {"files", SystemSpec::Source::kFiles}});
  system.read("n", config.system.n);
  system.read("mass", config.system.mass);
  system.read("stiffness", config.system.stiffness);
  system.read("alpha_r", config.system.alpha_r);
  system.read("beta_r", config.system.beta_r);
  if (auto nodes = system.indices("input_nodes")) config.system.input_nodes = *nodes;
  if (auto dir = system.raw("matrix_dir")) config.system.matrix_dir = *dir;
  system.reject_unknown();

  auto integrator = section("integrator");
  integrator.read("dt", config.integrator.dt);
  integrator.read("gamma", config.integrator.gamma);
  integrator.read("beta", config.integrator.beta);
  integrator.read("alpha", config.integrator.alpha);
  integrator.reject_unknown();

  auto input = section("input");
  input.read("waveform", config.input.waveform,
             {{"sine", InputSpec::Waveform::kSine},
              {"constant", InputSpec::Waveform::kConstant},
              {"chirp", InputSpec::Waveform::kChirp}});
  input.read("amplitude", config.input.amplitude);
  std::optional<double> frequency;
  std::optional<double> angular;
  input.read("frequency", frequency);
  input.read("angular_frequency", angular);
  if (frequency && angular)
    input.bad("frequency", std::to_string(*frequency),
              "set either frequency or angular_frequency, not both");
  if (frequency) config.input.angular_frequency = 2.0 * std::numbers::pi * *frequency;
  if (angular) config.input.angular_frequency = *angular;
  input.read("phase", config.input.phase);
  input.read("start_frequency", config.input.start_frequency);
  input.read("end_frequency", config.input.end_frequency);
  input.read("sweep_time", config.input.sweep_time);
  input.reject_unknown();

  auto initial = section("initial");
  initial.read("displacement", config.initial.displacement,
               {{"zero", InitialSpec::Displacement::kZero},
                {"random", InitialSpec::Displacement::kRandom}});
  initial.read("scale", config.initial.scale);
  initial.reject_unknown();

  auto horizon = section("horizon");
  horizon.read("train", config.horizon.train);
  horizon.read("test", config.horizon.test);
  horizon.reject_unknown();

  auto basis = section("basis");
  basis.read("rank", config.basis.rank);
  basis.read("tol", config.basis.tol);
  basis.read("criterion", config.basis.criterion,
             {{"ratio", BasisSpec::Criterion::kRatio},
              {"energy", BasisSpec::Criterion::kEnergy}});
  basis.reject_unknown();

  auto data = section("data");
  data.read("derivatives", config.data.derivatives,
            {{"integrator", DataSpec::Derivatives::kIntegrator},
             {"finite-difference", DataSpec::Derivatives::kFiniteDifference}});
  data.reject_unknown();

  auto opinf = section("opinf");
  if (auto grid = opinf.doubles("lambda_grid")) config.opinf.lambda_grid = *grid;
  opinf.read("separate", config.opinf.separate);
  opinf.reject_unknown();

  auto copinf = section("copinf");
  copinf.read("omega", config.copinf.omega);
  copinf.read("max_iter", config.copinf.max_iter);
  copinf.read("tol_abs", config.copinf.tol_abs);
  copinf.read("tol_rel", config.copinf.tol_rel);
  copinf.read("penalty", config.copinf.penalty);
  copinf.read("trace", config.copinf.trace);
  copinf.reject_unknown();

  auto run = section("run");
  if (auto methods = run.raw("methods")) config.run.methods = split_list(*methods);
  if (auto out = run.raw("out")) config.run.out = *out;
  Index seed = 0;
  std::optional<Index> seed_value;
  run.read("seed", seed_value);
  if (seed_value) {
    if (*seed_value < 0) run.bad("seed", std::to_string(*seed_value), "must be >= 0");
    seed = *seed_value;
    config.run.seed = static_cast<std::uint64_t>(seed);
  }
  run.reject_unknown();

  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kUsage,
          "cannot read config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto config = parse_config(buffer.str(), path.string());
  // Matrix directories are relative to the file that names them.
  if (!config.system.matrix_dir.empty() && config.system.matrix_dir.is_relative())
    config.system.matrix_dir =
        (path.parent_path() / config.system.matrix_dir).lexically_normal();
  return config;
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
  if (overrides.out) config.run.out = *overrides.out;
  if (!overrides.methods.empty()) {
    config.run.methods.clear();
    for (const auto& entry : overrides.methods)
      for (auto& method : split_list(entry)) config.run.methods.push_back(method);
  }
  if (overrides.rank) config.basis.rank = *overrides.rank;
  if (overrides.tol) {
    config.basis.tol = *overrides.tol;
    if (!overrides.rank) config.basis.rank.reset();
  }
  if (overrides.lambda) config.opinf.lambda_grid = {*overrides.lambda};
  if (overrides.omega) config.copinf.omega = *overrides.omega;
  if (overrides.seed) config.run.seed = *overrides.seed;
}

std::string describe_config(const ExperimentConfig& config) {
  json system;
  if (config.system.source == SystemSpec::Source::kChain) {
    system = {{"source", "chain"},
              {"n", config.system.n},
              {"mass", config.system.mass},
              {"stiffness", config.system.stiffness},
              {"alpha_r", config.system.alpha_r},
              {"beta_r", config.system.beta_r},
              {"input_nodes", config.resolved_input_nodes()}};
  } else {
    system = {{"source", "files"},
              {"matrix_dir", config.system.matrix_dir.generic_string()}};
  }

  const double gamma = config.integrator.gamma
                           ? *config.integrator.gamma
                           : (1.0 - 2.0 * config.integrator.alpha) / 2.0;
  const double beta =
      config.integrator.beta
          ? *config.integrator.beta
          : (1.0 - config.integrator.alpha) * (1.0 - config.integrator.alpha) / 4.0;

  json input{{"waveform", waveform_name(config.input.waveform)},
             {"amplitude", config.input.amplitude}};
  switch (config.input.waveform) {
    case InputSpec::Waveform::kSine:
      input["angular_frequency"] = config.input.angular_frequency;
      input["frequency"] = config.input.angular_frequency / (2.0 * std::numbers::pi);
      input["phase"] = config.input.phase;
      break;
    case InputSpec::Waveform::kConstant:
      break;
    case InputSpec::Waveform::kChirp:
      input["start_frequency"] = config.input.start_frequency;
      input["end_frequency"] = config.input.end_frequency;
      input["sweep_time"] = config.input.sweep_time.value_or(config.horizon.test);
      input["phase"] = config.input.phase;
      break;
  }

  json basis{{"rank", config.basis.rank ? json(*config.basis.rank) : json(nullptr)},
             {"tol", config.basis.tol},
             {"criterion",
              config.basis.criterion == BasisSpec::Criterion::kRatio ? "ratio"
                                                                     : "energy"}};

  json root{
      {"system", system},
      {"integrator",
       {{"dt", config.integrator.dt},
        {"gamma", gamma},
        {"beta", beta},
        {"alpha", config.integrator.alpha},
        {"gamma_set", optional_number(config.integrator.gamma)},
        {"beta_set", optional_number(config.integrator.beta)}}},
      {"input", input},
      {"initial",
       {{"displacement", config.initial.displacement ==
                                 InitialSpec::Displacement::kZero
                             ? "zero"
                             : "random"},
        {"scale", config.initial.scale}}},
      {"horizon", {{"train", config.horizon.train}, {"test", config.horizon.test}}},
      {"basis", basis},
      {"data",
       {{"derivatives", config.data.derivatives ==
                                DataSpec::Derivatives::kIntegrator
                            ? "integrator"
                            : "finite-difference"}}},
      {"opinf",
       {{"lambda_grid", config.resolved_lambda_grid()},
        {"separate", config.opinf.separate}}},
      {"copinf",
       {{"omega", config.copinf.omega},
        {"max_iter", config.copinf.max_iter},
        {"tol_abs", config.copinf.tol_abs},
        {"tol_rel", config.copinf.tol_rel},
        {"penalty", config.copinf.penalty},
        {"trace", config.copinf.trace}}},
      {"run",
       {{"methods", config.run.methods}, {"seed", config.run.seed}}},
  };
  return root.dump(2);
}

}  // namespace mechrom
