#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "scjarz/commands.hpp"

namespace {

// --threads wins, then SCJARZ_THREADS, then the config file.
std::optional<int> threads_from_env() {
  const char* env = std::getenv("SCJARZ_THREADS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(env, &used);
    if (used == std::string(env).size()) return n;
  } catch (const std::exception&) {
  }
  throw scjarz::NumericalError(scjarz::ErrorKind::Validation,
                               "SCJARZ_THREADS: expected an integer, got '" + std::string(env) + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-classical Weyl-symbol toolkit for the Jarzynski identity"};
  std::string command, config_path, out_dir;
  std::optional<int> threads;
  bool prefactor = false, monte_carlo = false;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;

  app.add_option("command", command, "gibbs | work | jarzynski | oracle")
      ->required()
      ->check(CLI::IsMember({"gibbs", "work", "jarzynski", "oracle"}));
  app.add_option("--config", config_path, "INI run configuration")->required();
  app.add_option("--out", out_dir, "output directory (default: run.out from the config)");
  app.add_option("--threads", threads, "worker threads (fallback: SCJARZ_THREADS)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--prefactor", prefactor, "include the stationary-phase prefactor");
  app.add_flag("--mc", monte_carlo, "add a Monte Carlo estimate of the identity");
  app.add_option("--samples", samples, "Monte Carlo sample count");
  app.add_option("--seed", seed, "Monte Carlo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : scjarz::kExitValidation;
  }

  try {
    scjarz::RunConfig config = scjarz::load_config(config_path);
    config.run.command = scjarz::command_from_string(command);
    if (!out_dir.empty()) config.run.out = out_dir;
    if (!threads) threads = threads_from_env();
    if (threads) config.run.threads = *threads;
    config.numerics.integrator.threads = config.run.threads;
    if (prefactor) config.run.prefactor = true;
    if (monte_carlo) config.run.monte_carlo = true;
    if (samples) config.run.samples = *samples;
    if (seed) config.run.seed = *seed;
    config.validate();

    const scjarz::CommandResult result = scjarz::run_command(config, config.run.out);
    std::cout << result.summary << '\n';
    for (const auto& f : result.files) std::cout << "  wrote " << f.string() << '\n';
    return result.exit_code;
  } catch (const scjarz::NumericalError& e) {
    std::cerr << "scjarz: " << scjarz::to_string(e.kind()) << ": " << e.what() << '\n';
    return scjarz::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "scjarz: " << e.what() << '\n';
    return scjarz::kExitNumerical;
  }
}
