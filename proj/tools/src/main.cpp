#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "msalab/errors.hpp"
#include "output.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRefusal = 3;

std::string output_dir(const msalab::cli::RunConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("MSALAB_OUT"); env && *env) return env;
  return "msalab-out";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace msalab::cli;

  CLI::App app{"Numerical laboratory for multi-scale analysis of long-range random operators"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_flag;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed, trials;
  std::optional<unsigned> workers;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "base seed");
  app.add_option("--trials", trials, "number of Monte Carlo trials");
  app.add_option("--workers", workers, "worker threads (scheduling only)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_flag, "output directory (default $MSALAB_OUT, then ./msalab-out)");
  app.add_option("--set", overrides, "override a key, e.g. --set msa.p=6 (repeatable)");

  std::optional<double> qm_rho;
  std::optional<std::int64_t> qm_n_max;
  const CommandEntry* chosen = nullptr;
  for (const auto& entry : command_table()) {
    auto* sub = app.add_subcommand(entry.name, entry.help);
    if (std::string(entry.name) == "quasi-metric") {
      sub->add_option("--rho", qm_rho, "weight exponent rho > 1");
      sub->add_option("--n-max", qm_n_max, "largest chain length");
    }
    sub->callback([&chosen, &entry] { chosen = &entry; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << '\n' << app.help();
    return kExitValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_ini(cfg, config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (workers) cfg.workers = *workers;
    if (qm_rho) cfg.qm_rho = *qm_rho;
    if (qm_n_max) cfg.qm_n_max = *qm_n_max;

    RunWriter writer(output_dir(cfg, out_flag), chosen->name, cfg);
    const auto seeds = chosen->run(cfg, writer, std::cout);
    const auto files = writer.finish(seeds);
    std::cout << "config " << cfg.hash() << "; wrote";
    for (const auto& f : files) std::cout << ' ' << f.string();
    std::cout << '\n';
    return kExitOk;
  } catch (const msalab::ValidationError& e) {
    std::cerr << "error: invalid configuration: " << e.what() << '\n';
    return kExitValidation;
  } catch (const msalab::NumericalRefusal& e) {
    std::cerr << "error: numerical refusal: " << e.what() << '\n';
    return kExitRefusal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
