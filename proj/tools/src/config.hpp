#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "msalab/localization.hpp"
#include "msalab/msa_engine.hpp"

namespace msalab::cli {

struct KernelBlock {
  std::string kind = "log_power";  // log_power | stretched | table
  double gamma = 1.0;
  double rho = 2.0;
  double s = 0.5;
  double scale = 1.0;
  std::string table;               // "disp:re[:im] ..." with comma-separated displacement
  std::vector<double> phase;       // wavevector, empty for none
};

struct DisorderBlock {
  std::string kind = "uniform";    // uniform | power | bernoulli | quantile_table
  double M = 1.0;
  double lambda = 1.0;
  double beta = 1.0;
  double beta0 = 1.0;
  double atom_lo = -1.0;
  double atom_hi = 1.0;
  double prob = 0.5;
  std::vector<double> quantiles;
};

struct RunConfig {
  KernelBlock kernel;
  DisorderBlock disorder;
  // [model]
  int d = 1;
  double epsilon = 0.01;
  // [geometry]
  std::int64_t L = 14;
  std::int64_t l = 8;
  double alpha = 1.3;
  std::vector<std::int64_t> scales{16, 32};
  // [msa]
  double p = 6.0;
  double gamma = 1.0;
  double rho = 2.0;
  double rho_prime = 1.5;
  double kappa0 = 0.2;
  double kappa_inf = 0.1;
  double kappa = 0.15;
  double E = 0.0;
  double e_lo = -0.1;
  double e_hi = 0.1;
  int grid_points = 41;
  std::string constant = "two_pow_rho";  // two_pow_rho | alpha_pow_rho_prime
  int horizon = 1000;
  std::optional<double> logL0;
  bool same_seed = false;
  // [wegner]
  std::vector<double> windows{1e-3};
  double bound_target = 0.0;  // > 0 picks the window per scale
  // [quasi_metric]
  double qm_rho = 2.0;
  std::int64_t qm_n_max = 8;
  std::uint64_t qm_samples = 1000;
  // [cover]
  int cover_d = 1;
  std::int64_t cover_l = 1;
  std::int64_t cover_L = 30;
  // [decay]
  std::int64_t side = 1025;
  std::uint64_t n_seeds = 50;
  std::vector<std::uint64_t> seed_list;
  double edge_fraction = 0.25;
  double floor = 1e-13;
  std::string family = "log_power";
  std::optional<double> rho_hint;
  double window_lo = -std::numeric_limits<double>::infinity();
  double window_hi = std::numeric_limits<double>::infinity();
  bool keep_profiles = false;
  // [execution]
  std::uint64_t seed = 1;
  std::uint64_t first_trial = 0;
  std::uint64_t trials = 1000;
  unsigned workers = 1;
  std::string out;

  HoppingKernel make_kernel() const;
  DisorderSpec make_disorder() const;
  ModelParams model() const;
  WeightParams weights() const;
  MSAParams msa() const;
  TrialPlan plan() const;
  YeungOonoConfig ensemble() const;
  std::vector<std::uint64_t> ensemble_seeds() const;

  /// Everything that affects payload records; excludes workers and out.
  nlohmann::json canonical() const;
  std::string hash() const;
};

/// Reads an INI file (sections [kernel] [disorder] [model] [geometry] [msa]
/// [wegner] [quasi_metric] [cover] [decay] [execution]). Unknown sections or
/// keys are rejected.
void load_ini(RunConfig& cfg, const std::string& path);

/// Applies one "section.key=value" override.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Parses "disp:re[:im]" entries separated by whitespace.
std::vector<std::pair<Site, Complex>> parse_table(const std::string& text, int d);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace msalab::cli
