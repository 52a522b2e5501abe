#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace msalab::cli {

/// Runs one subcommand: fills the writer and prints a short report to `log`.
/// Returns the seed roster recorded in the manifest.
using Command = std::vector<std::uint64_t> (*)(const RunConfig& cfg, RunWriter& out, std::ostream& log);

struct CommandEntry {
  const char* name;
  const char* help;
  Command run;
};

const std::vector<CommandEntry>& command_table();

std::vector<std::uint64_t> cmd_quasi_metric(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_wegner(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_pair_resonance(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_bad_pair(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_coupling(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_ladder(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_eigen_decay(const RunConfig& cfg, RunWriter& out, std::ostream& log);
std::vector<std::uint64_t> cmd_cover_check(const RunConfig& cfg, RunWriter& out, std::ostream& log);

/// Window w with wegner_bound(spec, d, L, w) = target.
double wegner_window_for(const DisorderSpec& spec, int d, std::int64_t L, double target);

/// Up to three bad centres z with B_l(z) inside B_L(0): the first uniform,
/// the others uniform or (with probability 1/2 each) within 8l of the first.
std::vector<Site> random_bad_centers(int d, std::int64_t l, std::int64_t L, std::uint64_t seed, std::uint64_t trial);

}  // namespace msalab::cli
