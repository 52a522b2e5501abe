#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"

namespace msalab::cli {

inline constexpr const char* kVersion = "0.1.0";

std::string iso_timestamp(std::chrono::system_clock::time_point t);

std::string cell(double x);
std::string cell(std::optional<double> x);
std::string cell(std::int64_t x);
std::string cell(std::uint64_t x);
std::string cell(bool x);
std::string cell(const Site& x);

nlohmann::json to_json(const Site& x);
nlohmann::json to_json(std::optional<double> x);

/// Collects the records of one subcommand and writes <name>.jsonl, the CSV
/// tables and the manifest entry on finish().
class RunWriter {
 public:
  RunWriter(std::filesystem::path out_dir, std::string subcommand, const RunConfig& cfg);

  void record(nlohmann::json j) { records_.push_back(std::move(j)); }

  /// Starts a CSV table; the primary table is "<subcommand>.csv".
  void table(const std::string& file, std::vector<std::string> header);
  void row(const std::string& file, std::vector<std::string> cells);

  const std::vector<nlohmann::json>& records() const { return records_; }

  /// Writes every file and merges this run into manifest.json. Files listed by
  /// an earlier run of the same subcommand and not produced now are removed.
  std::vector<std::filesystem::path> finish(const std::vector<std::uint64_t>& seeds);

  std::string primary_csv() const { return subcommand_ + ".csv"; }

 private:
  struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
  };

  std::filesystem::path dir_;
  std::string subcommand_;
  std::string hash_;
  const RunConfig& cfg_;
  std::chrono::system_clock::time_point started_;
  std::vector<nlohmann::json> records_;
  std::map<std::string, Table> tables_;
};

}  // namespace msalab::cli
