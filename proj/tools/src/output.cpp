#include "output.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "msalab/errors.hpp"

namespace msalab::cli {

namespace fs = std::filesystem;

std::string iso_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

std::string cell(std::optional<double> x) { return x ? cell(*x) : std::string(); }
std::string cell(std::int64_t x) { return std::to_string(x); }
std::string cell(std::uint64_t x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "true" : "false"; }

std::string cell(const Site& x) {
  std::string s;
  for (int k = 0; k < x.dim(); ++k) s += (k ? ";" : "") + std::to_string(x[k]);
  return s;
}

nlohmann::json to_json(const Site& x) {
  auto j = nlohmann::json::array();
  for (int k = 0; k < x.dim(); ++k) j.push_back(x[k]);
  return j;
}

nlohmann::json to_json(std::optional<double> x) { return x ? nlohmann::json(*x) : nlohmann::json(); }

RunWriter::RunWriter(fs::path out_dir, std::string subcommand, const RunConfig& cfg)
    : dir_(std::move(out_dir)),
      subcommand_(std::move(subcommand)),
      hash_(cfg.hash()),
      cfg_(cfg),
      started_(std::chrono::system_clock::now()) {}

void RunWriter::table(const std::string& file, std::vector<std::string> header) {
  tables_[file] = Table{std::move(header), {}};
}

void RunWriter::row(const std::string& file, std::vector<std::string> cells) {
  auto& t = tables_.at(file);
  require(cells.size() == t.header.size(), "internal: CSV row width mismatch in " + file);
  t.rows.push_back(std::move(cells));
}

std::vector<fs::path> RunWriter::finish(const std::vector<std::uint64_t>& seeds) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir_.string() + "': " + ec.message());

  std::vector<std::string> files;
  {
    const std::string name = subcommand_ + ".jsonl";
    std::ofstream os(dir_ / name);
    for (const auto& r : records_) os << r.dump() << '\n';
    if (!os) throw ValidationError("cannot write " + (dir_ / name).string());
    files.push_back(name);
  }
  for (const auto& [name, t] : tables_) {
    std::ofstream os(dir_ / name);
    for (std::size_t k = 0; k < t.header.size(); ++k) os << (k ? "," : "") << t.header[k];
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
      os << '\n';
    }
    if (!os) throw ValidationError("cannot write " + (dir_ / name).string());
    files.push_back(name);
  }

  const fs::path manifest_path = dir_ / "manifest.json";
  nlohmann::json manifest = nlohmann::json::object();
  if (fs::exists(manifest_path)) {
    std::ifstream is(manifest_path);
    manifest = nlohmann::json::parse(is, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) manifest = nlohmann::json::object();
  }
  if (manifest.contains("runs") && manifest["runs"].contains(subcommand_)) {
    for (const auto& old : manifest["runs"][subcommand_].value("files", nlohmann::json::array())) {
      const auto name = old.get<std::string>();
      if (std::find(files.begin(), files.end(), name) == files.end()) fs::remove(dir_ / name, ec);
    }
  }
  manifest["artifact"] = "msalab";
  manifest["version"] = kVersion;
  manifest["runs"][subcommand_] = {
      {"config_hash", hash_},
      {"started", iso_timestamp(started_)},
      {"finished", iso_timestamp(std::chrono::system_clock::now())},
      {"files", files},
      {"seeds", seeds},
      {"first_trial", cfg_.first_trial},
      {"trials", cfg_.trials},
      {"workers", cfg_.workers},
      {"records", records_.size()},
  };
  std::ofstream os(manifest_path);
  os << manifest.dump(2) << '\n';
  if (!os) throw ValidationError("cannot write " + manifest_path.string());

  std::vector<fs::path> out;
  for (const auto& f : files) out.push_back(dir_ / f);
  out.push_back(manifest_path);
  return out;
}

}  // namespace msalab::cli
