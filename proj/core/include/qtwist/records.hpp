#pragma once

// Append-only JSONL result records and their CSV export.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qtwist {

struct ResultRecord {
  std::string kind;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::string config_hash;
  std::string timestamp;  // UTC ISO-8601
  std::string version;

  /// Same record with the timestamp cleared, for determinism comparisons.
  ResultRecord without_time() const;
  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

std::string code_version();
std::string utc_timestamp();

nlohmann::json to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& j);

class JsonlWriter {
 public:
  /// Opens for append; creates parent directories.
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const ResultRecord& r);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<ResultRecord> read_jsonl(const std::filesystem::path& path);
std::vector<ResultRecord> read_jsonl(std::istream& in);

/// Columns: kind, config_hash, timestamp, version, then the sorted union of
/// in.<key> and out.<key>. Numbers use 12 significant digits; non-scalar
/// values are written as JSON text.
void write_csv(const std::vector<ResultRecord>& records, std::ostream& out);
std::vector<ResultRecord> read_csv(std::istream& in);

/// format is "csv" or "jsonl"; anything else is rejected.
void export_records(const std::vector<ResultRecord>& records, const std::string& format,
                    const std::filesystem::path& path);

/// Stable 12-significant-digit rendering used by the CSV writer.
std::string format12(double v);

}  // namespace qtwist
