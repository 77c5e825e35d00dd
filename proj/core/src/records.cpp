#include "qtwist/records.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>
#include <sstream>

#include "qtwist/errors.hpp"

#ifndef QTWIST_VERSION
#define QTWIST_VERSION "dev"
#endif

namespace qtwist {

namespace fs = std::filesystem;

ResultRecord ResultRecord::without_time() const {
  ResultRecord r = *this;
  r.timestamp.clear();
  return r;
}

std::string code_version() { return QTWIST_VERSION; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json to_json(const ResultRecord& r) {
  return {{"kind", r.kind},          {"inputs", r.inputs},       {"outputs", r.outputs},
          {"config_hash", r.config_hash}, {"timestamp", r.timestamp}, {"version", r.version}};
}

ResultRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("record must be a JSON object");
  ResultRecord r;
  auto str = [&](const char* k) {
    if (!j.contains(k) || !j.at(k).is_string()) throw ParseError(std::string("record field '") + k + "' must be a string");
    return j.at(k).get<std::string>();
  };
  r.kind = str("kind");
  r.config_hash = str("config_hash");
  r.timestamp = str("timestamp");
  r.version = str("version");
  if (j.contains("inputs")) r.inputs = j.at("inputs");
  if (j.contains("outputs")) r.outputs = j.at("outputs");
  if (!r.inputs.is_object()) throw ParseError("record field 'inputs' must be an object");
  if (!r.outputs.is_object()) throw ParseError("record field 'outputs' must be an object");
  return r;
}

JsonlWriter::JsonlWriter(const fs::path& path) : path_(path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw Error("cannot open " + path.string() + " for append");
}

void JsonlWriter::write(const ResultRecord& r) {
  out_ << to_json(r).dump() << '\n';
  out_.flush();
  if (!out_) throw Error("write to " + path_.string() + " failed");
}

std::vector<ResultRecord> read_jsonl(std::istream& in) {
  std::vector<ResultRecord> out;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("JSONL line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("JSONL line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ResultRecord> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_jsonl(in);
}

std::string format12(double v) {
  if (!std::isfinite(v)) throw PreconditionError("non-finite value cannot be exported");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

const char* const kFixed[] = {"kind", "config_hash", "timestamp", "version"};

std::string cell_of(const nlohmann::json& v) {
  if (v.is_number_float()) return format12(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    // keep strings that would read back as JSON distinguishable
    if (!nlohmann::json::accept(s)) return s;
    return v.dump();
  }
  return v.dump();
}

nlohmann::json value_of(const std::string& cell) {
  if (nlohmann::json::accept(cell)) return nlohmann::json::parse(cell);
  return cell;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

// One CSV record (fields may contain quoted newlines). Returns false at EOF.
bool read_row(std::istream& in, std::vector<std::string>& row) {
  row.clear();
  std::string field;
  bool quoted = false, any = false;
  for (int ch; (ch = in.get()) != EOF;) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("CSV: unterminated quoted field");
  if (!any) return false;
  row.push_back(std::move(field));
  return true;
}

}  // namespace

void write_csv(const std::vector<ResultRecord>& records, std::ostream& out) {
  std::set<std::string> in_keys, out_keys;
  for (const auto& r : records) {
    for (auto it = r.inputs.begin(); it != r.inputs.end(); ++it) in_keys.insert(it.key());
    for (auto it = r.outputs.begin(); it != r.outputs.end(); ++it) out_keys.insert(it.key());
  }
  std::vector<std::string> header(std::begin(kFixed), std::end(kFixed));
  for (const auto& k : in_keys) header.push_back("in." + k);
  for (const auto& k : out_keys) header.push_back("out." + k);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << quote(header[i]);
  out << '\n';
  for (const auto& r : records) {
    std::vector<std::string> row{r.kind, r.config_hash, r.timestamp, r.version};
    for (const auto& k : in_keys) row.push_back(r.inputs.contains(k) ? cell_of(r.inputs.at(k)) : "");
    for (const auto& k : out_keys) row.push_back(r.outputs.contains(k) ? cell_of(r.outputs.at(k)) : "");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << quote(row[i]);
    out << '\n';
  }
}

std::vector<ResultRecord> read_csv(std::istream& in) {
  std::vector<std::string> header, row;
  if (!read_row(in, header)) throw ParseError("CSV: missing header");
  for (std::size_t i = 0; i < 4; ++i)
    if (header.size() <= i || header[i] != kFixed[i]) throw ParseError(std::string("CSV: expected column '") + kFixed[i] + "'");
  std::vector<ResultRecord> out;
  while (read_row(in, row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) throw ParseError("CSV: row has " + std::to_string(row.size()) + " fields, header has " +
                                                      std::to_string(header.size()));
    ResultRecord r;
    r.kind = row[0];
    r.config_hash = row[1];
    r.timestamp = row[2];
    r.version = row[3];
    for (std::size_t i = 4; i < header.size(); ++i) {
      if (row[i].empty()) continue;
      const std::string& h = header[i];
      if (h.rfind("in.", 0) == 0) r.inputs[h.substr(3)] = value_of(row[i]);
      else if (h.rfind("out.", 0) == 0) r.outputs[h.substr(4)] = value_of(row[i]);
      else throw ParseError("CSV: unknown column '" + h + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void export_records(const std::vector<ResultRecord>& records, const std::string& format, const fs::path& path) {
  if (format != "csv" && format != "jsonl") throw PreconditionError("unknown export format '" + format + "'");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  if (format == "csv") {
    write_csv(records, out);
  } else {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
  }
  if (!out) throw Error("write to " + path.string() + " failed");
}

}  // namespace qtwist
