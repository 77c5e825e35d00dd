#pragma once

// Run configuration: a key = value text file with flag overrides. The
// canonical serialization is hashed (SHA-256) and the hash is embedded in
// every record a run writes.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtwist/arith.hpp"

namespace qtwist {

struct RunConfig {
  std::string kind = "moments";          // moments | charsum | zerosum
  std::vector<std::string> curves{"37a1"};
  std::vector<std::filesystem::path> form_files;
  bool all_pairs = true;                 // union of every (kappa, a) class
  int kappa = 1;
  i64 a = 1;
  int sign = -1;                         // required root number; 0 = no filter
  std::vector<double> X_grid{1e4, 1e5};
  std::string x_rule = "default";        // default | sqrt | cbrt | fixed:<x>
  std::string L_rule = "logX";           // logX | fixed:<L>
  bool zero_sums = false;
  int kmax = 4;
  std::vector<u64> n_values{1, 9};       // charsum
  u64 v = 1;
  double eps = 0.05;
  u64 seed = 1;
  std::string output_dir = "qtwist-out";
  std::string precision = "double";      // double | extended
  unsigned workers = 1;
  u64 chunk = u64{1} << 16;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  /// Canonical "key = value" text, one key per line in fixed order. With
  /// runtime = false, output_dir and workers are left out (neither changes a number).
  std::string to_text(bool runtime = true) const;
  /// SHA-256 of to_text(false), hex.
  std::string hash() const;
  void validate() const;
};

/// Parse the key = value format ('#' comments, blank lines ignored). Unknown
/// keys and malformed values raise ParseError naming the key and line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Apply one "key=value" override.
void apply_override(RunConfig& cfg, std::string_view assignment);

/// x for a given X under the rule.
double resolve_x(const std::string& rule, double X);
/// Kernel dilation L for a given X under the rule.
double resolve_L(const std::string& rule, double X);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace qtwist
