#pragma once

// Resumable family scans. Each X in the grid is split into d-chunks; every
// finished chunk appends its exact partial sums (with a SHA-256 checksum) to
// a checkpoint file, so an interrupted run resumes at the first missing chunk
// and reduces to the same bits as an uninterrupted one.

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "qtwist/config.hpp"
#include "qtwist/records.hpp"

namespace qtwist {

struct ScanOptions {
  std::optional<std::filesystem::path> checkpoint;  // default <output_dir>/<hash>.ckpt.jsonl
  bool resume = true;
  /// Stop (incomplete) after this many newly computed chunks; test hook for
  /// interruption.
  std::optional<u64> stop_after_chunks;
  std::function<void(const ResultRecord&)> sink;
};

struct ScanOutcome {
  std::vector<ResultRecord> records;  // empty unless complete
  bool complete = false;
  u64 chunks_total = 0;
  u64 chunks_computed = 0;  // in this run
  u64 chunks_resumed = 0;   // taken from the checkpoint
  u64 chunks_rejected = 0;  // checkpoint entries that failed their checksum
  std::filesystem::path checkpoint;
};

ScanOutcome run_scan(const RunConfig& cfg, const ScanOptions& opt = {});

}  // namespace qtwist
