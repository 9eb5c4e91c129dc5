#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crisis/event_store.hpp"

namespace crisis::synth {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::string event_id = "synthetic-event";
  Timestamp start = 1577836800;  // 2020-01-01T00:00:00Z
  double hours = 48;
  double snapshot_minutes = 30;
  double manifest_window_hours = 2;
  std::size_t authors = 80;
  double base_blogs_per_hour = 6;
  double peak_blogs_per_hour = 40;
  double peak_hour = 30;
};

// Ground truth tallied while generating, independent of the bucketing code.
// Every field is cumulative up to (excluding) `end`.
struct ManifestBucket {
  std::size_t index = 0;
  Timestamp end = 0;
  std::uint64_t blogs = 0;
  std::uint64_t original_blogs = 0;
  std::uint64_t government_blogs = 0;
  std::uint64_t verified_authors = 0;  // distinct verified authors of original blogs
  std::uint64_t likes = 0;
  std::uint64_t comments = 0;          // sum of blog comment counters
  std::uint64_t forwards = 0;
  std::uint64_t comment_records = 0;
  std::uint64_t responses = 0;
  std::uint64_t reads = 0;
  std::uint64_t discussions = 0;
  std::uint64_t positive = 0;          // generated (true) classes of blogs and comments
  std::uint64_t negative = 0;
  std::uint64_t neutral = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::string event_id;
  Timestamp start = 0;
  double window_hours = 0;
  std::size_t bucket_count = 0;
  std::vector<ManifestBucket> buckets;
};

struct SynthResult {
  EventDataset dataset;
  Manifest manifest;
};

SynthResult generate(const SynthConfig& config);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace crisis::synth
