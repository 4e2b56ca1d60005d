#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seisfeat/pipeline.hpp"
#include "seisfeat/pulse_detect.hpp"
#include "seisfeat/signal_io.hpp"
#include "seisfeat/weighting.hpp"

namespace seisfeat {

enum class RunMode { serial, parallel };

const char* to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

struct RunConfig {
  RunMode mode = RunMode::serial;
  int worker_count = 1;
  std::vector<int> channels;  // empty selects every manifest channel
  std::vector<WeightingKind> weightings{kAllWeightings.begin(),
                                        kAllWeightings.end()};
  DetectorConfig detector;
  std::filesystem::path output_path;
  std::string run_id = "run";
  double chunk_s = 60.0;
  /// Shuffles task dispatch order; the catalog must not change.
  std::optional<std::uint64_t> dispatch_seed;

  void validate() const;
};

struct ChannelTiming {
  int channel_id = 0;
  double wall_seconds = 0.0;
  double audio_seconds = 0.0;
  std::int64_t pulses = 0;
};

struct RuntimeReport {
  std::vector<ChannelTiming> channels;
  double total_wall_seconds = 0.0;
  int worker_count = 1;
  RunMode mode = RunMode::serial;
  double channel_hours = 0.0;
  std::int64_t records = 0;
  std::int64_t points = 0;
};

struct RunResult {
  std::filesystem::path catalog_path;
  RuntimeReport report;
  RunLedger ledger;
  std::vector<std::int64_t> pulses_per_channel;
};

/// Runs one (channel, weighting) task: streams the channel, detects on the
/// calibrated unweighted signal and extracts records on the weighted one.
std::vector<FeatureRecord> process_channel(const ChannelManifest& manifest,
                                           WeightingKind weighting,
                                           const DetectorConfig& detector,
                                           double chunk_s = 60.0);

/// Processes every selected (channel, weighting) pair and writes one sorted
/// catalog. Any task failure aborts the run with a per-channel message and
/// leaves no catalog behind.
RunResult run(const RunConfig& config,
              std::span<const ChannelManifest> manifests);

/// Serial runtime for the whole deployment extrapolated from one channel.
double estimate_serial(int total_channels, double measured_channel_seconds);

/// Plain-text per-channel / all-channel table followed by key=value lines.
std::string format_runtime_report(const RuntimeReport& report);
std::string format_ledger(const RunLedger& ledger,
                          std::span<const std::int64_t> pulses_per_unit);

}  // namespace seisfeat
