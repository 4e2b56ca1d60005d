#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seisfeat/wav.hpp"

namespace seisfeat {

/// Calibrated pressure samples (μPa) for one channel. Sample `i` sits at
/// absolute index `start_index + i` on the channel grid, so its time is
/// `origin_s + (start_index + i) / sample_rate_hz` with no accumulated drift.
struct SampleBuffer {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  double origin_s = 0.0;
  std::int64_t start_index = 0;
  int channel_id = 0;

  double start_time_s() const { return time_of_index(start_index); }
  double time_at(std::size_t i) const {
    return time_of_index(start_index + static_cast<std::int64_t>(i));
  }
  double time_of_index(std::int64_t index) const {
    return origin_s + static_cast<double>(index) / sample_rate_hz;
  }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  std::int64_t end_index() const {
    return start_index + static_cast<std::int64_t>(samples.size());
  }
  std::span<const double> view() const { return samples; }
};

/// Linear count-to-pressure map:
///   pressure_μPa = count / counts_full_scale * 10^(sensitivity_db / 20)
/// `counts_full_scale` is the raw word value that represents full scale. For
/// 12-bit data left-aligned in 16-bit words this is 32768; for right-aligned
/// 12-bit data it is 2048.
struct CalibrationSpec {
  std::int64_t counts_full_scale = 32768;
  double sensitivity_db = 0.0;

  double full_scale_upa() const;
  double to_upa(std::int64_t count) const;
  void validate() const;
};

enum class GapPolicy { error, zero_fill };

const char* to_string(GapPolicy policy);
GapPolicy parse_gap_policy(const std::string& text);

struct ManifestFile {
  std::filesystem::path path;
  double start_time_s = 0.0;
  WavInfo info;
  std::int64_t first_index = 0;  // position on the channel grid

  std::int64_t end_index() const { return first_index + info.frame_count; }
};

/// One channel's time-ordered audio files plus calibration. Immutable once
/// built; safe to read concurrently.
struct ChannelManifest {
  int channel_id = 0;
  std::vector<ManifestFile> files;
  CalibrationSpec calibration;
  GapPolicy gap_policy = GapPolicy::error;
  double sample_rate_hz = 0.0;
  double origin_s = 0.0;  // start time of the earliest file

  std::int64_t total_samples() const {
    return files.empty() ? 0 : files.back().end_index();
  }
  double covered_begin_s() const { return origin_s; }
  double covered_end_s() const {
    return origin_s + static_cast<double>(total_samples()) / sample_rate_hz;
  }
  double duration_s() const { return covered_end_s() - covered_begin_s(); }
};

struct FileEntry {
  std::filesystem::path path;
  double start_time_s = 0.0;
};

/// Probes every file header, sorts by start time, places files on a common
/// sample grid and validates continuity against the gap policy. Starts that
/// land within one sample period of the previous file's end are snapped to
/// it. Overlaps beyond one sample are always rejected; gaps are rejected
/// under GapPolicy::error and zero-filled under GapPolicy::zero_fill.
ChannelManifest make_channel_manifest(int channel_id,
                                      std::vector<FileEntry> files,
                                      const CalibrationSpec& calibration,
                                      GapPolicy gap_policy);

/// Parses the text manifest format:
///
///   # comment
///   calibration <channel_id> <counts_full_scale> <sensitivity_db> [error|zero_fill]
///   file <channel_id> <path> <start_time_s>
///
/// Paths may be double-quoted and are resolved relative to the manifest's
/// directory. Channels are returned in ascending channel_id order.
std::vector<ChannelManifest> open_manifest(
    const std::filesystem::path& manifest_path);

void write_manifest(const std::filesystem::path& manifest_path,
                    std::span<const ChannelManifest> channels);

/// Reads `count` calibrated samples starting at grid index `first_index`.
SampleBuffer read_samples(const ChannelManifest& manifest,
                          std::int64_t first_index, std::int64_t count);

/// Reads round(duration_s * fs) samples starting at the sample nearest to
/// `start_s`, stitching across file boundaries.
SampleBuffer read_chunk(const ChannelManifest& manifest, double start_s,
                        double duration_s);

/// Sequential fixed-size chunk reader over a whole channel.
class ChunkReader {
 public:
  ChunkReader(const ChannelManifest& manifest, double chunk_s = 60.0);

  bool done() const { return next_ >= manifest_->total_samples(); }
  SampleBuffer next();

 private:
  const ChannelManifest* manifest_;
  std::int64_t chunk_samples_;
  std::int64_t next_ = 0;
};

}  // namespace seisfeat
