#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace seisfeat {

inline constexpr double kMaxWavSampleRateHz = 512000.0;

/// Layout of a mono integer-PCM RIFF/WAVE file.
struct WavInfo {
  std::uint32_t sample_rate_hz = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint16_t block_align = 0;
  std::uint64_t data_offset = 0;  // byte offset of the first frame
  std::int64_t frame_count = 0;
};

/// Parses the header chunks. Accepts PCM (format tag 1) and
/// WAVE_FORMAT_EXTENSIBLE with a PCM sub-format, 8/16/24/32 bit, mono only.
WavInfo read_wav_info(const std::filesystem::path& path);

/// Reads `count` frames starting at `first_frame` as signed integer counts.
/// 8-bit data is re-centred to [-128, 127].
std::vector<std::int32_t> read_wav_counts(const std::filesystem::path& path,
                                          const WavInfo& info,
                                          std::int64_t first_frame,
                                          std::int64_t count);

void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const std::int16_t> samples,
                     std::uint32_t sample_rate_hz);

}  // namespace seisfeat
