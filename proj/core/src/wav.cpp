#include "seisfeat/wav.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "seisfeat/error.hpp"

namespace seisfeat {
namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file: " + path.string());
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) ||
      std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file: " + path.string());
  }

  WavInfo info;
  bool have_fmt = false;
  std::uint64_t pos = 12;
  while (pos + 8 <= file_size) {
    unsigned char header[8];
    in.seekg(static_cast<std::streamoff>(pos));
    if (!in.read(reinterpret_cast<char*>(header), 8)) break;
    const std::uint32_t size = le32(header + 4);
    const std::uint64_t body = pos + 8;

    if (std::memcmp(header, "fmt ", 4) == 0) {
      if (size < 16) throw Error("truncated fmt chunk: " + path.string());
      std::array<unsigned char, 40> fmt{};
      const std::size_t n = std::min<std::size_t>(size, fmt.size());
      if (!in.read(reinterpret_cast<char*>(fmt.data()), static_cast<std::streamsize>(n))) {
        throw Error("truncated fmt chunk: " + path.string());
      }
      std::uint16_t tag = le16(&fmt[0]);
      const std::uint16_t channels = le16(&fmt[2]);
      info.sample_rate_hz = le32(&fmt[4]);
      info.block_align = le16(&fmt[12]);
      info.bits_per_sample = le16(&fmt[14]);
      if (tag == kFormatExtensible && n >= 26) tag = le16(&fmt[24]);
      if (tag != kFormatPcm) {
        throw Error("unsupported WAV encoding (integer PCM only): " + path.string());
      }
      if (channels != 1) {
        throw Error("unsupported channel count " + std::to_string(channels) +
                    " (mono only): " + path.string());
      }
      const auto bits = info.bits_per_sample;
      if (bits != 8 && bits != 16 && bits != 24 && bits != 32) {
        throw Error("unsupported bit depth " + std::to_string(bits) + ": " + path.string());
      }
      if (info.block_align != bits / 8) {
        throw Error("inconsistent block alignment: " + path.string());
      }
      if (info.sample_rate_hz == 0 || info.sample_rate_hz > kMaxWavSampleRateHz) {
        throw Error("unsupported sample rate " + std::to_string(info.sample_rate_hz) +
                    ": " + path.string());
      }
      have_fmt = true;
    } else if (std::memcmp(header, "data", 4) == 0) {
      if (!have_fmt) throw Error("data chunk before fmt chunk: " + path.string());
      info.data_offset = body;
      // Streaming writers leave 0 or 0xFFFFFFFF in the size field.
      std::uint64_t bytes = size;
      if (bytes == 0 || bytes == 0xFFFFFFFFu || body + bytes > file_size) {
        bytes = file_size - body;
      }
      info.frame_count = static_cast<std::int64_t>(bytes / info.block_align);
      return info;
    }
    pos = body + size + (size & 1u);
  }
  throw Error("no data chunk: " + path.string());
}

std::vector<std::int32_t> read_wav_counts(const std::filesystem::path& path,
                                          const WavInfo& info,
                                          std::int64_t first_frame,
                                          std::int64_t count) {
  if (first_frame < 0 || count < 0 || first_frame + count > info.frame_count) {
    throw Error("frame range outside file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file: " + path.string());
  const std::size_t width = info.block_align;
  std::vector<unsigned char> raw(static_cast<std::size_t>(count) * width);
  in.seekg(static_cast<std::streamoff>(info.data_offset +
                                       static_cast<std::uint64_t>(first_frame) * width));
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size()))) {
    throw Error("short read: " + path.string());
  }

  std::vector<std::int32_t> out(static_cast<std::size_t>(count));
  const unsigned char* p = raw.data();
  switch (info.bits_per_sample) {
    case 8:
      for (auto& v : out) v = static_cast<std::int32_t>(*p++) - 128;
      break;
    case 16:
      for (auto& v : out) {
        v = static_cast<std::int16_t>(le16(p));
        p += 2;
      }
      break;
    case 24:
      for (auto& v : out) {
        const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                                static_cast<std::uint32_t>(p[1]) << 8 |
                                static_cast<std::uint32_t>(p[2]) << 16;
        v = static_cast<std::int32_t>(u << 8) >> 8;
        p += 3;
      }
      break;
    case 32:
      for (auto& v : out) {
        v = static_cast<std::int32_t>(le32(p));
        p += 4;
      }
      break;
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const std::int16_t> samples,
                     std::uint32_t sample_rate_hz) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, sample_rate_hz);
  put32(out, sample_rate_hz * 2);
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, data_bytes);
  std::vector<char> body(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto u = static_cast<std::uint16_t>(samples[i]);
    body[2 * i] = static_cast<char>(u & 0xff);
    body[2 * i + 1] = static_cast<char>(u >> 8);
  }
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace seisfeat
