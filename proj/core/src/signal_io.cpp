#include "seisfeat/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "seisfeat/error.hpp"
#include "seisfeat/numeric_text.hpp"
#include "seisfeat/stream_buffer.hpp"

namespace seisfeat {

double CalibrationSpec::full_scale_upa() const {
  return std::pow(10.0, sensitivity_db / 20.0);
}

double CalibrationSpec::to_upa(std::int64_t count) const {
  return static_cast<double>(count) * full_scale_upa() /
         static_cast<double>(counts_full_scale);
}

void CalibrationSpec::validate() const {
  if (counts_full_scale <= 0) throw Error("counts_full_scale must be positive");
  if (!std::isfinite(sensitivity_db)) throw Error("sensitivity_db must be finite");
}

const char* to_string(GapPolicy policy) {
  return policy == GapPolicy::error ? "error" : "zero_fill";
}

GapPolicy parse_gap_policy(const std::string& text) {
  if (text == "error") return GapPolicy::error;
  if (text == "zero_fill") return GapPolicy::zero_fill;
  throw Error("unknown gap policy '" + text + "'");
}

ChannelManifest make_channel_manifest(int channel_id,
                                      std::vector<FileEntry> files,
                                      const CalibrationSpec& calibration,
                                      GapPolicy gap_policy) {
  calibration.validate();
  if (files.empty()) {
    throw Error("channel " + std::to_string(channel_id) + " has no files");
  }
  std::stable_sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.start_time_s < b.start_time_s;
  });

  ChannelManifest m;
  m.channel_id = channel_id;
  m.calibration = calibration;
  m.gap_policy = gap_policy;
  m.origin_s = files.front().start_time_s;

  for (const auto& entry : files) {
    if (!std::filesystem::exists(entry.path)) {
      throw Error("missing file: " + entry.path.string());
    }
    ManifestFile f;
    f.path = entry.path;
    f.start_time_s = entry.start_time_s;
    f.info = read_wav_info(entry.path);
    if (m.files.empty()) {
      m.sample_rate_hz = f.info.sample_rate_hz;
      f.first_index = 0;
    } else {
      const ManifestFile& prev = m.files.back();
      if (f.info.sample_rate_hz != prev.info.sample_rate_hz) {
        throw Error("sample rate changes within channel " + std::to_string(channel_id) +
                    ": " + entry.path.string());
      }
      if (!(f.start_time_s > prev.start_time_s)) {
        throw Error("overlapping file times: " + entry.path.string() +
                    " starts with " + prev.path.string());
      }
      const double period = 1.0 / m.sample_rate_hz;
      const double expected = m.origin_s + static_cast<double>(prev.end_index()) * period;
      const double gap = f.start_time_s - expected;
      // One sample period of slack absorbs header-time rounding.
      const double tolerance = period * (1.0 + 1e-9);
      if (gap < -tolerance) {
        throw Error("overlapping file times: " + entry.path.string() + " overlaps " +
                    prev.path.string() + " by " + format_fixed(-gap, 9) + " s");
      }
      if (gap > tolerance) {
        if (gap_policy == GapPolicy::error) {
          throw Error("gap of " + format_fixed(gap, 9) + " s before " +
                      entry.path.string());
        }
        f.first_index = std::llround((f.start_time_s - m.origin_s) * m.sample_rate_hz);
      } else {
        f.first_index = prev.end_index();
      }
    }
    m.files.push_back(std::move(f));
  }
  return m;
}

namespace {

struct PendingChannel {
  std::vector<FileEntry> files;
  std::optional<CalibrationSpec> calibration;
  GapPolicy policy = GapPolicy::error;
};

[[noreturn]] void manifest_error(const std::filesystem::path& path, int line,
                                 const std::string& what) {
  throw Error("unparseable manifest " + path.string() + ":" + std::to_string(line) +
              ": " + what);
}

}  // namespace

std::vector<ChannelManifest> open_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("missing file: " + manifest_path.string());
  const auto base = manifest_path.parent_path();

  std::map<int, PendingChannel> channels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string kind;
    if (!(row >> kind)) continue;

    int channel = 0;
    if (!(row >> channel)) manifest_error(manifest_path, line_no, "expected channel_id");
    auto& pending = channels[channel];

    if (kind == "calibration") {
      CalibrationSpec cal;
      if (!(row >> cal.counts_full_scale >> cal.sensitivity_db)) {
        manifest_error(manifest_path, line_no,
                       "expected counts_full_scale and sensitivity_db");
      }
      std::string policy;
      if (row >> policy) {
        try {
          pending.policy = parse_gap_policy(policy);
        } catch (const Error& e) {
          manifest_error(manifest_path, line_no, e.what());
        }
      }
      if (pending.calibration) {
        manifest_error(manifest_path, line_no, "duplicate calibration row");
      }
      pending.calibration = cal;
    } else if (kind == "file") {
      std::string path;
      double start = 0.0;
      if (!(row >> std::quoted(path) >> start)) {
        manifest_error(manifest_path, line_no, "expected path and start_time_s");
      }
      std::filesystem::path p(path);
      if (p.is_relative()) p = base / p;
      pending.files.push_back({p, start});
    } else {
      manifest_error(manifest_path, line_no, "unknown row type '" + kind + "'");
    }
    std::string extra;
    if (row >> extra) manifest_error(manifest_path, line_no, "trailing field '" + extra + "'");
  }

  std::vector<ChannelManifest> out;
  for (auto& [id, pending] : channels) {
    if (!pending.calibration) {
      throw Error("unparseable manifest " + manifest_path.string() +
                  ": no calibration row for channel " + std::to_string(id));
    }
    out.push_back(make_channel_manifest(id, std::move(pending.files),
                                        *pending.calibration, pending.policy));
  }
  if (out.empty()) throw Error("unparseable manifest " + manifest_path.string() + ": empty");
  return out;
}

void write_manifest(const std::filesystem::path& manifest_path,
                    std::span<const ChannelManifest> channels) {
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw Error("cannot write " + manifest_path.string());
  out << "# seisfeat manifest\n"
      << "# calibration <channel_id> <counts_full_scale> <sensitivity_db> <gap_policy>\n"
      << "# file <channel_id> <path> <start_time_s>\n";
  const auto base = manifest_path.parent_path();
  for (const auto& ch : channels) {
    out << "calibration " << ch.channel_id << ' ' << ch.calibration.counts_full_scale << ' '
        << format_fixed(ch.calibration.sensitivity_db, kDbDecimals) << ' '
        << to_string(ch.gap_policy) << '\n';
    for (const auto& f : ch.files) {
      auto rel = f.path.lexically_relative(base);
      if (rel.empty() || *rel.begin() == "..") rel = f.path;
      out << "file " << ch.channel_id << ' ' << std::quoted(rel.generic_string()) << ' '
          << format_fixed(f.start_time_s, kTimeDecimals) << '\n';
    }
  }
  if (!out) throw Error("write failed: " + manifest_path.string());
}

SampleBuffer read_samples(const ChannelManifest& manifest, std::int64_t first_index,
                          std::int64_t count) {
  if (count < 0 || first_index < 0 || first_index + count > manifest.total_samples()) {
    throw Error("span outside coverage of channel " + std::to_string(manifest.channel_id));
  }
  SampleBuffer out;
  out.sample_rate_hz = manifest.sample_rate_hz;
  out.origin_s = manifest.origin_s;
  out.start_index = first_index;
  out.channel_id = manifest.channel_id;
  out.samples.assign(static_cast<std::size_t>(count), 0.0);

  const std::int64_t last = first_index + count;
  const double full_scale = manifest.calibration.full_scale_upa();
  const auto cfs = static_cast<double>(manifest.calibration.counts_full_scale);
  std::int64_t covered = first_index;
  for (const auto& f : manifest.files) {
    const std::int64_t b = std::max(first_index, f.first_index);
    const std::int64_t e = std::min(last, f.end_index());
    if (b >= e) continue;
    if (b > covered && manifest.gap_policy == GapPolicy::error) {
      throw Error("gap encountered in channel " + std::to_string(manifest.channel_id));
    }
    const auto counts = read_wav_counts(f.path, f.info, b - f.first_index, e - b);
    double* dst = out.samples.data() + (b - first_index);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      dst[i] = static_cast<double>(counts[i]) * full_scale / cfs;
    }
    covered = std::max(covered, e);
  }
  return out;
}

SampleBuffer read_chunk(const ChannelManifest& manifest, double start_s, double duration_s) {
  if (!(duration_s >= 0.0)) throw Error("negative chunk duration");
  const std::int64_t first = std::llround((start_s - manifest.origin_s) * manifest.sample_rate_hz);
  const std::int64_t count = std::llround(duration_s * manifest.sample_rate_hz);
  return read_samples(manifest, first, count);
}

ChunkReader::ChunkReader(const ChannelManifest& manifest, double chunk_s)
    : manifest_(&manifest),
      chunk_samples_(std::max<std::int64_t>(1, std::llround(chunk_s * manifest.sample_rate_hz))) {}

SampleBuffer ChunkReader::next() {
  const std::int64_t n = std::min(chunk_samples_, manifest_->total_samples() - next_);
  SampleBuffer out = read_samples(*manifest_, next_, n);
  next_ += n;
  return out;
}

// StreamBuffer ---------------------------------------------------------------

std::span<const double> SampleView::slice(std::int64_t begin, std::int64_t end) const {
  if (!contains(begin, end)) {
    throw Error("sample range [" + std::to_string(begin) + ", " + std::to_string(end) +
                ") not available");
  }
  return samples_.subspan(static_cast<std::size_t>(begin - first_index_),
                          static_cast<std::size_t>(end - begin));
}

void StreamBuffer::append(std::span<const double> samples) {
  data_.insert(data_.end(), samples.begin(), samples.end());
}

void StreamBuffer::discard_before(std::int64_t index) {
  const std::int64_t drop = std::clamp<std::int64_t>(index - base_, 0,
                                                     static_cast<std::int64_t>(data_.size()));
  head_ = std::max(head_, static_cast<std::size_t>(drop));
  // Compact once the dead prefix dominates so appends stay amortized O(1).
  if (head_ > 0 && head_ >= data_.size() / 2) {
    data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(head_));
    base_ += static_cast<std::int64_t>(head_);
    head_ = 0;
  }
}

SampleView StreamBuffer::view() const {
  return SampleView(std::span<const double>(data_).subspan(head_), begin_index());
}

}  // namespace seisfeat
