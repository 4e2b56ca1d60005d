#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seisfeat/signal_io.hpp"
#include "seisfeat/stream_buffer.hpp"

namespace seisfeat {

struct DetectorConfig {
  double threshold_db = 130.0;   // dB re 1 μPa peak
  double min_ipi_s = 5.0;        // refractory period between pulses
  double search_window_s = 1.5;  // direct-pulse window length
  double pre_peak_s = 0.5;       // window start relative to the anchor peak

  double threshold_upa() const;
  void validate() const;
};

/// Positive and negative extrema of a window (earliest sample wins ties).
struct PeakMeasurement {
  std::int64_t index_a = 0;
  double t_a_s = 0.0;
  double p_a_upa = 0.0;
  double p_a_db = 0.0;
  std::int64_t index_b = 0;
  double t_b_s = 0.0;
  double p_b_upa = 0.0;
  double p_b_db = 0.0;  // of |P_B|

  double p_pp_db() const;
};

/// "no peak" error for an all-zero or empty window.
PeakMeasurement measure_peaks(std::span<const double> window,
                              std::int64_t first_index, double sample_rate_hz,
                              double origin_s);
PeakMeasurement measure_peaks(const SampleBuffer& window);

struct PulseEvent {
  PeakMeasurement peaks;
  double p_pp_db = 0.0;
  std::optional<double> ipi_s;  // to the next event's t_A
  std::int64_t window_begin = 0;  // search window [begin, end) on the grid
  std::int64_t window_end = 0;

  double t_a_s() const { return peaks.t_a_s; }
};

/// Streaming threshold detector. Samples arrive in consecutive blocks; an
/// event is emitted only once all samples that can influence it are present,
/// so the output does not depend on how the stream is chunked.
///
/// For each threshold crossing outside the refractory period the anchor is
/// the largest |sample| within one search window after the crossing. The
/// search window spans [anchor - pre_peak_s, anchor - pre_peak_s +
/// search_window_s), clipped to the data and to the refractory boundary, and
/// its extrema give the event. The next refractory period runs until t_A +
/// min_ipi_s.
class PulseDetector {
 public:
  PulseDetector(const DetectorConfig& config, double sample_rate_hz,
                double origin_s = 0.0, std::int64_t first_index = 0);

  void feed(std::span<const double> samples);
  /// Marks end of data; pending crossings are resolved with clipped windows.
  void finish();

  /// Events found so far, in t_A order. ipi_s is left empty here.
  std::vector<PulseEvent> take_events();

  /// No future event can touch samples before this index.
  std::int64_t retain_from() const;
  std::int64_t end_index() const { return buffer_.end_index(); }

 private:
  void scan();

  DetectorConfig config_;
  double sample_rate_hz_;
  double origin_s_;
  double threshold_upa_;
  std::int64_t window_samples_;
  std::int64_t pre_samples_;
  std::int64_t refractory_samples_;

  StreamBuffer buffer_;
  std::int64_t scan_from_;
  std::int64_t refractory_until_;
  bool finished_ = false;
  std::vector<PulseEvent> ready_;
};

/// Fills ipi_s from consecutive t_A values.
void fill_ipi(std::span<PulseEvent> events);

/// Runs the detector over time-contiguous buffers of one channel.
std::vector<PulseEvent> detect_pulses(std::span<const SampleBuffer> stream,
                                      const DetectorConfig& config);

}  // namespace seisfeat
