#include "seisfeat/pulse_detect.hpp"

#include <algorithm>
#include <cmath>

#include "seisfeat/error.hpp"
#include "seisfeat/measures.hpp"

namespace seisfeat {

double DetectorConfig::threshold_upa() const {
  return kReferencePressureUpa * std::pow(10.0, threshold_db / 20.0);
}

void DetectorConfig::validate() const {
  if (!std::isfinite(threshold_db)) throw Error("threshold_db must be finite");
  if (!(search_window_s > 0.0)) throw Error("search_window_s must be positive");
  if (!(pre_peak_s >= 0.0 && pre_peak_s < search_window_s)) {
    throw Error("pre_peak_s must lie inside the search window");
  }
  if (!(min_ipi_s > search_window_s)) {
    throw Error("min_ipi_s must exceed search_window_s");
  }
}

double PeakMeasurement::p_pp_db() const {
  return 20.0 * std::log10((p_a_upa - p_b_upa) / kReferencePressureUpa);
}

PeakMeasurement measure_peaks(std::span<const double> window, std::int64_t first_index,
                              double sample_rate_hz, double origin_s) {
  if (window.empty()) throw Error("no peak: empty window");
  std::size_t ia = 0;
  std::size_t ib = 0;
  bool nonzero = false;
  for (std::size_t i = 0; i < window.size(); ++i) {
    // Strict comparisons keep the earliest sample on ties.
    if (window[i] > window[ia]) ia = i;
    if (window[i] < window[ib]) ib = i;
    nonzero = nonzero || window[i] != 0.0;
  }
  if (!nonzero) throw Error("no peak: all-zero window");

  auto time_of = [&](std::size_t i) {
    return origin_s + static_cast<double>(first_index + static_cast<std::int64_t>(i)) /
                          sample_rate_hz;
  };
  auto to_db = [](double p) { return 20.0 * std::log10(std::abs(p) / kReferencePressureUpa); };

  PeakMeasurement m;
  m.index_a = first_index + static_cast<std::int64_t>(ia);
  m.t_a_s = time_of(ia);
  m.p_a_upa = window[ia];
  m.p_a_db = to_db(m.p_a_upa);
  m.index_b = first_index + static_cast<std::int64_t>(ib);
  m.t_b_s = time_of(ib);
  m.p_b_upa = window[ib];
  m.p_b_db = to_db(m.p_b_upa);
  return m;
}

PeakMeasurement measure_peaks(const SampleBuffer& window) {
  return measure_peaks(window.view(), window.start_index, window.sample_rate_hz,
                       window.origin_s);
}

PulseDetector::PulseDetector(const DetectorConfig& config, double sample_rate_hz,
                             double origin_s, std::int64_t first_index)
    : config_(config),
      sample_rate_hz_(sample_rate_hz),
      origin_s_(origin_s),
      threshold_upa_(config.threshold_upa()),
      window_samples_(std::llround(config.search_window_s * sample_rate_hz)),
      pre_samples_(std::llround(config.pre_peak_s * sample_rate_hz)),
      refractory_samples_(std::llround(config.min_ipi_s * sample_rate_hz)),
      buffer_(first_index),
      scan_from_(first_index),
      refractory_until_(first_index) {
  config.validate();
  if (!(sample_rate_hz > 0.0)) throw Error("sample rate must be positive");
}

void PulseDetector::feed(std::span<const double> samples) {
  if (finished_) throw Error("detector already finished");
  buffer_.append(samples);
  scan();
  buffer_.discard_before(retain_from());
}

void PulseDetector::finish() {
  finished_ = true;
  scan();
}

std::vector<PulseEvent> PulseDetector::take_events() {
  std::vector<PulseEvent> out;
  out.swap(ready_);
  return out;
}

std::int64_t PulseDetector::retain_from() const {
  return std::max(scan_from_ - pre_samples_, refractory_until_);
}

void PulseDetector::scan() {
  const std::int64_t end = buffer_.end_index();
  while (true) {
    std::int64_t i = std::max(scan_from_, refractory_until_);
    while (i < end && std::abs(buffer_.at(i)) < threshold_upa_) ++i;
    if (i >= end) {
      scan_from_ = std::max(scan_from_, end);
      return;
    }
    scan_from_ = i;

    // Anchor: the largest |sample| in one search window after the crossing.
    const std::int64_t look_end = i + window_samples_;
    if (look_end > end && !finished_) return;
    std::int64_t anchor = i;
    for (std::int64_t j = i + 1; j < std::min(look_end, end); ++j) {
      if (std::abs(buffer_.at(j)) > std::abs(buffer_.at(anchor))) anchor = j;
    }

    const std::int64_t nominal_begin = anchor - pre_samples_;
    const std::int64_t nominal_end = nominal_begin + window_samples_;
    if (nominal_end > end && !finished_) return;
    const std::int64_t wb = std::max({nominal_begin, refractory_until_, buffer_.begin_index()});
    const std::int64_t we = std::min(nominal_end, end);

    const auto view = buffer_.view();
    PulseEvent ev;
    ev.peaks = measure_peaks(view.slice(wb, we), wb, sample_rate_hz_, origin_s_);
    ev.p_pp_db = ev.peaks.p_pp_db();
    ev.window_begin = wb;
    ev.window_end = we;
    ready_.push_back(ev);

    refractory_until_ = ev.peaks.index_a + refractory_samples_;
    scan_from_ = std::max(i + 1, refractory_until_);
  }
}

void fill_ipi(std::span<PulseEvent> events) {
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (k + 1 < events.size()) {
      events[k].ipi_s = events[k + 1].peaks.t_a_s - events[k].peaks.t_a_s;
    } else {
      events[k].ipi_s.reset();
    }
  }
}

std::vector<PulseEvent> detect_pulses(std::span<const SampleBuffer> stream,
                                      const DetectorConfig& config) {
  if (stream.empty()) return {};
  const SampleBuffer& first = stream.front();
  PulseDetector detector(config, first.sample_rate_hz, first.origin_s, first.start_index);
  std::int64_t expected = first.start_index;
  for (const auto& chunk : stream) {
    if (chunk.start_index != expected || chunk.sample_rate_hz != first.sample_rate_hz) {
      throw Error("detector input chunks are not time-contiguous");
    }
    detector.feed(chunk.view());
    expected = chunk.end_index();
  }
  detector.finish();
  auto events = detector.take_events();
  fill_ipi(events);
  return events;
}

}  // namespace seisfeat
