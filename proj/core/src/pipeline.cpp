#include "seisfeat/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "seisfeat/error.hpp"

namespace seisfeat {

int FeatureRecord::absent_count() const {
  int n = 0;
  for (const auto& w : late) n += w ? 0 : 4;
  return n;
}

FeatureRecord extract_record(int channel_id, WeightingKind weighting,
                             std::int64_t pulse_index, const PulseEvent& pulse,
                             const WindowLayout& layout, const SampleView& stream,
                             double sample_rate_hz, double origin_s, CselBank& csel) {
  FeatureRecord r;
  r.channel_id = channel_id;
  r.weighting = weighting;
  r.pulse_index = pulse_index;
  r.ipi_s = pulse.ipi_s;

  const auto peaks = measure_peaks(stream.slice(pulse.window_begin, pulse.window_end),
                                   pulse.window_begin, sample_rate_hz, origin_s);
  r.t_a_s = peaks.t_a_s;
  r.p_a_upa = peaks.p_a_upa;
  r.p_a_db = peaks.p_a_db;
  r.t_b_s = peaks.t_b_s;
  r.p_b_upa = peaks.p_b_upa;
  r.p_b_db = peaks.p_b_db;

  r.early_t5_s = layout.early.t_5th;
  r.late_start_s = layout.late_starts;

  const auto early = stream.slice(layout.early.index_5th, layout.early.index_95th + 1);
  const LevelSet e = measure_levels(early, sample_rate_hz, csel.early);
  r.early = {e.spl_db, e.sel_db, e.leq_db, e.csel_db};

  for (int k = 0; k < kLateWindowCount; ++k) {
    if (!layout.late_valid[k]) continue;
    const auto w = stream.slice(layout.late_begin[k], layout.late_end(k));
    const LevelSet l = measure_levels(w, sample_rate_hz, csel.late[k]);
    r.late[k] = WindowLevels{l.spl_db, l.sel_db, l.leq_db, l.csel_db};
  }
  return r;
}

PulseFeatureExtractor::PulseFeatureExtractor(int channel_id, WeightingKind weighting,
                                             double sample_rate_hz, double origin_s,
                                             std::int64_t first_index)
    : channel_id_(channel_id),
      weighting_(weighting),
      sample_rate_hz_(sample_rate_hz),
      origin_s_(origin_s),
      late_samples_(std::llround(kLateWindowSeconds * sample_rate_hz)),
      buffer_(first_index) {}

void PulseFeatureExtractor::feed(std::span<const double> weighted) {
  if (finished_) throw Error("extractor already finished");
  buffer_.append(weighted);
}

void PulseFeatureExtractor::add_event(const PulseEvent& event) {
  if (!pending_.empty() && event.window_begin < pending_.back().event.window_begin) {
    throw Error("pulse events out of order");
  }
  pending_.push_back({event, std::nullopt});
}

void PulseFeatureExtractor::compute_bounds() {
  const auto view = buffer_.view();
  for (auto& p : pending_) {
    if (p.bounds) continue;
    if (p.event.window_end > buffer_.end_index()) break;
    p.bounds = energy_bounds(view.slice(p.event.window_begin, p.event.window_end),
                             p.event.window_begin, sample_rate_hz_, origin_s_);
  }
}

bool PulseFeatureExtractor::try_finalize_front(std::int64_t future_events_from) {
  if (pending_.empty()) return false;
  Pending& front = pending_.front();
  if (!front.bounds) return false;

  // The boundary that invalidates late windows: the next pulse's first early
  // sample once known. Without a next pulse yet, a lower bound on where it
  // can start is enough if every late window already ends before it.
  std::optional<std::int64_t> next_i5;
  const std::int64_t last_late_end =
      front.bounds->index_95th + kLateWindowCount * late_samples_;
  if (pending_.size() > 1) {
    const Pending& next = pending_[1];
    if (!next.bounds) return false;
    next_i5 = next.bounds->index_5th;
  } else if (!finished_ && last_late_end > future_events_from) {
    return false;
  }

  const std::int64_t data_end = buffer_.end_index();
  WindowLayout layout = layout_windows(*front.bounds, next_i5,
                                       finished_ ? data_end : INT64_MAX, sample_rate_hz_,
                                       origin_s_);
  // Wait for the data of every window that can still be valid.
  for (int k = 0; k < kLateWindowCount; ++k) {
    if (layout.late_valid[k] && layout.late_end(k) > data_end) return false;
  }

  ready_.push_back(extract_record(channel_id_, weighting_, next_pulse_index_++, front.event, layout,
                                  buffer_.view(), sample_rate_hz_, origin_s_, csel_));
  pending_.pop_front();
  return true;
}

void PulseFeatureExtractor::process(std::int64_t future_events_from) {
  compute_bounds();
  while (try_finalize_front(future_events_from)) {
  }
}

void PulseFeatureExtractor::finish() {
  finished_ = true;
  compute_bounds();
  while (try_finalize_front(buffer_.end_index())) {
  }
  if (!pending_.empty()) throw Error("extractor could not finalize pending pulses");
}

std::vector<FeatureRecord> PulseFeatureExtractor::take_records() {
  std::vector<FeatureRecord> out;
  out.swap(ready_);
  return out;
}

std::int64_t PulseFeatureExtractor::needed_from() const {
  if (pending_.empty()) return buffer_.end_index();
  return pending_.front().event.window_begin;
}

// Accounting -----------------------------------------------------------------

std::int64_t ledger_total(std::int64_t weightings, std::int64_t early_features,
                          std::int64_t late_features, std::int64_t units,
                          std::int64_t pulses) {
  return weightings * (early_features + late_features) * units * pulses;
}

std::int64_t RunLedger::total_points() const {
  return weightings * (early_features + late_features) * pulses;
}

std::optional<std::int64_t> RunLedger::formula_points_per_unit(
    std::span<const std::int64_t> pulses_per_unit) const {
  if (pulses_per_unit.empty()) return std::nullopt;
  const std::int64_t e = pulses_per_unit.front();
  for (auto n : pulses_per_unit) {
    if (n != e) return std::nullopt;
  }
  return ledger_total(weightings, early_features, late_features,
                      static_cast<std::int64_t>(pulses_per_unit.size()), e);
}

}  // namespace seisfeat
