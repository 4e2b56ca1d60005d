#include "seisfeat/windows.hpp"

#include <cmath>

#include "seisfeat/error.hpp"

namespace seisfeat {

EnergyBounds energy_bounds(std::span<const double> window, std::int64_t first_index,
                           double sample_rate_hz, double origin_s) {
  double total = 0.0;
  for (double p : window) total += p * p;
  if (!(total > 0.0)) throw Error("zero energy: no early-time bounds");

  const double low = kEarlyLowFraction * total;
  const double high = kEarlyHighFraction * total;
  std::size_t i5 = window.size();
  std::size_t i95 = window.size();
  double cum = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    cum += window[i] * window[i];
    if (i5 == window.size() && cum >= low) i5 = i;
    if (cum >= high) {
      i95 = i;
      break;
    }
  }
  // The running sum ends exactly at `total`, so both thresholds are reached.

  EnergyBounds b;
  b.index_5th = first_index + static_cast<std::int64_t>(i5);
  b.index_95th = first_index + static_cast<std::int64_t>(i95);
  b.t_5th = origin_s + static_cast<double>(b.index_5th) / sample_rate_hz;
  b.t_95th = origin_s + static_cast<double>(b.index_95th) / sample_rate_hz;
  return b;
}

EnergyBounds energy_bounds(const SampleBuffer& window) {
  return energy_bounds(window.view(), window.start_index, window.sample_rate_hz,
                       window.origin_s);
}

int WindowLayout::valid_count() const {
  int n = 0;
  for (bool v : late_valid) n += v ? 1 : 0;
  return n;
}

WindowLayout layout_windows(const EnergyBounds& early,
                            std::optional<std::int64_t> next_index_5th,
                            std::int64_t data_end, double sample_rate_hz,
                            double origin_s) {
  WindowLayout layout;
  layout.early = early;
  layout.late_samples = std::llround(kLateWindowSeconds * sample_rate_hz);
  // Late time begins where early time ends; window 1 shares the t_95th sample.
  for (int k = 0; k < kLateWindowCount; ++k) {
    layout.late_begin[k] = early.index_95th + k * layout.late_samples;
    layout.late_starts[k] =
        origin_s + static_cast<double>(layout.late_begin[k]) / sample_rate_hz;
    const std::int64_t end = layout.late_end(k);
    layout.late_valid[k] = end <= data_end && (!next_index_5th || end <= *next_index_5th);
  }
  return layout;
}

}  // namespace seisfeat
