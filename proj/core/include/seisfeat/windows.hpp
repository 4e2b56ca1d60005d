#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "seisfeat/signal_io.hpp"

namespace seisfeat {

inline constexpr int kLateWindowCount = 10;
inline constexpr double kLateWindowSeconds = 1.0;
inline constexpr double kEarlyLowFraction = 0.05;
inline constexpr double kEarlyHighFraction = 0.95;

/// Early-time interval: first samples at which the cumulative p^2 reaches 5%
/// and 95% of the window total. Both indices are inclusive.
struct EnergyBounds {
  std::int64_t index_5th = 0;
  std::int64_t index_95th = 0;
  double t_5th = 0.0;
  double t_95th = 0.0;

  std::int64_t sample_count() const { return index_95th - index_5th + 1; }
};

/// "zero energy" error for an empty or all-zero window.
EnergyBounds energy_bounds(std::span<const double> window,
                           std::int64_t first_index, double sample_rate_hz,
                           double origin_s);
EnergyBounds energy_bounds(const SampleBuffer& window);

struct WindowLayout {
  EnergyBounds early;
  std::int64_t late_samples = 0;  // samples per late window
  std::array<std::int64_t, kLateWindowCount> late_begin{};
  std::array<double, kLateWindowCount> late_starts{};
  std::array<bool, kLateWindowCount> late_valid{};

  int valid_count() const;
  std::int64_t late_end(int k) const { return late_begin[k] + late_samples; }
};

/// Ten consecutive 1 s windows from t_95th. A window is valid when it ends no
/// later than the next pulse's first early sample and within the data.
/// `next_index_5th` is absent for the last pulse; `data_end` is the
/// exclusive end index of available data.
WindowLayout layout_windows(const EnergyBounds& early,
                            std::optional<std::int64_t> next_index_5th,
                            std::int64_t data_end, double sample_rate_hz,
                            double origin_s);

}  // namespace seisfeat
