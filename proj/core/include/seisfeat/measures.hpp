#pragma once

#include <span>

#include "seisfeat/signal_io.hpp"

namespace seisfeat {

/// Reference pressure in water.
inline constexpr double kReferencePressureUpa = 1.0;

/// Peak level over the window: 20 log10(max|p| / 1 μPa). "zero signal" error
/// for an all-zero window.
double spl_peak_db(std::span<const double> window);
double spl_peak_db(const SampleBuffer& window);

/// Rectangle-rule exposure sum(p^2) / fs, in μPa²·s.
double exposure_upa2s(std::span<const double> window, double sample_rate_hz);

/// 10 log10 of the exposure re 1 μPa²·s. "zero energy" error when empty or
/// silent.
double sel_db(std::span<const double> window, double sample_rate_hz);
double sel_db(const SampleBuffer& window);

/// 10 log10 of the mean-square pressure re 1 μPa². For a window of exactly
/// fs samples this is bit-identical to sel_db.
double leq_db(std::span<const double> window, double sample_rate_hz);
double leq_db(const SampleBuffer& window);

double exposure_to_db(double exposure_upa2s);

/// Running cumulative exposure for one (channel, weighting, window slot)
/// series.
class CselAccumulator {
 public:
  double linear_sum() const { return linear_sum_; }
  bool empty() const { return linear_sum_ <= 0.0; }

  /// Adds one window's exposure; zero-energy windows leave the sum unchanged.
  /// Returns the cumulative level in dB re 1 μPa²·s.
  double update(double exposure_upa2s);
  double update(std::span<const double> window, double sample_rate_hz);
  double level_db() const;

 private:
  double linear_sum_ = 0.0;
};

struct LevelSet {
  double spl_db = 0.0;
  double sel_db = 0.0;
  double leq_db = 0.0;
  double csel_db = 0.0;
};

/// SPL/SEL/LEQ for the window and a CSEL update of `acc`.
LevelSet measure_levels(std::span<const double> window, double sample_rate_hz,
                        CselAccumulator& acc);

}  // namespace seisfeat
