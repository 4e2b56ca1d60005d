#include "seisfeat/measures.hpp"

#include <algorithm>
#include <cmath>

#include "seisfeat/error.hpp"

namespace seisfeat {
namespace {

double sum_squares(std::span<const double> window) {
  double acc = 0.0;
  for (double p : window) acc += p * p;
  return acc;
}

constexpr double kReferenceExposure = kReferencePressureUpa * kReferencePressureUpa;  // μPa²·s

}  // namespace

double spl_peak_db(std::span<const double> window) {
  double peak = 0.0;
  for (double p : window) peak = std::max(peak, std::abs(p));
  if (peak == 0.0) throw Error("zero signal: SPL undefined");
  return 20.0 * std::log10(peak / kReferencePressureUpa);
}

double spl_peak_db(const SampleBuffer& window) { return spl_peak_db(window.view()); }

double exposure_upa2s(std::span<const double> window, double sample_rate_hz) {
  return sum_squares(window) / sample_rate_hz;
}

double exposure_to_db(double exposure) {
  if (!(exposure > 0.0)) throw Error("zero energy: level undefined");
  return 10.0 * std::log10(exposure / kReferenceExposure);
}

double sel_db(std::span<const double> window, double sample_rate_hz) {
  return exposure_to_db(exposure_upa2s(window, sample_rate_hz));
}

double sel_db(const SampleBuffer& window) {
  return sel_db(window.view(), window.sample_rate_hz);
}

double leq_db(std::span<const double> window, double sample_rate_hz) {
  if (window.empty()) throw Error("zero energy: empty window");
  // T = N / fs, so sum/fs/T = sum/N.
  (void)sample_rate_hz;
  const double mean_square = sum_squares(window) / static_cast<double>(window.size());
  if (!(mean_square > 0.0)) throw Error("zero energy: level undefined");
  return 10.0 * std::log10(mean_square / (kReferencePressureUpa * kReferencePressureUpa));
}

double leq_db(const SampleBuffer& window) {
  return leq_db(window.view(), window.sample_rate_hz);
}

double CselAccumulator::update(double exposure) {
  if (exposure > 0.0) linear_sum_ += exposure;
  return level_db();
}

double CselAccumulator::update(std::span<const double> window, double sample_rate_hz) {
  return update(exposure_upa2s(window, sample_rate_hz));
}

double CselAccumulator::level_db() const { return exposure_to_db(linear_sum_); }

LevelSet measure_levels(std::span<const double> window, double sample_rate_hz,
                        CselAccumulator& acc) {
  LevelSet out;
  out.spl_db = spl_peak_db(window);
  const double exposure = exposure_upa2s(window, sample_rate_hz);
  out.sel_db = exposure_to_db(exposure);
  out.leq_db = leq_db(window, sample_rate_hz);
  out.csel_db = acc.update(exposure);
  return out;
}

}  // namespace seisfeat
