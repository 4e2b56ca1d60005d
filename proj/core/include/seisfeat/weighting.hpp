#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seisfeat/signal_io.hpp"

namespace seisfeat {

/// Marine-mammal M-weighting bands: flat, low-frequency cetacean and
/// mid-frequency cetacean.
enum class WeightingKind { Linear = 0, LFC = 1, MFC = 2 };

inline constexpr std::array<WeightingKind, 3> kAllWeightings = {
    WeightingKind::Linear, WeightingKind::LFC, WeightingKind::MFC};

const char* to_string(WeightingKind kind);
WeightingKind parse_weighting(const std::string& text);

struct WeightingSpec {
  WeightingKind kind = WeightingKind::Linear;
  std::optional<double> f_lo_hz;  // nullopt = flat
  std::optional<double> f_hi_hz;

  static WeightingSpec standard(WeightingKind kind);
  void validate() const;
};

/// Normalized biquad, a0 == 1:
///   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Largest pole magnitude.
  double pole_radius() const;
};

/// Butterworth order used for each band edge.
inline constexpr int kButterworthOrder = 4;

/// A realized weighting filter with its streaming delay state. Each edge is a
/// 4th-order Butterworth section pair; cutoffs are the -3 dB points. The
/// low-pass edge is dropped when f_hi >= 0.95 * Nyquist.
class FilterState {
 public:
  FilterState() = default;

  const WeightingSpec& spec() const { return spec_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  const std::vector<Biquad>& sections() const { return sections_; }
  bool is_identity() const { return sections_.empty(); }
  bool has_lowpass() const { return has_lowpass_; }
  bool is_stable() const;

  /// Filters in place, carrying state across calls.
  void process(std::span<double> samples);
  void reset();

  /// Coefficient listing, one section per line.
  std::string describe() const;

 private:
  friend FilterState design_filter(const WeightingSpec&, double);

  struct Delay {
    double z1 = 0.0, z2 = 0.0;
  };

  WeightingSpec spec_;
  double sample_rate_hz_ = 0.0;
  bool has_lowpass_ = false;
  std::vector<Biquad> sections_;
  std::vector<Delay> delay_;
};

/// Throws "band above Nyquist" when f_lo >= fs/2.
FilterState design_filter(const WeightingSpec& spec, double sample_rate_hz);

/// Returns a filtered copy with identical indexing; `state` advances.
SampleBuffer apply_filter(FilterState& state, const SampleBuffer& buffer);

}  // namespace seisfeat
