#include "seisfeat/weighting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "seisfeat/error.hpp"
#include "seisfeat/numeric_text.hpp"

namespace seisfeat {
namespace {

// The low-pass edge is omitted at or above this fraction of Nyquist.
constexpr double kLowpassNyquistFraction = 0.95;

enum class EdgeType { highpass, lowpass };

// Bilinear transform of 1 / (s^2 + s/Q + 1) with the frequency prewarped so
// that |H| at the cutoff equals Q exactly.
Biquad butterworth_section(EdgeType type, double cutoff_hz, double q, double fs) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / fs;
  const double cosw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  // 1 - cos(w0) loses precision for very low cutoffs.
  const double one_minus_cos = 2.0 * std::pow(std::sin(w0 / 2.0), 2);
  const double a0 = 1.0 + alpha;

  Biquad s;
  if (type == EdgeType::lowpass) {
    s.b0 = one_minus_cos / 2.0 / a0;
    s.b1 = one_minus_cos / a0;
    s.b2 = s.b0;
  } else {
    const double one_plus_cos = 1.0 + cosw;
    s.b0 = one_plus_cos / 2.0 / a0;
    s.b1 = -one_plus_cos / a0;
    s.b2 = s.b0;
  }
  s.a1 = -2.0 * cosw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

void append_edge(std::vector<Biquad>& out, EdgeType type, double cutoff_hz, double fs) {
  for (int k = 1; k <= kButterworthOrder / 2; ++k) {
    const double psi = (2.0 * k - 1.0) * std::numbers::pi / (2.0 * kButterworthOrder);
    out.push_back(butterworth_section(type, cutoff_hz, 1.0 / (2.0 * std::cos(psi)), fs));
  }
}

}  // namespace

const char* to_string(WeightingKind kind) {
  switch (kind) {
    case WeightingKind::Linear:
      return "Linear";
    case WeightingKind::LFC:
      return "LFC";
    case WeightingKind::MFC:
      return "MFC";
  }
  return "?";
}

WeightingKind parse_weighting(const std::string& text) {
  std::string t;
  for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "linear") return WeightingKind::Linear;
  if (t == "lfc") return WeightingKind::LFC;
  if (t == "mfc") return WeightingKind::MFC;
  throw Error("unknown weighting '" + text + "'");
}

WeightingSpec WeightingSpec::standard(WeightingKind kind) {
  switch (kind) {
    case WeightingKind::Linear:
      return {kind, std::nullopt, std::nullopt};
    case WeightingKind::LFC:
      return {kind, 7.0, 22000.0};
    case WeightingKind::MFC:
      return {kind, 150.0, 160000.0};
  }
  throw Error("unknown weighting");
}

void WeightingSpec::validate() const {
  if (f_lo_hz && !(*f_lo_hz > 0.0)) throw Error("f_lo must be positive");
  if (f_hi_hz && !(*f_hi_hz > 0.0)) throw Error("f_hi must be positive");
  if (f_lo_hz && f_hi_hz && !(*f_lo_hz < *f_hi_hz)) throw Error("f_lo must be below f_hi");
}

double Biquad::pole_radius() const {
  // Roots of z^2 + a1 z + a2.
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2));
  const auto r1 = std::abs((-a1 + disc) / 2.0);
  const auto r2 = std::abs((-a1 - disc) / 2.0);
  return std::max(r1, r2);
}

bool FilterState::is_stable() const {
  for (const auto& s : sections_) {
    if (!(s.pole_radius() < 1.0)) return false;
  }
  return true;
}

void FilterState::process(std::span<double> samples) {
  for (std::size_t k = 0; k < sections_.size(); ++k) {
    const Biquad& s = sections_[k];
    double z1 = delay_[k].z1;
    double z2 = delay_[k].z2;
    for (double& x : samples) {
      const double in = x;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      x = y;
    }
    delay_[k] = {z1, z2};
  }
}

void FilterState::reset() {
  for (auto& d : delay_) d = {};
}

std::string FilterState::describe() const {
  std::ostringstream out;
  out << "# weighting=" << to_string(spec_.kind)
      << " sample_rate_hz=" << format_fixed(sample_rate_hz_, 3)
      << " f_lo_hz=" << (spec_.f_lo_hz ? format_fixed(*spec_.f_lo_hz, 3) : "flat")
      << " f_hi_hz=" << (spec_.f_hi_hz ? format_fixed(*spec_.f_hi_hz, 3) : "flat")
      << " lowpass=" << (has_lowpass_ ? "yes" : "omitted") << '\n';
  if (sections_.empty()) {
    out << "# identity\n";
    return out.str();
  }
  out << "# section b0 b1 b2 a1 a2 pole_radius\n";
  out.precision(17);
  for (std::size_t k = 0; k < sections_.size(); ++k) {
    const auto& s = sections_[k];
    out << k << ' ' << s.b0 << ' ' << s.b1 << ' ' << s.b2 << ' ' << s.a1 << ' ' << s.a2
        << ' ' << s.pole_radius() << '\n';
  }
  return out.str();
}

FilterState design_filter(const WeightingSpec& spec, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error("sample rate must be positive");
  spec.validate();
  const double nyquist = sample_rate_hz / 2.0;

  FilterState f;
  f.spec_ = spec;
  f.sample_rate_hz_ = sample_rate_hz;
  if (spec.f_lo_hz) {
    if (*spec.f_lo_hz >= nyquist) {
      throw Error("band above Nyquist: f_lo " + format_fixed(*spec.f_lo_hz, 3) +
                  " Hz >= " + format_fixed(nyquist, 3) + " Hz");
    }
    append_edge(f.sections_, EdgeType::highpass, *spec.f_lo_hz, sample_rate_hz);
  }
  if (spec.f_hi_hz && *spec.f_hi_hz < kLowpassNyquistFraction * nyquist) {
    append_edge(f.sections_, EdgeType::lowpass, *spec.f_hi_hz, sample_rate_hz);
    f.has_lowpass_ = true;
  }
  f.delay_.assign(f.sections_.size(), {});
  if (!f.is_stable()) throw Error("designed filter is unstable");
  return f;
}

SampleBuffer apply_filter(FilterState& state, const SampleBuffer& buffer) {
  if (buffer.sample_rate_hz != state.sample_rate_hz()) {
    throw Error("sample-rate mismatch: filter designed for " +
                format_fixed(state.sample_rate_hz(), 3) + " Hz, buffer is " +
                format_fixed(buffer.sample_rate_hz, 3) + " Hz");
  }
  SampleBuffer out = buffer;
  state.process(out.samples);
  return out;
}

}  // namespace seisfeat
