#include "seisfeat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "seisfeat/error.hpp"
#include "seisfeat/measures.hpp"
#include "seisfeat/numeric_text.hpp"

namespace seisfeat {
namespace {

// Envelope tails are truncated once they fall below this fraction of peak.
constexpr double kEnvelopeFloor = 1e-12;
constexpr double kTrailingWindowS = 11.0;

double tail_length(double tau, double level) {
  return level > kEnvelopeFloor ? tau * std::log(level / kEnvelopeFloor) : 0.0;
}

double channel_peak(const SurveySpec& spec, int channel_id) {
  return spec.pulse.peak_upa *
         std::pow(10.0, (channel_id - 1) * spec.channel_level_step_db / 20.0);
}

double reverb_amplitude(const PulseModel& m, double peak) {
  return peak * std::pow(10.0, m.reverb_level_db / 20.0);
}

std::uint64_t channel_seed(std::uint64_t seed, int channel_id) {
  return seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(channel_id));
}

std::string wav_name(int channel, int part) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ch%02d_%03d.wav", channel, part);
  return buf;
}

}  // namespace

void PulseModel::validate() const {
  if (!(peak_upa > 0.0 && attack_s > 0.0 && decay_s > 0.0 && carrier_hz >= 0.0 &&
        reverb_decay_s > 0.0 && reverb_hz >= 0.0 && std::isfinite(reverb_level_db))) {
    throw Error("pulse model parameters must be positive");
  }
}

void SurveySpec::validate() const {
  pulse.validate();
  if (channel_count < 1) throw Error("channel_count must be positive");
  if (!(duration_s > 0.0 && sample_rate_hz > 0.0 && ipi_s > 0.0 && first_pulse_s >= 0.0)) {
    throw Error("survey durations and rates must be positive");
  }
  if (sample_rate_hz > kMaxWavSampleRateHz || sample_rate_hz != std::floor(sample_rate_hz)) {
    throw Error("sample rate must be an integer up to 512 kHz");
  }
  if (!(noise_rms_upa >= 0.0)) throw Error("noise_rms_upa must be non-negative");
  if (files_per_channel < 1) throw Error("files_per_channel must be positive");
  if (channel_delay_s < 0.0 ||
      (channel_count - 1) * channel_delay_s >= std::min(ipi_s, kTrailingWindowS)) {
    throw Error("channel delays must stay within one pulse interval");
  }
  if (calibration) calibration->validate();
}

double SurveySpec::duration_for_pulses(int pulses, double ipi_s, double first_pulse_s) {
  return first_pulse_s + (pulses - 1) * ipi_s + std::min(ipi_s, kTrailingWindowS);
}

double analytic_pulse_exposure(const PulseModel& m, double peak) {
  // Integral of peak^2 e^{-2|t|/tau} cos^2(w t) over each side of the peak.
  const double w = 2.0 * std::numbers::pi * m.carrier_hz;
  auto side = [w](double tau) {
    return tau / 4.0 * (1.0 + 1.0 / (1.0 + (w * tau) * (w * tau)));
  };
  return peak * peak * (side(m.decay_s) + side(m.attack_s));
}

double direct_pulse_value(const PulseModel& m, double peak, double t) {
  const double tau = t >= 0.0 ? m.decay_s : m.attack_s;
  return peak * std::exp(-std::abs(t) / tau) *
         std::cos(2.0 * std::numbers::pi * m.carrier_hz * t);
}

std::vector<GroundTruthPulse> schedule_pulses(const SurveySpec& spec) {
  spec.validate();
  std::vector<GroundTruthPulse> out;
  for (int c = 1; c <= spec.channel_count; ++c) {
    const double peak = channel_peak(spec, c);
    const double sel = exposure_to_db(analytic_pulse_exposure(spec.pulse, peak));
    for (int k = 0;; ++k) {
      const double nominal = spec.first_pulse_s + k * spec.ipi_s;
      if (nominal + std::min(spec.ipi_s, kTrailingWindowS) > spec.duration_s + 1e-9) break;
      GroundTruthPulse g;
      g.channel_id = c;
      g.pulse_index = k;
      g.sample_index = std::llround((nominal + (c - 1) * spec.channel_delay_s) * spec.sample_rate_hz);
      g.t_true_s = static_cast<double>(g.sample_index) / spec.sample_rate_hz;
      g.p_peak_upa = peak;
      g.sel_analytic_db = sel;
      out.push_back(g);
    }
  }
  return out;
}

CalibrationSpec choose_calibration(const SurveySpec& spec) {
  if (spec.calibration) return *spec.calibration;
  double loudest = 0.0;
  for (int c = 1; c <= spec.channel_count; ++c) loudest = std::max(loudest, channel_peak(spec, c));
  const double headroom =
      loudest * (1.0 + std::pow(10.0, spec.pulse.reverb_level_db / 20.0)) + 6.0 * spec.noise_rms_upa;
  CalibrationSpec cal;
  cal.counts_full_scale = 32768;
  cal.sensitivity_db = std::ceil(20.0 * std::log10(headroom * 1.1));
  return cal;
}

std::vector<double> render_channel(const SurveySpec& spec, int channel_id) {
  spec.validate();
  const double fs = spec.sample_rate_hz;
  const auto n = static_cast<std::int64_t>(std::llround(spec.duration_s * fs));
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const PulseModel& m = spec.pulse;
  const double reverb_w = 2.0 * std::numbers::pi * m.reverb_hz;

  for (const auto& g : schedule_pulses(spec)) {
    if (g.channel_id != channel_id) continue;
    const double rev = reverb_amplitude(m, g.p_peak_upa);
    const auto before = static_cast<std::int64_t>(std::ceil(tail_length(m.attack_s, 1.0) * fs));
    const auto after = static_cast<std::int64_t>(std::ceil(
        std::max(tail_length(m.decay_s, 1.0), tail_length(m.reverb_decay_s, rev / g.p_peak_upa)) *
        fs));
    const std::int64_t b = std::max<std::int64_t>(0, g.sample_index - before);
    const std::int64_t e = std::min(n, g.sample_index + after + 1);
    for (std::int64_t i = b; i < e; ++i) {
      const double t = static_cast<double>(i - g.sample_index) / fs;
      double v = direct_pulse_value(m, g.p_peak_upa, t);
      if (t > 0.0) v += rev * std::exp(-t / m.reverb_decay_s) * std::sin(reverb_w * t);
      out[static_cast<std::size_t>(i)] += v;
    }
  }

  if (spec.noise_rms_upa > 0.0) {
    std::mt19937_64 rng(channel_seed(spec.seed, channel_id));
    std::normal_distribution<double> noise(0.0, spec.noise_rms_upa);
    for (double& v : out) v += noise(rng);
  }
  return out;
}

SynthOutput generate(const SurveySpec& spec, const std::filesystem::path& output_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec || !std::filesystem::is_directory(output_dir)) {
    throw Error("unwritable output dir: " + output_dir.string());
  }

  SynthOutput result;
  result.calibration = choose_calibration(spec);
  result.pulses = schedule_pulses(spec);
  const double full_scale = result.calibration.full_scale_upa();
  const auto cfs = static_cast<double>(result.calibration.counts_full_scale);
  const auto fs = static_cast<std::uint32_t>(spec.sample_rate_hz);

  std::vector<ChannelManifest> manifests;
  for (int c = 1; c <= spec.channel_count; ++c) {
    const auto pressure = render_channel(spec, c);
    std::vector<std::int16_t> counts(pressure.size());
    for (std::size_t i = 0; i < pressure.size(); ++i) {
      const double q = std::nearbyint(pressure[i] / full_scale * cfs);
      counts[i] = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    }
    std::vector<FileEntry> entries;
    const std::size_t total = counts.size();
    for (int part = 0; part < spec.files_per_channel; ++part) {
      const std::size_t b = total * static_cast<std::size_t>(part) / spec.files_per_channel;
      const std::size_t e = total * static_cast<std::size_t>(part + 1) / spec.files_per_channel;
      const auto path = output_dir / wav_name(c, part);
      write_wav_pcm16(path, std::span<const std::int16_t>(counts).subspan(b, e - b), fs);
      result.wav_paths.push_back(path);
      entries.push_back({path, static_cast<double>(b) / spec.sample_rate_hz});
    }
    manifests.push_back(
        make_channel_manifest(c, std::move(entries), result.calibration, GapPolicy::error));
  }

  result.manifest_path = output_dir / "manifest.txt";
  write_manifest(result.manifest_path, manifests);
  result.ground_truth_path = output_dir / "ground_truth.csv";
  write_ground_truth(result.ground_truth_path, result.pulses);
  return result;
}

void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruthPulse>& pulses) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "channel_id,pulse_index,t_true_s,p_peak_pa,sel_analytic_db\n";
  for (const auto& g : pulses) {
    out << g.channel_id << ',' << g.pulse_index << ',' << format_fixed(g.t_true_s, kTimeDecimals)
        << ',' << format_fixed(g.p_peak_upa, kPressureDecimals) << ','
        << format_fixed(g.sel_analytic_db, kDbDecimals) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<GroundTruthPulse> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "channel_id,pulse_index,t_true_s,p_peak_pa,sel_analytic_db") {
    throw Error("unexpected ground-truth header in " + path.string());
  }
  std::vector<GroundTruthPulse> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw Error("bad ground-truth row: " + line);
    GroundTruthPulse g;
    g.channel_id = static_cast<int>(parse_integer(f[0]));
    g.pulse_index = static_cast<int>(parse_integer(f[1]));
    g.t_true_s = parse_double(f[2]);
    g.p_peak_upa = parse_double(f[3]);
    g.sel_analytic_db = parse_double(f[4]);
    out.push_back(g);
  }
  return out;
}

}  // namespace seisfeat
