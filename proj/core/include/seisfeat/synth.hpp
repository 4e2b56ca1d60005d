#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "seisfeat/signal_io.hpp"

namespace seisfeat {

/// Direct arrival: a cosine carrier under a two-sided exponential envelope,
/// peaking at t = 0 with a fast rise (attack_s) and slower decay (decay_s).
/// The first negative half-cycle gives the overshoot. A weaker sine tail
/// stands in for reverberation.
struct PulseModel {
  double peak_upa = 1e8;
  double attack_s = 0.004;
  double decay_s = 0.08;
  double carrier_hz = 120.0;
  double reverb_level_db = -30.0;  // tail amplitude re peak_upa
  double reverb_decay_s = 2.0;
  double reverb_hz = 45.0;

  void validate() const;
};

struct SurveySpec {
  int channel_count = 1;
  double duration_s = 60.0;
  double sample_rate_hz = 16000.0;
  double ipi_s = 10.0;
  double first_pulse_s = 1.0;
  /// Extra arrival delay and level change per channel index.
  double channel_delay_s = 0.25;
  double channel_level_step_db = -2.0;
  PulseModel pulse;
  double noise_rms_upa = 0.0;
  std::uint64_t seed = 1;
  int files_per_channel = 1;
  /// Auto-selected from the loudest channel when absent.
  std::optional<CalibrationSpec> calibration;

  void validate() const;
  /// Smallest duration that holds `pulses` pulses plus 11 s of trailing data.
  static double duration_for_pulses(int pulses, double ipi_s = 10.0,
                                    double first_pulse_s = 1.0);
};

struct GroundTruthPulse {
  int channel_id = 0;
  int pulse_index = 0;
  std::int64_t sample_index = 0;
  double t_true_s = 0.0;
  double p_peak_upa = 0.0;
  double sel_analytic_db = 0.0;  // direct arrival only
};

struct SynthOutput {
  std::filesystem::path manifest_path;
  std::filesystem::path ground_truth_path;
  std::vector<std::filesystem::path> wav_paths;
  CalibrationSpec calibration;
  std::vector<GroundTruthPulse> pulses;
};

/// Closed-form integral of the direct arrival's p^2, μPa²·s.
double analytic_pulse_exposure(const PulseModel& model, double peak_upa);

/// Channel ids are 1-based.
std::vector<GroundTruthPulse> schedule_pulses(const SurveySpec& spec);
CalibrationSpec choose_calibration(const SurveySpec& spec);

/// Noise-free-quantization pressure trace of one channel, μPa.
std::vector<double> render_channel(const SurveySpec& spec, int channel_id);
double direct_pulse_value(const PulseModel& model, double peak_upa, double t);

/// Writes chNN_KKK.wav files, manifest.txt and ground_truth.csv.
SynthOutput generate(const SurveySpec& spec,
                     const std::filesystem::path& output_dir);

void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruthPulse>& pulses);
std::vector<GroundTruthPulse> read_ground_truth(
    const std::filesystem::path& path);

}  // namespace seisfeat
