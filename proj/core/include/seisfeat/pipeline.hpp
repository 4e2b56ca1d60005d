#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seisfeat/measures.hpp"
#include "seisfeat/pulse_detect.hpp"
#include "seisfeat/stream_buffer.hpp"
#include "seisfeat/weighting.hpp"
#include "seisfeat/windows.hpp"

namespace seisfeat {

inline constexpr int kEarlyFeatureCount = 11;
inline constexpr int kLateFeatureCount = 50;
inline constexpr int kFeatureCount = kEarlyFeatureCount + kLateFeatureCount;

struct WindowLevels {
  double spl_peak_db = 0.0;
  double sel_db = 0.0;
  double leq_db = 0.0;
  double csel_db = 0.0;
};

/// One pulse under one weighting. Early-time end equals late_start_s[0].
struct FeatureRecord {
  int channel_id = 0;
  WeightingKind weighting = WeightingKind::Linear;
  std::int64_t pulse_index = 0;

  double early_t5_s = 0.0;
  std::array<double, kLateWindowCount> late_start_s{};
  double t_a_s = 0.0;
  double p_a_upa = 0.0;
  double p_a_db = 0.0;
  double t_b_s = 0.0;
  double p_b_upa = 0.0;
  double p_b_db = 0.0;
  WindowLevels early;
  std::array<std::optional<WindowLevels>, kLateWindowCount> late;

  /// Detector IPI; not a catalog column (recoverable from consecutive t_A).
  std::optional<double> ipi_s;

  double early_t95_s() const { return late_start_s[0]; }
  int absent_count() const;
};

/// CSEL accumulators for one (channel, weighting): slot 0 is the early
/// window, slots 1..10 the late windows.
struct CselBank {
  CselAccumulator early;
  std::array<CselAccumulator, kLateWindowCount> late;
};

/// Measures one pulse on a weighted stream. Peaks come from the pulse's
/// search window, group-10 levels from [t_5th, t_95th], and group-11 levels
/// from each valid late window. Accumulators in `csel` must be fed in pulse
/// order.
FeatureRecord extract_record(int channel_id, WeightingKind weighting,
                             std::int64_t pulse_index, const PulseEvent& pulse,
                             const WindowLayout& layout,
                             const SampleView& stream, double sample_rate_hz,
                             double origin_s, CselBank& csel);

/// Streaming record builder for one (channel, weighting). Receives the
/// weighted samples and the detector's events (found on the unweighted
/// stream), and emits records in pulse order once their layout is final.
class PulseFeatureExtractor {
 public:
  PulseFeatureExtractor(int channel_id, WeightingKind weighting,
                        double sample_rate_hz, double origin_s,
                        std::int64_t first_index = 0);

  void feed(std::span<const double> weighted);
  void add_event(const PulseEvent& event);
  /// `future_events_from`: lower bound on any later event's window start
  /// (PulseDetector::retain_from).
  void process(std::int64_t future_events_from);
  void finish();

  std::vector<FeatureRecord> take_records();
  std::int64_t needed_from() const;
  std::int64_t end_index() const { return buffer_.end_index(); }
  void discard_before(std::int64_t index) { buffer_.discard_before(index); }

 private:
  struct Pending {
    PulseEvent event;
    std::optional<EnergyBounds> bounds;
  };

  bool try_finalize_front(std::int64_t future_events_from);
  void compute_bounds();

  int channel_id_;
  WeightingKind weighting_;
  double sample_rate_hz_;
  double origin_s_;
  std::int64_t late_samples_;
  StreamBuffer buffer_;
  std::deque<Pending> pending_;
  std::int64_t next_pulse_index_ = 0;
  bool finished_ = false;
  CselBank csel_;
  std::vector<FeatureRecord> ready_;
};

/// A*(B+C)*D*E, the feature-count accounting formula.
std::int64_t ledger_total(std::int64_t weightings, std::int64_t early_features,
                          std::int64_t late_features, std::int64_t units,
                          std::int64_t pulses);

/// Feature accounting for a run. `pulses` is the number of detected pulses
/// summed over all units; `catalog_points` is the number of feature cells
/// actually written.
struct RunLedger {
  std::int64_t weightings = 3;
  std::int64_t early_features = kEarlyFeatureCount;
  std::int64_t late_features = kLateFeatureCount;
  std::int64_t units = 0;
  std::int64_t pulses = 0;
  std::int64_t catalog_points = 0;

  /// A*(B+C)*E over the pulse total; what the catalog must contain.
  std::int64_t total_points() const;
  /// The printed formula with D and E as given (E taken per unit when the
  /// per-unit counts are equal).
  std::optional<std::int64_t> formula_points_per_unit(
      std::span<const std::int64_t> pulses_per_unit) const;
};

// Catalog I/O ---------------------------------------------------------------

/// Column names in order: 4 identifiers then the 61 features.
const std::vector<std::string>& catalog_columns();
inline constexpr int kIdentifierColumnCount = 4;

struct CatalogSummary {
  std::int64_t records = 0;
  std::int64_t points = 0;  // non-identifier cells written, NA included
};

/// Sorts by (channel, pulse index, weighting) before writing.
CatalogSummary write_catalog(std::vector<FeatureRecord> records,
                             const std::filesystem::path& path,
                             const std::string& run_id);
CatalogSummary write_catalog(std::vector<FeatureRecord> records,
                             std::ostream& out, const std::string& run_id);

struct CatalogContents {
  std::vector<std::string> run_ids;
  std::vector<FeatureRecord> records;
};
CatalogContents read_catalog(const std::filesystem::path& path);

void sort_records(std::vector<FeatureRecord>& records);

}  // namespace seisfeat
