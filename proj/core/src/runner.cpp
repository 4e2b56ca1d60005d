#include "seisfeat/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "seisfeat/error.hpp"
#include "seisfeat/numeric_text.hpp"

namespace seisfeat {
namespace {

using Clock = std::chrono::steady_clock;

class Cancelled : public Error {
 public:
  Cancelled() : Error("cancelled") {}
};

std::vector<FeatureRecord> process_channel_impl(const ChannelManifest& manifest,
                                                WeightingKind weighting,
                                                const DetectorConfig& detector_config,
                                                double chunk_s,
                                                const std::atomic<bool>* cancel) {
  const double fs = manifest.sample_rate_hz;
  FilterState filter = design_filter(WeightingSpec::standard(weighting), fs);
  PulseDetector detector(detector_config, fs, manifest.origin_s);
  PulseFeatureExtractor extractor(manifest.channel_id, weighting, fs, manifest.origin_s);

  std::vector<double> detected_t_a;
  std::vector<FeatureRecord> records;
  auto hand_over = [&] {
    for (const auto& ev : detector.take_events()) {
      detected_t_a.push_back(ev.peaks.t_a_s);
      extractor.add_event(ev);
    }
  };

  ChunkReader reader(manifest, chunk_s);
  while (!reader.done()) {
    if (cancel && cancel->load(std::memory_order_relaxed)) throw Cancelled();
    SampleBuffer chunk = reader.next();
    detector.feed(chunk.view());
    filter.process(chunk.samples);
    extractor.feed(chunk.view());
    hand_over();
    extractor.process(detector.retain_from());
    auto ready = extractor.take_records();
    records.insert(records.end(), ready.begin(), ready.end());
    extractor.discard_before(std::min(extractor.needed_from(), detector.retain_from()));
  }
  detector.finish();
  hand_over();
  extractor.finish();
  auto ready = extractor.take_records();
  records.insert(records.end(), ready.begin(), ready.end());

  if (records.size() != detected_t_a.size()) {
    throw Error("internal error: record count differs from detected pulse count");
  }
  for (std::size_t k = 0; k + 1 < records.size(); ++k) {
    records[k].ipi_s = detected_t_a[k + 1] - detected_t_a[k];
  }
  return records;
}

struct Task {
  const ChannelManifest* manifest = nullptr;
  WeightingKind weighting = WeightingKind::Linear;
  std::vector<FeatureRecord> records;
  Clock::time_point started;
  Clock::time_point finished;
  std::string error;
  bool done = false;
};

}  // namespace

const char* to_string(RunMode mode) { return mode == RunMode::serial ? "serial" : "parallel"; }

RunMode parse_run_mode(const std::string& text) {
  if (text == "serial") return RunMode::serial;
  if (text == "parallel") return RunMode::parallel;
  throw Error("unknown mode '" + text + "'");
}

void RunConfig::validate() const {
  if (worker_count < 1) throw Error("worker_count must be positive");
  if (mode == RunMode::serial && worker_count != 1) {
    throw Error("serial mode requires worker_count = 1");
  }
  if (weightings.empty()) throw Error("no weightings selected");
  if (output_path.empty()) throw Error("no output path");
  if (!(chunk_s > 0.0)) throw Error("chunk_s must be positive");
  detector.validate();
}

std::vector<FeatureRecord> process_channel(const ChannelManifest& manifest,
                                           WeightingKind weighting,
                                           const DetectorConfig& detector, double chunk_s) {
  return process_channel_impl(manifest, weighting, detector, chunk_s, nullptr);
}

RunResult run(const RunConfig& config, std::span<const ChannelManifest> manifests) {
  config.validate();
  const auto run_started = Clock::now();

  std::vector<const ChannelManifest*> selected;
  if (config.channels.empty()) {
    for (const auto& m : manifests) selected.push_back(&m);
  } else {
    for (int id : config.channels) {
      auto it = std::find_if(manifests.begin(), manifests.end(),
                             [id](const auto& m) { return m.channel_id == id; });
      if (it == manifests.end()) throw Error("channel " + std::to_string(id) + " not in manifest");
      if (std::find(selected.begin(), selected.end(), &*it) == selected.end()) {
        selected.push_back(&*it);
      }
    }
  }
  if (selected.empty()) throw Error("channel subset is empty");
  std::sort(selected.begin(), selected.end(),
            [](auto* a, auto* b) { return a->channel_id < b->channel_id; });

  std::vector<WeightingKind> weightings = config.weightings;
  std::sort(weightings.begin(), weightings.end());
  weightings.erase(std::unique(weightings.begin(), weightings.end()), weightings.end());

  std::vector<Task> tasks;
  for (const auto* m : selected) {
    for (auto w : weightings) tasks.push_back(Task{m, w, {}, {}, {}, {}, false});
  }
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.dispatch_seed) {
    std::mt19937_64 rng(*config.dispatch_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancel{false};
  auto worker = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= order.size()) return;
      Task& t = tasks[order[slot]];
      if (cancel.load()) return;
      t.started = Clock::now();
      try {
        t.records = process_channel_impl(*t.manifest, t.weighting, config.detector,
                                         config.chunk_s, &cancel);
        t.done = true;
      } catch (const Cancelled&) {
      } catch (const std::exception& e) {
        t.error = e.what();
        cancel.store(true);
      }
      t.finished = Clock::now();
    }
  };

  const int workers = config.mode == RunMode::serial
                          ? 1
                          : std::min<int>(config.worker_count, static_cast<int>(tasks.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  if (cancel.load()) {
    std::ostringstream msg;
    msg << "run failed:";
    for (const auto& t : tasks) {
      if (!t.error.empty()) {
        msg << "\n  channel " << t.manifest->channel_id << " (" << to_string(t.weighting)
            << "): " << t.error;
      }
    }
    std::error_code ec;
    std::filesystem::remove(config.output_path, ec);
    throw Error(msg.str());
  }

  RunResult result;
  result.catalog_path = config.output_path;
  std::vector<FeatureRecord> all;
  std::map<int, ChannelTiming> timing;
  std::map<int, std::pair<Clock::time_point, Clock::time_point>> spans;
  for (const auto& t : tasks) {
    const int id = t.manifest->channel_id;
    auto [it, inserted] = spans.try_emplace(id, t.started, t.finished);
    if (!inserted) {
      it->second.first = std::min(it->second.first, t.started);
      it->second.second = std::max(it->second.second, t.finished);
    }
    auto& ct = timing[id];
    ct.channel_id = id;
    ct.audio_seconds = t.manifest->duration_s();
    // Detection is shared by all weightings, so any one task gives the count.
    ct.pulses = static_cast<std::int64_t>(t.records.size());
    all.insert(all.end(), t.records.begin(), t.records.end());
  }

  const auto tmp = std::filesystem::path(config.output_path.string() + ".partial");
  CatalogSummary summary;
  try {
    summary = write_catalog(std::move(all), tmp, config.run_id);
    std::filesystem::rename(tmp, config.output_path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }

  RuntimeReport& report = result.report;
  report.mode = config.mode;
  report.worker_count = workers;
  for (auto& [id, ct] : timing) {
    const auto& [b, e] = spans[id];
    ct.wall_seconds = std::chrono::duration<double>(e - b).count();
    report.channels.push_back(ct);
    report.channel_hours += ct.audio_seconds / 3600.0;
    result.pulses_per_channel.push_back(ct.pulses);
  }
  report.records = summary.records;
  report.points = summary.points;
  report.total_wall_seconds = std::chrono::duration<double>(Clock::now() - run_started).count();

  RunLedger& ledger = result.ledger;
  ledger.weightings = static_cast<std::int64_t>(weightings.size());
  ledger.units = static_cast<std::int64_t>(selected.size());
  ledger.pulses = std::accumulate(result.pulses_per_channel.begin(),
                                  result.pulses_per_channel.end(), std::int64_t{0});
  ledger.catalog_points = summary.points;
  return result;
}

double estimate_serial(int total_channels, double measured_channel_seconds) {
  if (total_channels < 1 || !(measured_channel_seconds > 0.0)) {
    throw Error("estimate_serial inputs must be positive");
  }
  return static_cast<double>(total_channels) * measured_channel_seconds;
}

std::string format_runtime_report(const RuntimeReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %14s %12s %10s\n", "channel", "wall_seconds",
                "audio_hours", "pulses");
  out << "# runtime (" << to_string(report.mode) << ", " << report.worker_count
      << (report.worker_count == 1 ? " worker)\n" : " workers)\n")
      << line;
  std::int64_t pulses = 0;
  for (const auto& c : report.channels) {
    std::snprintf(line, sizeof line, "%-10d %14.3f %12.4f %10lld\n", c.channel_id,
                  c.wall_seconds, c.audio_seconds / 3600.0, static_cast<long long>(c.pulses));
    out << line;
    pulses += c.pulses;
  }
  std::snprintf(line, sizeof line, "%-10s %14.3f %12.4f %10lld\n", "all",
                report.total_wall_seconds, report.channel_hours, static_cast<long long>(pulses));
  out << line;
  out << "mode=" << to_string(report.mode) << '\n'
      << "worker_count=" << report.worker_count << '\n'
      << "total_wall_seconds=" << format_fixed(report.total_wall_seconds, 6) << '\n'
      << "channel_hours=" << format_fixed(report.channel_hours, 6) << '\n'
      << "records=" << report.records << '\n'
      << "points=" << report.points << '\n';
  for (const auto& c : report.channels) {
    out << "channel." << c.channel_id << ".wall_seconds=" << format_fixed(c.wall_seconds, 6)
        << '\n';
  }
  return out.str();
}

std::string format_ledger(const RunLedger& ledger,
                          std::span<const std::int64_t> pulses_per_unit) {
  std::ostringstream out;
  char line[160];
  auto row = [&](const char* key, const char* label, long long value) {
    std::snprintf(line, sizeof line, "%-2s %-52s %14lld\n", key, label, value);
    out << line;
  };
  out << "# number of extracted features\n";
  row("A", "Number of weighting filters (signal streams)", ledger.weightings);
  row("B", "Early time features (feature points)", ledger.early_features);
  row("C", "Late time features (feature points)", ledger.late_features);
  row("D", "Number of recording units", ledger.units);
  row("E", "Pulses detected (all units)", ledger.pulses);
  row("", "Catalog feature points (A)(B+C)(E)", ledger.total_points());
  const auto per_unit = ledger.formula_points_per_unit(pulses_per_unit);
  if (per_unit) {
    row("", "Formula (A)(B+C)(D)(E per unit)", *per_unit);
  }
  out << "A=" << ledger.weightings << '\n'
      << "B=" << ledger.early_features << '\n'
      << "C=" << ledger.late_features << '\n'
      << "D=" << ledger.units << '\n'
      << "E=" << ledger.pulses << '\n'
      << "total_points=" << ledger.total_points() << '\n'
      << "catalog_points=" << ledger.catalog_points << '\n';
  if (per_unit) out << "formula_points_per_unit=" << *per_unit << '\n';
  return out.str();
}

}  // namespace seisfeat
