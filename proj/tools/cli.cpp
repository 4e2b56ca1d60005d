#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "seisfeat/error.hpp"
#include "seisfeat/numeric_text.hpp"
#include "seisfeat/pulse_detect.hpp"
#include "seisfeat/runner.hpp"
#include "seisfeat/signal_io.hpp"
#include "seisfeat/synth.hpp"
#include "seisfeat/weighting.hpp"

namespace seisfeat::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct DetectorFlags {
  double threshold_db = DetectorConfig{}.threshold_db;
  double min_ipi_s = DetectorConfig{}.min_ipi_s;
  double search_window_s = DetectorConfig{}.search_window_s;

  void add_to(CLI::App* app) {
    app->add_option("--threshold-db", threshold_db, "Detection threshold, dB re 1 uPa peak");
    app->add_option("--min-ipi-s", min_ipi_s, "Refractory period between pulses, seconds");
    app->add_option("--search-window-s", search_window_s, "Direct-pulse search window, seconds");
  }
  DetectorConfig config() const {
    DetectorConfig c;
    c.threshold_db = threshold_db;
    c.min_ipi_s = min_ipi_s;
    c.search_window_s = search_window_s;
    return c;
  }
};

struct SynthArgs {
  std::string out_dir;
  int channels = 1;
  double duration_s = 60.0;
  int pulses = 0;
  double sample_rate = 16000.0;
  double ipi_s = 10.0;
  double peak_upa = PulseModel{}.peak_upa;
  double noise_rms_upa = 0.0;
  std::uint64_t seed = 1;
  int files_per_channel = 1;
  double channel_delay_s = SurveySpec{}.channel_delay_s;
  double channel_level_step_db = SurveySpec{}.channel_level_step_db;
};

struct DetectArgs {
  std::string manifest;
  std::string out;
  std::vector<int> channels;
  std::string weighting = "linear";
  DetectorFlags detector;
};

struct ExtractArgs {
  std::string manifest;
  std::string out;
  std::string summary;
  std::string mode = "serial";
  int workers = 0;
  std::vector<int> channels;
  std::vector<std::string> weightings{"linear", "lfc", "mfc"};
  std::string run_id;
  double chunk_s = 60.0;
  bool dump_filters = false;
  DetectorFlags detector;
};

struct BenchArgs {
  std::string manifest;
  std::string out_dir;
  int workers = 4;
  std::vector<int> channels;
  std::vector<std::string> weightings{"linear", "lfc", "mfc"};
  std::string run_id;
  double chunk_s = 60.0;
  DetectorFlags detector;
};

std::vector<WeightingKind> parse_weightings(const std::vector<std::string>& names) {
  std::vector<WeightingKind> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_weighting(n));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no weightings selected");
  return out;
}

std::string effective_config(const CLI::App* sub) {
  std::ostringstream out;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else {
      value = opt->get_default_str();
      if (value == "{}") value.clear();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
        value = value.substr(1, value.size() - 2);
      }
      if (value.empty() && opt->get_expected_min() == 0) value = "false";
    }
    out << name << '=' << value << '\n';
  }
  return out.str();
}

std::string default_run_id(const std::string& manifest) {
  auto stem = std::filesystem::path(manifest).stem().string();
  std::replace_if(stem.begin(), stem.end(), [](char c) { return c == ',' || c == '"'; }, '_');
  return stem.empty() ? "run" : stem;
}

std::vector<ChannelManifest> load_manifest(const std::string& path) {
  return open_manifest(path);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SurveySpec spec;
  spec.channel_count = a.channels;
  spec.sample_rate_hz = a.sample_rate;
  spec.ipi_s = a.ipi_s;
  spec.duration_s =
      a.pulses > 0 ? SurveySpec::duration_for_pulses(a.pulses, a.ipi_s, spec.first_pulse_s)
                   : a.duration_s;
  spec.pulse.peak_upa = a.peak_upa;
  spec.noise_rms_upa = a.noise_rms_upa;
  spec.seed = a.seed;
  spec.files_per_channel = a.files_per_channel;
  spec.channel_delay_s = a.channel_delay_s;
  spec.channel_level_step_db = a.channel_level_step_db;
  const auto result = generate(spec, a.out_dir);
  out << "manifest=" << result.manifest_path.string() << '\n'
      << "ground_truth=" << result.ground_truth_path.string() << '\n'
      << "wav_files=" << result.wav_paths.size() << '\n'
      << "pulses=" << result.pulses.size() << '\n'
      << "sensitivity_db=" << format_fixed(result.calibration.sensitivity_db, kDbDecimals) << '\n';
  return kExitOk;
}

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  const auto manifests = load_manifest(a.manifest);
  WeightingKind weighting;
  try {
    weighting = parse_weighting(a.weighting);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const DetectorConfig cfg = a.detector.config();

  std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
  if (!csv) throw Error("unwritable path: " + a.out);
  csv << "channel_id,pulse_index,t_a_s,p_a_upa,p_a_db,t_b_s,p_b_upa,p_b_db,p_pp_db,ipi_s\n";
  std::size_t total = 0;
  for (const auto& m : manifests) {
    if (!a.channels.empty() &&
        std::find(a.channels.begin(), a.channels.end(), m.channel_id) == a.channels.end()) {
      continue;
    }
    FilterState filter = design_filter(WeightingSpec::standard(weighting), m.sample_rate_hz);
    PulseDetector detector(cfg, m.sample_rate_hz, m.origin_s);
    ChunkReader reader(m);
    while (!reader.done()) {
      SampleBuffer chunk = reader.next();
      filter.process(chunk.samples);
      detector.feed(chunk.view());
    }
    detector.finish();
    auto events = detector.take_events();
    fill_ipi(events);
    for (std::size_t k = 0; k < events.size(); ++k) {
      const auto& e = events[k];
      std::string line = std::to_string(m.channel_id) + ',' + std::to_string(k) + ',';
      append_fixed(line, e.peaks.t_a_s, kTimeDecimals);
      line += ',';
      append_fixed(line, e.peaks.p_a_upa, kPressureDecimals);
      line += ',';
      append_fixed(line, e.peaks.p_a_db, kDbDecimals);
      line += ',';
      append_fixed(line, e.peaks.t_b_s, kTimeDecimals);
      line += ',';
      append_fixed(line, e.peaks.p_b_upa, kPressureDecimals);
      line += ',';
      append_fixed(line, e.peaks.p_b_db, kDbDecimals);
      line += ',';
      append_fixed(line, e.p_pp_db, kDbDecimals);
      line += ',';
      if (e.ipi_s) {
        append_fixed(line, *e.ipi_s, kTimeDecimals);
      } else {
        line += kAbsentToken;
      }
      csv << line << '\n';
    }
    out << "channel " << m.channel_id << ": " << events.size() << " pulses\n";
    total += events.size();
  }
  if (!csv) throw Error("write failed: " + a.out);
  out << "pulses=" << total << '\n';
  return kExitOk;
}

RunConfig make_run_config(const std::string& manifest, const std::string& mode, int workers,
                          const std::vector<int>& channels,
                          const std::vector<std::string>& weightings, const std::string& run_id,
                          double chunk_s, const DetectorFlags& detector) {
  RunConfig cfg;
  try {
    cfg.mode = parse_run_mode(mode);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (workers < 0) throw UsageError("--workers must be positive");
  if (cfg.mode == RunMode::serial) {
    if (workers > 1) throw UsageError("--mode serial runs a single worker");
    cfg.worker_count = 1;
  } else {
    cfg.worker_count =
        workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
  }
  cfg.channels = channels;
  cfg.weightings = parse_weightings(weightings);
  cfg.run_id = run_id.empty() ? default_run_id(manifest) : run_id;
  cfg.chunk_s = chunk_s;
  cfg.detector = detector.config();
  return cfg;
}

int cmd_extract(const ExtractArgs& a, const CLI::App* sub, std::ostream& out) {
  RunConfig cfg = make_run_config(a.manifest, a.mode, a.workers, a.channels, a.weightings,
                                  a.run_id, a.chunk_s, a.detector);
  cfg.output_path = a.out;
  const auto manifests = load_manifest(a.manifest);

  if (a.dump_filters) {
    for (auto w : cfg.weightings) {
      out << design_filter(WeightingSpec::standard(w), manifests.front().sample_rate_hz)
                 .describe();
    }
  }

  const auto result = run(cfg, manifests);
  const std::string summary_path = a.summary.empty() ? a.out + ".summary.txt" : a.summary;
  std::ofstream summary(summary_path, std::ios::trunc);
  if (!summary) throw Error("unwritable path: " + summary_path);
  summary << "# seisfeat extract summary\n"
          << "generated_utc=" << utc_now() << '\n'
          << "catalog=" << result.catalog_path.string() << '\n'
          << "detection_stream=linear\n"
          << "csel_scope=run\n"
          << "filter=butterworth4_per_edge\n"
          << "\n# effective configuration\n"
          << effective_config(sub) << "workers_resolved=" << cfg.worker_count << '\n'
          << "run_id_resolved=" << cfg.run_id << '\n'
          << '\n'
          << format_ledger(result.ledger, result.pulses_per_channel) << '\n'
          << format_runtime_report(result.report);
  if (!summary) throw Error("write failed: " + summary_path);

  for (const auto& c : result.report.channels) {
    out << "channel " << c.channel_id << ": " << c.pulses << " pulses, "
        << format_fixed(c.wall_seconds, 3) << " s\n";
  }
  out << "records=" << result.report.records << '\n'
      << "points=" << result.report.points << '\n'
      << "catalog=" << result.catalog_path.string() << '\n'
      << "summary=" << summary_path << '\n';
  return kExitOk;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto manifests = load_manifest(a.manifest);
  std::filesystem::create_directories(a.out_dir);
  if (a.workers < 1) throw UsageError("--workers must be positive");

  RunConfig serial = make_run_config(a.manifest, "serial", 1, a.channels, a.weightings, a.run_id,
                                     a.chunk_s, a.detector);
  serial.output_path = std::filesystem::path(a.out_dir) / "catalog_serial.csv";
  RunConfig parallel = make_run_config(a.manifest, "parallel", a.workers, a.channels,
                                       a.weightings, a.run_id, a.chunk_s, a.detector);
  parallel.output_path = std::filesystem::path(a.out_dir) / "catalog_parallel.csv";

  const auto rs = run(serial, manifests);
  const auto rp = run(parallel, manifests);
  const bool identical = slurp(rs.catalog_path) == slurp(rp.catalog_path);

  const auto& first = rs.report.channels.front();
  const int n = static_cast<int>(rs.report.channels.size());
  const double ratio = rp.report.total_wall_seconds / rs.report.total_wall_seconds;
  char line[200];
  const std::string one = "Runtime (Ch. " + std::to_string(first.channel_id) + ")";
  const std::string all = "Runtime (Ch. " + std::to_string(first.channel_id) + "-" +
                          std::to_string(rs.report.channels.back().channel_id) + ")";
  out << "# runtime performance, seconds\n";
  std::snprintf(line, sizeof line, "%-22s %18s %22s\n", "", one.c_str(), all.c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-22s %18.3f %22.3f\n", "Serial Method",
                first.wall_seconds, rs.report.total_wall_seconds);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %18.3f %22.3f\n",
                ("Parallel Method (" + std::to_string(parallel.worker_count) + ")").c_str(),
                rp.report.channels.front().wall_seconds, rp.report.total_wall_seconds);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %18s %22.3f\n", "Serial (estimated)", "",
                estimate_serial(n, first.wall_seconds));
  out << line;
  out << "serial_seconds=" << format_fixed(rs.report.total_wall_seconds, 6) << '\n'
      << "parallel_seconds=" << format_fixed(rp.report.total_wall_seconds, 6) << '\n'
      << "parallel_workers=" << parallel.worker_count << '\n'
      << "hardware_threads=" << std::thread::hardware_concurrency() << '\n'
      << "parallel_to_serial_ratio=" << format_fixed(ratio, 4) << '\n'
      << "speedup=" << format_fixed(1.0 / ratio, 4) << '\n'
      << "records=" << rs.report.records << '\n'
      << "points=" << rs.report.points << '\n'
      << "catalogs_identical=" << (identical ? "yes" : "no") << '\n'
      << "identical catalogs: " << (identical ? "\u2713" : "\u2717") << '\n';
  return identical ? kExitOk : kExitRuntime;
}

// Finds the subcommand token and the --config path without a full parse.
void prescan(const std::vector<std::string>& args, std::string& subcommand,
             std::string& config_path) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      ++i;
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else if (subcommand.empty() && !a.empty() && a[0] != '-') {
      subcommand = a;
    }
  }
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(n) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Seismic airgun pulse detection and early/late-time feature extraction",
               "seisfeat"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value file; flags take precedence");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic survey with ground truth");
  s->option_defaults()->always_capture_default();
  s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  s->add_option("--channels", synth.channels, "Number of channels");
  s->add_option("--duration-s", synth.duration_s, "Duration per channel, seconds");
  s->add_option("--pulses", synth.pulses, "Pulses per channel (overrides --duration-s)");
  s->add_option("--sample-rate", synth.sample_rate, "Sample rate, Hz");
  s->add_option("--ipi-s", synth.ipi_s, "Inter-pulse interval, seconds");
  s->add_option("--peak-upa", synth.peak_upa, "Channel-1 peak pressure, uPa");
  s->add_option("--noise-rms-upa", synth.noise_rms_upa, "White noise rms, uPa");
  s->add_option("--seed", synth.seed, "Noise seed");
  s->add_option("--files-per-channel", synth.files_per_channel, "WAV files per channel");
  s->add_option("--channel-delay-s", synth.channel_delay_s, "Arrival delay per channel index");
  s->add_option("--channel-level-step-db", synth.channel_level_step_db,
                "Level change per channel index, dB");
  s->add_option("--config", config_path, "Flat key=value file; flags take precedence");

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Detect pulses and write the event list as CSV");
  d->option_defaults()->always_capture_default();
  d->add_option("--manifest", detect.manifest, "Manifest file")->required();
  d->add_option("--out", detect.out, "Output CSV")->required();
  d->add_option("--channels", detect.channels, "Channel subset (comma separated)")
      ->delimiter(',');
  d->add_option("--weighting", detect.weighting, "Stream to detect on: linear, lfc, mfc");
  detect.detector.add_to(d);
  d->add_option("--config", config_path, "Flat key=value file; flags take precedence");

  ExtractArgs extract;
  auto* e = app.add_subcommand("extract", "Run the full feature-extraction pipeline");
  e->option_defaults()->always_capture_default();
  e->add_option("--manifest", extract.manifest, "Manifest file")->required();
  e->add_option("--out", extract.out, "Catalog CSV")->required();
  e->add_option("--summary", extract.summary, "Run summary path (default <out>.summary.txt)");
  e->add_option("--mode", extract.mode, "serial or parallel");
  e->add_option("--workers", extract.workers, "Worker threads (0 = all hardware threads)");
  e->add_option("--channels", extract.channels, "Channel subset (comma separated)")
      ->delimiter(',');
  e->add_option("--weightings", extract.weightings, "Weightings (comma separated)")
      ->delimiter(',');
  e->add_option("--run-id", extract.run_id, "Catalog run_id (default manifest stem)");
  e->add_option("--chunk-s", extract.chunk_s, "Streaming chunk length, seconds");
  e->add_flag("--dump-filters", extract.dump_filters, "Print filter coefficients");
  extract.detector.add_to(e);
  e->add_option("--config", config_path, "Flat key=value file; flags take precedence");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run serial then parallel and compare");
  b->option_defaults()->always_capture_default();
  b->add_option("--manifest", bench.manifest, "Manifest file")->required();
  b->add_option("--out-dir", bench.out_dir, "Directory for both catalogs")->required();
  b->add_option("--workers", bench.workers, "Parallel worker threads");
  b->add_option("--channels", bench.channels, "Channel subset (comma separated)")
      ->delimiter(',');
  b->add_option("--weightings", bench.weightings, "Weightings (comma separated)")
      ->delimiter(',');
  b->add_option("--run-id", bench.run_id, "Catalog run_id (default manifest stem)");
  b->add_option("--chunk-s", bench.chunk_s, "Streaming chunk length, seconds");
  bench.detector.add_to(b);
  b->add_option("--config", config_path, "Flat key=value file; flags take precedence");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string sub_name, cfg_path;
    prescan(args, sub_name, cfg_path);
    if (!cfg_path.empty()) {
      CLI::App* sub = nullptr;
      for (auto* candidate : {s, d, e, b}) {
        if (candidate->get_name() == sub_name) sub = candidate;
      }
      if (!sub) throw UsageError("--config requires a subcommand");
      // Config values go in as flags unless the same flag was given explicitly.
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config_file(cfg_path)) {
        if (key == "config") continue;
        if (!sub->get_option_no_throw("--" + key)) {
          throw UsageError("unknown config key '" + key + "' for " + sub_name);
        }
        if (!flag_given(args, key)) injected.push_back("--" + key + "=" + value);
      }
      const auto pos = std::find(args.begin(), args.end(), sub_name);
      args.insert(pos + 1, injected.begin(), injected.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, err, err);
    return kExitUsage;
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n" << app.help();
    return kExitUsage;
  }

  for (const auto* sub : {s, d, e, b}) {
    if (sub->parsed()) out << "# " << sub->get_name() << " configuration\n" << effective_config(sub);
  }
  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (d->parsed()) return cmd_detect(detect, out);
    if (e->parsed()) return cmd_extract(extract, e, out);
    if (b->parsed()) return cmd_bench(bench, out);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace seisfeat::cli
