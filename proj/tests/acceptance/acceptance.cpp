// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any criterion fails.

#include <sched.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "seisfeat/measures.hpp"
#include "seisfeat/pipeline.hpp"
#include "seisfeat/runner.hpp"
#include "seisfeat/synth.hpp"
#include "seisfeat/weighting.hpp"
#include "seisfeat/windows.hpp"

namespace {

using namespace seisfeat;
using Clock = std::chrono::steady_clock;

enum class Verdict { pass, fail, skip };

struct Line {
  int id;
  std::string name;
  Verdict verdict;
  std::string detail;
};

std::vector<Line> g_lines;

void report(int id, const std::string& name, Verdict v, const std::string& detail) {
  const char* tag = v == Verdict::pass ? "PASS" : v == Verdict::fail ? "FAIL" : "SKIP";
  std::printf("[%s] criterion %d %s: %s\n", tag, id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  g_lines.push_back({id, name, v, detail});
}

Verdict verdict(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Usable CPUs: affinity mask, further capped by a cgroup v2 quota if present.
int usable_cores() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  cpu_set_t set;
  if (sched_getaffinity(0, sizeof set, &set) == 0) n = std::min(n, CPU_COUNT(&set));
  std::ifstream cpu_max("/sys/fs/cgroup/cpu.max");
  std::string quota;
  double period = 0.0;
  if (cpu_max >> quota >> period && quota != "max" && period > 0.0) {
    n = std::min(n, std::max(1, static_cast<int>(std::floor(std::stod(quota) / period))));
  }
  return std::max(1, n);
}

// 1 ------------------------------------------------------------------------
void ledger_reproduction() {
  const auto t0 = Clock::now();
  std::int64_t total = 0;
  for (int i = 0; i < 1000; ++i) total = ledger_total(3, 11, 50, 5, 160122);
  const double per_call = seconds_since(t0) / 1000.0;
  report(1, "ledger reproduction", verdict(total == 146'511'630 && per_call < 1e-3),
         fmt("ledger_total(3, 11, 50, 5, 160122) = %lld (expected 146511630), %.3g s per call",
             static_cast<long long>(total), per_call));
}

// Criterion-7 survey, shared by 2, 7 and 8.
struct Survey {
  oracle::TempDir dir{"acceptance"};
  SynthOutput synth;
  std::vector<ChannelManifest> manifests;
  double synth_seconds = 0.0;
};

Survey& survey() {
  static Survey v;
  static bool ready = false;
  if (!ready) {
    const auto t0 = Clock::now();
    SurveySpec spec;
    spec.channel_count = 5;
    spec.sample_rate_hz = 16000;
    spec.ipi_s = 10.0;
    spec.duration_s = SurveySpec::duration_for_pulses(46, spec.ipi_s, spec.first_pulse_s);
    spec.noise_rms_upa = 0.0;
    v.synth = generate(spec, v.dir.path() / "survey");
    v.manifests = open_manifest(v.synth.manifest_path);
    v.synth_seconds = seconds_since(t0);
    ready = true;
  }
  return v;
}

RunResult run_survey(const std::string& name, RunMode mode, int workers) {
  RunConfig c;
  c.mode = mode;
  c.worker_count = workers;
  c.output_path = survey().dir.path() / name;
  c.run_id = "acceptance";
  return run(c, survey().manifests);
}

// 2 ------------------------------------------------------------------------
void schema_fidelity(const RunResult& r) {
  // Count cells in the written file rather than trusting the writer.
  std::ifstream in(r.catalog_path);
  std::string line;
  std::getline(in, line);
  const auto header_cols = static_cast<std::int64_t>(std::count(line.begin(), line.end(), ',') + 1);
  std::int64_t rows = 0, cells = 0;
  bool widths_ok = header_cols == kIdentifierColumnCount + kFeatureCount;
  while (std::getline(in, line)) {
    const auto cols = static_cast<std::int64_t>(std::count(line.begin(), line.end(), ',') + 1);
    widths_ok = widths_ok && cols == header_cols;
    cells += cols - kIdentifierColumnCount;
    ++rows;
  }
  std::int64_t pulses = 0;
  for (auto n : r.pulses_per_channel) pulses += n;
  const auto formula = r.ledger.formula_points_per_unit(r.pulses_per_channel);
  const bool ok = widths_ok && rows == pulses * 3 && cells == 3 * 61 * pulses && formula &&
                  *formula == cells && r.ledger.total_points() == cells;
  report(2, "schema fidelity", verdict(ok),
         fmt("%lld pulses -> %lld rows (expected %lld), %lld feature cells; "
             "(A)(B+C)(D)(E) = 3*61*%zu*%lld = %lld",
             static_cast<long long>(pulses), static_cast<long long>(rows),
             static_cast<long long>(pulses * 3), static_cast<long long>(cells),
             r.pulses_per_channel.size(),
             static_cast<long long>(r.pulses_per_channel.empty() ? 0 : r.pulses_per_channel[0]),
             static_cast<long long>(formula.value_or(-1))));
}

// 3 ------------------------------------------------------------------------
void sel_leq_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20100301);
  const double rates[] = {8000, 16000, 44100, 48000, 96000, 192000};
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_real_distribution<double> level(-3.0, 9.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double fs = rates[pick(rng)];
    const double scale = std::pow(10.0, level(rng));
    std::vector<double> x(static_cast<std::size_t>(fs));
    for (auto& v : x) v = scale * gauss(rng);
    worst = std::max(worst, std::abs(sel_db(x, fs) - leq_db(x, fs)));
  }
  const double elapsed = seconds_since(t0);
  report(3, "SEL equals LEQ on 1 s windows", verdict(worst < 1e-12 && elapsed < 10.0),
         fmt("1000 windows, max |sel - leq| = %.3g dB (< 1e-12), %.2f s (< 10 s)", worst, elapsed));
}

// 4 ------------------------------------------------------------------------
void csel_identity() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> count(1, 200);
  std::uniform_real_distribution<double> amp_db(100.0, 240.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double fs = 16000;
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    CselAccumulator acc;
    std::vector<double> sels;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      const double a = std::pow(10.0, amp_db(rng) / 20.0);
      std::vector<double> w(1 + rng() % 4000);
      for (auto& v : w) v = a * gauss(rng);
      sels.push_back(sel_db(w, fs));
      acc.update(w, fs);
    }
    worst = std::max(worst, std::abs(acc.level_db() - oracle::csel_from_sels(sels)));
  }
  report(4, "CSEL aggregation identity", verdict(worst < 1e-9),
         fmt("100 pulse sets, max |csel - 10 log10 sum 10^(SEL/10)| = %.3g dB (< 1e-9)", worst));
}

// 5 ------------------------------------------------------------------------
void window_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fs = 16000;
  const double window_s = 1.5;
  const auto n = static_cast<std::size_t>(window_s * fs);
  double worst_t = 0.0;
  double worst_low = 1.0, worst_excess = -1.0;
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // Alternate between Gaussian and two-sided exponential envelopes.
    const double amp = std::pow(10.0, 5.0 + 4.0 * u(rng));
    const double center = 0.2 + 0.9 * u(rng);
    const double carrier = 500.0 * u(rng);
    std::function<double(double)> f;
    if (trial % 2 == 0) {
      f = oracle::gaussian_pulse(amp, center, 0.005 + 0.1 * u(rng), carrier);
    } else {
      const double rise = 0.001 + 0.01 * u(rng), decay = 0.01 + 0.2 * u(rng);
      f = [=](double t) {
        const double d = t - center;
        const double env = d < 0 ? std::exp(d / rise) : std::exp(-d / decay);
        return amp * env * std::cos(2.0 * std::numbers::pi * carrier * d);
      };
    }
    const auto x = oracle::sample(f, 0.0, fs, n);
    const auto b = energy_bounds(x, 0, fs, 0.0);
    const auto fine = oracle::fine_energy_bounds(f, 0.0, window_s, fs, 10);
    const double dt = std::max(std::abs(b.t_5th - fine.t5), std::abs(b.t_95th - fine.t95));
    worst_t = std::max(worst_t, dt * fs);

    double total = 0.0, captured = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += x[i] * x[i];
    for (auto i = b.index_5th; i <= b.index_95th; ++i) captured += x[i] * x[i];
    const double frac = captured / total;
    const double slack = (x[b.index_5th] * x[b.index_5th] + x[b.index_95th] * x[b.index_95th]) / total;
    worst_low = std::min(worst_low, frac);
    worst_excess = std::max(worst_excess, frac - 0.90 - slack);
    if (dt * fs > 1.0 + 1e-9 || frac < 0.90 * (1 - 1e-12) || frac > 0.90 + slack + 1e-12) ++failures;
  }
  report(5, "early-window energy oracle", verdict(failures == 0),
         fmt("200 envelopes, worst bound offset %.3f native samples (<= 1), min captured %.6f (>= 0.90), "
             "max excess over 0.90 + two samples' energy %.3g (<= 0), %d failures",
             worst_t, worst_low, worst_excess, failures));
}

// 6 ------------------------------------------------------------------------
// Gain in dB at `f` from the FFT of the filtered unit impulse, interpolated
// between the two neighbouring bins.
double fft_gain_db(const std::vector<std::complex<double>>& spectrum, double fs, double f) {
  const double bin = f * static_cast<double>(spectrum.size()) / fs;
  const auto k = static_cast<std::size_t>(std::floor(bin));
  const double frac = bin - static_cast<double>(k);
  const double g0 = 20.0 * std::log10(std::abs(spectrum[k]));
  const double g1 = 20.0 * std::log10(std::abs(spectrum[k + 1]));
  return g0 + frac * (g1 - g0);
}

void filter_contract() {
  bool ok = true;
  std::string detail;
  double worst = 0.0;
  int checked = 0;
  for (double fs : {16000.0, 64000.0, 512000.0}) {
    for (auto kind : {WeightingKind::LFC, WeightingKind::MFC}) {
      FilterState filter = design_filter(WeightingSpec::standard(kind), fs);
      const auto spec = WeightingSpec::standard(kind);
      std::vector<double> cutoffs{*spec.f_lo_hz};
      if (*spec.f_hi_hz < 0.95 * fs / 2) cutoffs.push_back(*spec.f_hi_hz);
      // Resolution of at most 1/64 of the lowest cutoff.
      std::size_t n = 1;
      while (fs / static_cast<double>(n) > *spec.f_lo_hz / 64.0) n <<= 1;
      std::vector<double> probe(n, 0.0);
      probe[0] = 1.0;
      filter.process(probe);
      std::vector<std::complex<double>> spectrum(probe.begin(), probe.end());
      oracle::fft(spectrum);
      for (double fc : cutoffs) {
        const double g = fft_gain_db(spectrum, fs, fc);
        const double err = std::abs(g - (-3.0103));
        worst = std::max(worst, err);
        ok = ok && err <= 0.5;
        ++checked;
        detail += fmt("%s@%gk %g Hz %.3f dB; ", to_string(kind), fs / 1000, fc, g);
      }
    }
  }
  // Linear: bit-exact identity.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss(0.0, 1e7);
  std::vector<double> x(1 << 16);
  for (auto& v : x) v = gauss(rng);
  bool identity = true;
  for (double fs : {16000.0, 64000.0, 512000.0}) {
    FilterState lin = design_filter(WeightingSpec::standard(WeightingKind::Linear), fs);
    std::vector<double> y = x;
    lin.process(y);
    identity = identity && std::equal(x.begin(), x.end(), y.begin(), [](double a, double b) {
                 return std::memcmp(&a, &b, sizeof a) == 0;
               });
  }
  report(6, "filter contract", verdict(ok && identity),
         fmt("%d cutoffs, worst |gain + 3.01| = %.3f dB (<= 0.5); Linear bit-exact: %s; ", checked,
             worst, identity ? "yes" : "no") +
             detail);
}

// 7 ------------------------------------------------------------------------
RunResult end_to_end() {
  const auto t0 = Clock::now();
  Survey& s = survey();
  const auto r = run_survey("serial.csv", RunMode::serial, 1);
  const double elapsed = seconds_since(t0);

  const auto catalog = read_catalog(r.catalog_path);
  const auto& truth = s.synth.pulses;
  std::size_t expected = truth.size(), found = 0;
  double worst_t = 0.0, worst_sel = 0.0;
  bool matched = true;
  for (const auto& rec : catalog.records) {
    if (rec.weighting != WeightingKind::Linear) continue;
    ++found;
    const auto it = std::find_if(truth.begin(), truth.end(), [&](const GroundTruthPulse& g) {
      return g.channel_id == rec.channel_id && g.pulse_index == rec.pulse_index;
    });
    if (it == truth.end()) {
      matched = false;
      continue;
    }
    worst_t = std::max(worst_t, std::abs(rec.t_a_s - it->t_true_s) * 16000.0);
    worst_sel = std::max(worst_sel, std::abs(rec.early.sel_db - it->sel_analytic_db));
  }
  const bool ok = matched && found == expected && worst_t <= 1.0 + 1e-6 && worst_sel <= 0.5 &&
                  elapsed < 60.0;
  report(7, "end-to-end recovery", verdict(ok),
         fmt("detected %zu/%zu pulses, worst |t_A - truth| = %.3f samples (<= 1), worst |early SEL - "
             "analytic| = %.3f dB (<= 0.5), %.2f s incl. %.2f s synthesis (< 60 s)",
             found, expected, worst_t, worst_sel, elapsed, s.synth_seconds));
  return r;
}

// 8 ------------------------------------------------------------------------
void determinism(const RunResult& serial) {
  const std::string reference = oracle::read_file(serial.catalog_path);
  std::string detail = fmt("serial catalog %zu bytes", reference.size());
  bool ok = !reference.empty();
  for (int workers : {2, 4, 8}) {
    const auto r = run_survey("parallel_" + std::to_string(workers) + ".csv", RunMode::parallel, workers);
    const bool same = oracle::read_file(r.catalog_path) == reference;
    ok = ok && same;
    detail += fmt("; parallel(%d) %s", workers, same ? "identical" : "DIFFERS");
  }
  report(8, "determinism under parallelism", verdict(ok), detail);
}

// 9 ------------------------------------------------------------------------
void speedup() {
  oracle::TempDir dir("acceptance_speedup");
  SurveySpec spec;
  spec.channel_count = 4;
  spec.duration_s = 600.0;
  spec.noise_rms_upa = 1e4;
  spec.files_per_channel = 10;
  const auto synth = generate(spec, dir.path());
  const auto manifests = open_manifest(synth.manifest_path);

  RunConfig serial;
  serial.output_path = dir / "serial.csv";
  RunConfig parallel = serial;
  parallel.mode = RunMode::parallel;
  parallel.worker_count = 4;
  parallel.output_path = dir / "parallel.csv";
  const auto rs = run(serial, manifests);
  const auto rp = run(parallel, manifests);
  const double ratio = rp.report.total_wall_seconds / rs.report.total_wall_seconds;
  const bool identical = oracle::read_file(rs.catalog_path) == oracle::read_file(rp.catalog_path);
  const int cores = usable_cores();
  const std::string detail =
      fmt("4 ch x 600 s: serial %.3f s, parallel(4) %.3f s, ratio %.3f (<= 0.5), speedup %.2fx, "
          "catalogs %s, usable cores %d",
          rs.report.total_wall_seconds, rp.report.total_wall_seconds, ratio, 1.0 / ratio,
          identical ? "identical" : "DIFFER", cores);
  if (cores < 4) {
    report(9, "parallel speedup", identical ? Verdict::skip : Verdict::fail,
           detail + "; needs a machine with at least 4 cores, ratio not judged");
  } else {
    report(9, "parallel speedup", verdict(identical && ratio <= 0.5), detail);
  }
}

}  // namespace

int main() {
  std::printf("seisfeat acceptance suite\n");
  try {
    ledger_reproduction();
    sel_leq_identity();
    csel_identity();
    window_oracle();
    filter_contract();
    const RunResult serial = end_to_end();
    schema_fidelity(serial);
    determinism(serial);
    speedup();
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int failed = 0, skipped = 0;
  std::printf("\nsummary\n");
  for (const auto& l : g_lines) {
    const char* tag = l.verdict == Verdict::pass ? "PASS" : l.verdict == Verdict::fail ? "FAIL" : "SKIP";
    std::printf("  %d %-32s %s\n", l.id, l.name.c_str(), tag);
    failed += l.verdict == Verdict::fail;
    skipped += l.verdict == Verdict::skip;
  }
  std::printf("%zu criteria: %zu passed, %d failed, %d skipped\n", g_lines.size(),
              g_lines.size() - failed - skipped, failed, skipped);
  return failed == 0 ? 0 : 1;
}
