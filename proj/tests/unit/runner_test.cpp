#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "seisfeat/runner.hpp"
#include "seisfeat/synth.hpp"

namespace seisfeat {
namespace {

class RunnerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new oracle::TempDir("runner");
    SurveySpec spec;
    spec.channel_count = 3;
    spec.duration_s = SurveySpec::duration_for_pulses(6);
    spec.noise_rms_upa = 3e3;
    spec.files_per_channel = 2;
    spec.seed = 77;
    synth_ = new SynthOutput(generate(spec, dir_->path() / "survey"));
  }
  static void TearDownTestSuite() {
    delete synth_;
    delete dir_;
  }

  RunConfig config(const std::string& name, RunMode mode = RunMode::serial, int workers = 1) {
    RunConfig c;
    c.mode = mode;
    c.worker_count = workers;
    c.output_path = dir_->path() / name;
    c.run_id = "t";
    return c;
  }
  std::vector<ChannelManifest> manifests() { return open_manifest(synth_->manifest_path); }

  static oracle::TempDir* dir_;
  static SynthOutput* synth_;
};

oracle::TempDir* RunnerTest::dir_ = nullptr;
SynthOutput* RunnerTest::synth_ = nullptr;

TEST(EstimateSerial, Examples) {
  EXPECT_DOUBLE_EQ(estimate_serial(5, 43.0 * 3600), 215.0 * 3600);
  EXPECT_DOUBLE_EQ(estimate_serial(1, 12.5), 12.5);
  EXPECT_DOUBLE_EQ(estimate_serial(3, 7200), 21600);
  EXPECT_THROW(estimate_serial(0, 1.0), Error);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.output_path = "x.csv";
  EXPECT_NO_THROW(c.validate());
  c.worker_count = 2;
  EXPECT_THROW(c.validate(), Error);
  c.mode = RunMode::parallel;
  EXPECT_NO_THROW(c.validate());
  c.weightings.clear();
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_run_mode("parallel"), RunMode::parallel);
  EXPECT_THROW(parse_run_mode("turbo"), Error);
}

TEST_F(RunnerTest, SerialCountsAndLedger) {
  const auto ms = manifests();
  const auto r = run(config("serial.csv"), ms);
  EXPECT_EQ(r.pulses_per_channel, (std::vector<std::int64_t>{6, 6, 6}));
  EXPECT_EQ(r.report.records, 3 * 18);
  EXPECT_EQ(r.report.points, 3 * 18 * 61);
  EXPECT_EQ(r.ledger.total_points(), r.report.points);
  EXPECT_EQ(r.ledger.catalog_points, r.report.points);
  EXPECT_EQ(r.ledger.formula_points_per_unit(r.pulses_per_channel), ledger_total(3, 11, 50, 3, 6));
  ASSERT_EQ(r.report.channels.size(), 3u);
  double sum = 0.0;
  for (const auto& c : r.report.channels) sum += c.wall_seconds;
  EXPECT_LE(sum, r.report.total_wall_seconds * 1.0001);
  EXPECT_NEAR(r.report.channel_hours, 3 * ms[0].duration_s() / 3600.0, 1e-12);
  EXPECT_TRUE(std::filesystem::exists(r.catalog_path));
  EXPECT_FALSE(std::filesystem::exists(r.catalog_path.string() + ".partial"));
}

TEST_F(RunnerTest, SingleChannelTwelvePulses) {
  oracle::TempDir dir("runner12");
  SurveySpec spec;
  spec.duration_s = SurveySpec::duration_for_pulses(12);
  const auto out = generate(spec, dir.path());
  RunConfig c;
  c.output_path = dir / "c.csv";
  const auto r = run(c, open_manifest(out.manifest_path));
  EXPECT_EQ(r.report.records, 36);
  EXPECT_EQ(r.report.points, 2196);
}

TEST_F(RunnerTest, ParallelIsByteIdenticalForAnyWorkerCountAndOrder) {
  const auto ms = manifests();
  const auto serial = oracle::read_file(run(config("s.csv"), ms).catalog_path);
  ASSERT_FALSE(serial.empty());
  for (int workers : {2, 4, 8}) {
    for (std::optional<std::uint64_t> seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{workers * 31ull}}) {
      auto c = config("p.csv", RunMode::parallel, workers);
      c.dispatch_seed = seed;
      EXPECT_EQ(oracle::read_file(run(c, ms).catalog_path), serial) << workers;
    }
  }
  auto shuffled = config("shuffled.csv");
  shuffled.dispatch_seed = 12345;
  EXPECT_EQ(oracle::read_file(run(shuffled, ms).catalog_path), serial);
}

TEST_F(RunnerTest, ChunkLengthDoesNotChangeCatalog) {
  const auto ms = manifests();
  const auto base = oracle::read_file(run(config("c60.csv"), ms).catalog_path);
  for (double chunk : {0.37, 3.0, 1000.0}) {
    auto c = config("cx.csv");
    c.chunk_s = chunk;
    EXPECT_EQ(oracle::read_file(run(c, ms).catalog_path), base) << chunk;
  }
}

TEST_F(RunnerTest, ChannelAndWeightingSubsets) {
  const auto ms = manifests();
  auto c = config("sub.csv");
  c.channels = {3, 1};
  c.weightings = {WeightingKind::MFC};
  const auto r = run(c, ms);
  EXPECT_EQ(r.report.records, 12);
  EXPECT_EQ(r.ledger.weightings, 1);
  EXPECT_EQ(r.ledger.units, 2);
  const auto back = read_catalog(r.catalog_path);
  EXPECT_EQ(back.records.front().channel_id, 1);
  EXPECT_EQ(back.records.back().channel_id, 3);
  c.channels = {9};
  EXPECT_THROW(run(c, ms), Error);
}

TEST_F(RunnerTest, WorkConservationAndPerChannelCsel) {
  const auto ms = manifests();
  const auto serial = read_catalog(run(config("wc_s.csv"), ms).catalog_path);
  const auto parallel = read_catalog(run(config("wc_p.csv", RunMode::parallel, 4), ms).catalog_path);
  ASSERT_EQ(serial.records.size(), parallel.records.size());
  // CSEL series restart per channel: the first pulse's CSEL equals its SEL.
  for (const auto& r : parallel.records) {
    if (r.pulse_index == 0) EXPECT_EQ(r.early.csel_db, r.early.sel_db);
  }
  for (const auto& m : ms) {
    const auto direct = process_channel(m, WeightingKind::Linear, DetectorConfig{});
    EXPECT_EQ(direct.size(), 6u);
    EXPECT_TRUE(direct.back().ipi_s == std::nullopt);
    EXPECT_NEAR(*direct.front().ipi_s, 10.0, 1.0 / 16000);
  }
}

TEST_F(RunnerTest, FailureRemovesPartialCatalog) {
  oracle::TempDir dir("runner_fail");
  SurveySpec spec;
  spec.channel_count = 2;
  spec.duration_s = SurveySpec::duration_for_pulses(2);
  const auto out = generate(spec, dir.path());
  const auto ms = open_manifest(out.manifest_path);
  // Truncate channel 2's audio after the manifest was opened.
  std::filesystem::resize_file(out.wav_paths[1], 100);
  for (auto mode : {RunMode::serial, RunMode::parallel}) {
    RunConfig c;
    c.mode = mode;
    c.worker_count = mode == RunMode::serial ? 1 : 2;
    c.output_path = dir / "cat.csv";
    try {
      run(c, ms);
      ADD_FAILURE() << "run should fail";
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("channel 2"), std::string::npos) << e.what();
    }
    EXPECT_FALSE(std::filesystem::exists(c.output_path));
    EXPECT_FALSE(std::filesystem::exists(dir / "cat.csv.partial"));
  }
}

TEST_F(RunnerTest, UnwritableOutput) {
  auto c = config("missing_dir/deeper/cat.csv");
  EXPECT_SEISFEAT_ERROR(run(c, manifests()), "unwritable path");
}

TEST_F(RunnerTest, ReportFormatting) {
  const auto r = run(config("fmt.csv", RunMode::parallel, 2), manifests());
  const auto text = format_runtime_report(r.report);
  EXPECT_NE(text.find("total_wall_seconds="), std::string::npos);
  EXPECT_NE(text.find("worker_count=2"), std::string::npos);
  const auto ledger = format_ledger(r.ledger, r.pulses_per_channel);
  EXPECT_NE(ledger.find("total_points=" + std::to_string(3 * 18 * 61)), std::string::npos);
}

}  // namespace
}  // namespace seisfeat
