#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>

#include "seisfeat/error.hpp"
#include "seisfeat/numeric_text.hpp"
#include "seisfeat/pipeline.hpp"

namespace seisfeat {
namespace {

std::string two_digit(int k) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", k);
  return buf;
}

std::vector<std::string> build_columns() {
  std::vector<std::string> c = {"run_id", "channel_id", "weighting", "pulse_index"};
  c.push_back("early_t5_s");  // group 2; early end is late_start_01_s
  for (int k = 1; k <= kLateWindowCount; ++k) c.push_back("late_start_" + two_digit(k) + "_s");
  for (const char* name : {"t_a_s", "p_a_upa", "p_a_db", "t_b_s", "p_b_upa", "p_b_db"}) {
    c.push_back(name);
  }
  for (const char* m : {"spl_peak_db", "sel_db", "leq_db", "csel_db"}) {
    c.push_back(std::string("early_") + m);
  }
  for (int k = 1; k <= kLateWindowCount; ++k) {
    for (const char* m : {"spl_peak_db", "sel_db", "leq_db", "csel_db"}) {
      c.push_back("late_" + two_digit(k) + "_" + m);
    }
  }
  return c;
}

void check_run_id(const std::string& run_id) {
  if (run_id.empty() || run_id.find_first_of(",\"\r\n") != std::string::npos) {
    throw Error("run_id must be non-empty without commas, quotes or newlines");
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& catalog_columns() {
  static const std::vector<std::string> columns = build_columns();
  return columns;
}

void sort_records(std::vector<FeatureRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tuple(a.channel_id, a.pulse_index, static_cast<int>(a.weighting)) <
           std::tuple(b.channel_id, b.pulse_index, static_cast<int>(b.weighting));
  });
}

CatalogSummary write_catalog(std::vector<FeatureRecord> records, std::ostream& out,
                             const std::string& run_id) {
  check_run_id(run_id);
  sort_records(records);

  const auto& columns = catalog_columns();
  std::string line;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) line += ',';
    line += columns[i];
  }
  line += '\n';
  out << line;

  CatalogSummary summary;
  for (const auto& r : records) {
    line.clear();
    line += run_id;
    line += ',';
    line += std::to_string(r.channel_id);
    line += ',';
    line += to_string(r.weighting);
    line += ',';
    line += std::to_string(r.pulse_index);
    std::int64_t cells = 0;
    auto cell = [&](double v, int decimals) {
      line += ',';
      append_fixed(line, v, decimals);
      ++cells;
    };
    auto absent = [&] {
      line += ',';
      line += kAbsentToken;
      ++cells;
    };
    cell(r.early_t5_s, kTimeDecimals);
    for (double t : r.late_start_s) cell(t, kTimeDecimals);
    cell(r.t_a_s, kTimeDecimals);
    cell(r.p_a_upa, kPressureDecimals);
    cell(r.p_a_db, kDbDecimals);
    cell(r.t_b_s, kTimeDecimals);
    cell(r.p_b_upa, kPressureDecimals);
    cell(r.p_b_db, kDbDecimals);
    for (double v : {r.early.spl_peak_db, r.early.sel_db, r.early.leq_db, r.early.csel_db}) {
      cell(v, kDbDecimals);
    }
    for (const auto& w : r.late) {
      if (w) {
        for (double v : {w->spl_peak_db, w->sel_db, w->leq_db, w->csel_db}) cell(v, kDbDecimals);
      } else {
        for (int i = 0; i < 4; ++i) absent();
      }
    }
    if (cells != kFeatureCount) throw Error("internal error: record has wrong width");
    line += '\n';
    out << line;
    ++summary.records;
    summary.points += cells;
  }
  if (!out) throw Error("catalog write failed");
  return summary;
}

CatalogSummary write_catalog(std::vector<FeatureRecord> records,
                             const std::filesystem::path& path, const std::string& run_id) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("unwritable path: " + path.string());
  auto summary = write_catalog(std::move(records), out, run_id);
  out.close();
  if (!out) throw Error("unwritable path: " + path.string());
  return summary;
}

CatalogContents read_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file: " + path.string());
  const auto& columns = catalog_columns();

  std::string line;
  if (!std::getline(in, line)) throw Error("empty catalog: " + path.string());
  {
    const auto header = split_commas(line);
    if (header.size() != columns.size() ||
        !std::equal(header.begin(), header.end(), columns.begin())) {
      throw Error("catalog header does not match schema: " + path.string());
    }
  }

  CatalogContents contents;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != columns.size()) {
      throw Error("catalog row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                  " fields");
    }
    FeatureRecord r;
    contents.run_ids.emplace_back(f[0]);
    r.channel_id = static_cast<int>(parse_integer(f[1]));
    r.weighting = parse_weighting(std::string(f[2]));
    r.pulse_index = parse_integer(f[3]);
    std::size_t i = 4;
    r.early_t5_s = parse_double(f[i++]);
    for (double& t : r.late_start_s) t = parse_double(f[i++]);
    r.t_a_s = parse_double(f[i++]);
    r.p_a_upa = parse_double(f[i++]);
    r.p_a_db = parse_double(f[i++]);
    r.t_b_s = parse_double(f[i++]);
    r.p_b_upa = parse_double(f[i++]);
    r.p_b_db = parse_double(f[i++]);
    r.early.spl_peak_db = parse_double(f[i++]);
    r.early.sel_db = parse_double(f[i++]);
    r.early.leq_db = parse_double(f[i++]);
    r.early.csel_db = parse_double(f[i++]);
    for (auto& w : r.late) {
      std::optional<double> v[4];
      for (auto& x : v) x = parse_optional_double(f[i++]);
      const int present = (v[0] ? 1 : 0) + (v[1] ? 1 : 0) + (v[2] ? 1 : 0) + (v[3] ? 1 : 0);
      if (present == 4) {
        w = WindowLevels{*v[0], *v[1], *v[2], *v[3]};
      } else if (present != 0) {
        throw Error("catalog row " + std::to_string(row) + " has a partially absent window");
      }
    }
    contents.records.push_back(r);
  }
  return contents;
}

}  // namespace seisfeat
