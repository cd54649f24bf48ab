#include "sgap/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sgap;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sgap_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

using DictionaryFile = TempDir;

TEST_F(DictionaryFile, RoundTripIsBitExact) {
  const Dictionary d = build_random_tight_frame(8, 20, 5);
  const fs::path p = dir_ / "d.sgdict";
  save_dictionary(d, p);
  EXPECT_TRUE(fs::exists(payload_path(p)));
  EXPECT_EQ(fs::file_size(payload_path(p)), std::uintmax_t(8 * 20 * 16));
  const LoadedDictionary back = load_dictionary(p);
  EXPECT_TRUE(back.dictionary.atoms() == d.atoms());
  EXPECT_EQ(back.cached_coherence, d.coherence());
  EXPECT_EQ(back.cached_redundancy, d.redundancy());
  EXPECT_EQ(back.dictionary.provenance().kind, "random-tight-frame");
  EXPECT_EQ(back.dictionary.provenance().seed, std::optional<std::uint64_t>(5));
}

TEST_F(DictionaryFile, MetadataDescribesPayload) {
  save_dictionary(build_spikes_sines(4), dir_ / "ss.sgdict");
  std::ifstream is(dir_ / "ss.sgdict");
  const Json meta = Json::parse(is);
  EXPECT_EQ(meta.at("format"), "sgdict-1");
  EXPECT_EQ(meta.at("m"), 4);
  EXPECT_EQ(meta.at("n_atoms"), 8);
  EXPECT_EQ(meta.at("payload").at("file"), "ss.sgdict.bin");
  EXPECT_EQ(meta.at("payload").at("bytes"), 4 * 8 * 16);
  EXPECT_DOUBLE_EQ(meta.at("metrics").at("coherence").get<double>(), 0.5);
}

TEST_F(DictionaryFile, PayloadIsLittleEndianColumnMajor) {
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = Complex(0.0, 1.0);
  save_dictionary(Dictionary::from_atoms(a, {"custom", std::nullopt, {}}), dir_ / "x.sgdict");
  std::ifstream bs(dir_ / "x.sgdict.bin", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bs)), {});
  ASSERT_EQ(bytes.size(), 64u);
  // Entry (0,0) = 1 + 0i: 1.0 is 0x3ff0000000000000, little-endian.
  EXPECT_EQ(bytes[6], 0xf0);
  EXPECT_EQ(bytes[7], 0x3f);
  // Entry (1,1) is the fourth complex value; its imaginary part is 1.0.
  EXPECT_EQ(bytes[3 * 16 + 8 + 7], 0x3f);
  EXPECT_EQ(bytes[3 * 16 + 7], 0x00);
}

TEST_F(DictionaryFile, RejectsWrongFormat) {
  save_dictionary(build_identity(3), dir_ / "a.sgdict");
  std::ifstream is(dir_ / "a.sgdict");
  Json meta = Json::parse(is);
  meta["format"] = "sgdict-2";
  write_text(dir_ / "a.sgdict", meta.dump());
  EXPECT_THROW(load_dictionary(dir_ / "a.sgdict"), FormatError);
  write_text(dir_ / "b.sgdict", "{not json");
  EXPECT_THROW(load_dictionary(dir_ / "b.sgdict"), FormatError);
}

TEST_F(DictionaryFile, RejectsTruncatedOrPaddedPayload) {
  const fs::path p = dir_ / "c.sgdict";
  save_dictionary(build_identity(3), p);
  fs::resize_file(payload_path(p), 3 * 3 * 16 - 8);
  EXPECT_THROW(load_dictionary(p), FormatError);
  save_dictionary(build_identity(3), p);
  std::ofstream(payload_path(p), std::ios::app | std::ios::binary) << 'x';
  EXPECT_THROW(load_dictionary(p), FormatError);
}

TEST_F(DictionaryFile, RejectsNonUnitAtomsInPayload) {
  const fs::path p = dir_ / "e.sgdict";
  save_dictionary(build_identity(2), p);
  {
    std::fstream bs(payload_path(p), std::ios::in | std::ios::out | std::ios::binary);
    write_le64(bs, 2.0);
  }
  EXPECT_THROW(load_dictionary(p), std::invalid_argument);
  EXPECT_THROW(load_dictionary(dir_ / "missing.sgdict"), std::runtime_error);
}

TEST(Numbers, FormatDouble) {
  EXPECT_EQ(format_double(0.25), "0.25");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-kInfinity), "-inf");
  const double x = 0.3779644730092272;
  EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_TRUE(json_number(kInfinity).is_null());
  EXPECT_EQ(json_number(1.5).get<double>(), 1.5);
}

TEST(Numbers, CsvFieldQuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a, b"), "\"a, b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Numbers, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Thresholds, CsvAndJsonAgree) {
  std::ostringstream csv;
  write_csv_header(csv, kThresholdCsvColumns);
  std::vector<GapThresholds> rows;
  for (long s = 1; s <= 6; ++s) rows.push_back(compute_gap_thresholds(s, s, 0, 0.125, 64, 256));
  for (const auto& g : rows) write_csv_row(csv, g);
  const auto table = parse_csv(csv.str());
  ASSERT_EQ(table.size(), 7u);
  ASSERT_EQ(table[0].size(), kThresholdCsvColumns.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json j = to_json(rows[i]);
    const auto& r = table[i + 1];
    ASSERT_EQ(r.size(), kThresholdCsvColumns.size());
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string col(kThresholdCsvColumns[c]);
      if (col == "error") {
        EXPECT_EQ(r[c], "");
        continue;
      }
      ASSERT_TRUE(j.contains(col)) << col;
      const Json& v = j.at(col);
      if (v.is_boolean()) {
        EXPECT_EQ(r[c], v.get<bool>() ? "1" : "0") << col;
      } else if (v.is_number()) {
        EXPECT_EQ(std::stod(r[c]), v.get<double>()) << col;
      } else if (v.at("value").is_null()) {
        EXPECT_EQ(r[c], v.at("status").get<std::string>()) << col;
      } else {
        EXPECT_EQ(std::stod(r[c]), v.at("value").get<double>()) << col;
      }
    }
  }
}

TEST(Thresholds, FlaggedValuesSerializeWithStatus) {
  const GapThresholds g = compute_gap_thresholds(8, 8, 0, 0.5, 0, 0);
  const Json j = to_json(g);
  EXPECT_EQ(j.at("overlap_rhs").at("status"), "vacuous");
  EXPECT_TRUE(j.at("overlap_rhs").at("value").is_null());
  EXPECT_EQ(j.at("weak_gap_rhs").at("status"), "not_evaluated");
  std::ostringstream csv;
  write_csv_row(csv, g);
  const auto cells = parse_csv(csv.str()).at(0);
  EXPECT_EQ(cells[9], "vacuous");
}

TEST(Experiments, CsvAndJsonAgree) {
  const ExperimentReport rep = gap_experiment(build_spikes_sines(16), 3, 3, 1, 4, 3, 8);
  const Json j = to_json(rep);
  std::ostringstream csv;
  write_csv(csv, rep);
  const auto table = parse_csv(csv.str());
  ASSERT_EQ(table.size(), rep.trials.size() + 1);
  EXPECT_EQ(table[0].size(), kExperimentCsvColumns.size());
  for (std::size_t i = 0; i < rep.trials.size(); ++i) {
    const Json& tj = j.at("trials").at(i);
    const auto& row = table[i + 1];
    EXPECT_EQ(std::stoull(row[2]), tj.at("seed").get<std::uint64_t>());
    EXPECT_EQ(std::stod(row[11]), tj.at("residual").get<double>());
    EXPECT_EQ(row[12], tj.at("verdict").get<std::string>());
    const Json& pj = j.at("pairs").at(tj.at("pair").get<std::size_t>());
    EXPECT_EQ(std::stol(row[6]), pj.at("rank_r").get<long>());
    EXPECT_EQ(row[10], pj.at("predicted").get<bool>() ? "1" : "0");
  }
  EXPECT_EQ(j.at("summary").at("trials"), 12);
}

TEST(Experiments, JsonIsReproducible) {
  const Dictionary d = build_spikes_sines(16);
  const std::string a = to_json(gap_experiment(d, 3, 3, 0, 5, 2, 4)).dump();
  const std::string b = to_json(gap_experiment(d, 3, 3, 0, 5, 2, 4)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(fnv1a_hex(a), fnv1a_hex(b));
}

TEST(Sweeps, CsvRowsMatchTrials) {
  SweepConfig cfg;
  cfg.s_values = {2, 3};
  cfg.trials_per_s = 5;
  cfg.master_seed = 9;
  const SweepReport rep = statistics_sweep(build_random_tight_frame(8, 24, 2), cfg);
  std::ostringstream csv;
  write_csv(csv, rep);
  const auto table = parse_csv(csv.str());
  ASSERT_EQ(table.size(), 11u);
  EXPECT_EQ(table[0].size(), kSweepCsvColumns.size());
  const Json j = to_json(rep);
  EXPECT_EQ(j.at("per_s").size(), 2u);
}

TEST(Manifest, WrapKeepsPayloadDigestStable) {
  RunManifest m1, m2;
  m1.timestamp = "2026-01-01T00:00:00Z";
  m2.timestamp = "2026-06-01T00:00:00Z";
  const Json payload = {{"x", 1}, {"y", {1, 2, 3}}};
  const Json a = wrap_report(m1, payload);
  const Json b = wrap_report(m2, payload);
  EXPECT_EQ(a.at("payload_digest"), b.at("payload_digest"));
  EXPECT_EQ(a.at("payload").dump(), b.at("payload").dump());
  EXPECT_NE(a.at("manifest").dump(), b.at("manifest").dump());
  EXPECT_EQ(a.at("manifest").at("tool_version"), "0.1.0");
}
