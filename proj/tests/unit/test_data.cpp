#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <fstream>
#include <numeric>

#include "fixtures.hpp"
#include "support.hpp"
#include "synthts/core/binary_io.hpp"
#include "synthts/core/error.hpp"
#include "synthts/data/canonical.hpp"
#include "synthts/data/csv.hpp"
#include "synthts/data/labeling.hpp"
#include "synthts/data/manifest.hpp"
#include "synthts/data/normalize.hpp"
#include "synthts/data/pipeline.hpp"

using namespace synthts;
using namespace synthts::data;
using synthts::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv column parsing") {
  TempDir dir("csv");
  write_text(dir / "a.csv", "t,ecg\n0,1.5\n1, -2e-3 \n2,3\n");
  CHECK(read_csv_column(dir / "a.csv", 1, 1) == std::vector<double>{1.5, -2e-3, 3.0});
  CHECK(read_csv_column(dir / "a.csv", 0, 1) == std::vector<double>{0, 1, 2});

  SUBCASE("header without skip fails on line 1") {
    CHECK(error_of([&] { read_csv_column(dir / "a.csv", 1); }).find(":1:") != std::string::npos);
  }
  SUBCASE("NaN cell names the line") {
    write_text(dir / "b.csv", "0,1\n1,NaN\n2,3\n");
    const auto msg = error_of([&] { read_csv_column(dir / "b.csv", 1); });
    CHECK(msg.find("b.csv:2") != std::string::npos);
  }
  SUBCASE("column out of range") {
    const auto msg = error_of([&] { read_csv_column(dir / "a.csv", 5, 1); });
    CHECK(msg.find("out of range") != std::string::npos);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_csv_column(dir / "none.csv", 0), DataError); }
}

TEST_CASE("parse_finite is locale-free and strict") {
  double v = 0;
  CHECK(parse_finite("3.25", v));
  CHECK(v == 3.25);
  CHECK_FALSE(parse_finite("3,25", v));
  CHECK_FALSE(parse_finite("inf", v));
  CHECK_FALSE(parse_finite("nan", v));
  CHECK_FALSE(parse_finite("", v));
  CHECK_FALSE(parse_finite("1.0x", v));
}

TEST_CASE("WESAD labeling") {
  const auto map = LabelMap::wesad();
  CHECK(map.validate() == 2);
  PhaseAnnotation tsst{"S2", "TSST", 0, 60, std::nullopt};
  PhaseAnnotation recovery{"S2", "recovery", 0, 60, std::nullopt};
  PhaseAnnotation base{"S2", "baseline", 0, 60, std::nullopt};
  CHECK(label_window(map, tsst, 0, 10.0) == 1);
  CHECK(label_window(map, base, 3, 10.0) == 0);
  CHECK_FALSE(label_window(map, recovery, 0, 10.0).has_value());
  PhaseAnnotation unknown{"S2", "lunch", 0, 60, std::nullopt};
  CHECK_THROWS_AS(label_window(map, unknown, 0, 10.0), DataError);
}

TEST_CASE("valence/arousal thresholding") {
  CHECK(quadrant_class(6.2, 3.1, 5.0) == 2);  // high valence, low arousal
  CHECK(quadrant_class(1.0, 1.0, 5.0) == 0);
  CHECK(quadrant_class(4.9, 5.0, 5.0) == 1);
  CHECK(quadrant_class(5.0, 9.0, 5.0) == 3);

  const auto map = LabelMap::valence_arousal({"video"});
  CHECK(map.validate() == 4);
  PhaseAnnotation phase{"S1", "video", 0, 20, ContinuousAnnotation{}};
  phase.annotation->rate = 2.0;
  // Window 0 covers samples 0..19, window 1 covers 20..39.
  for (int i = 0; i < 40; ++i) {
    phase.annotation->valence.push_back(i < 20 ? (i % 2 ? 6.0 : 6.4) : 2.0);
    phase.annotation->arousal.push_back(i < 20 ? 3.1 : 8.0);
  }
  CHECK(label_window(map, phase, 0, 10.0) == 2);
  CHECK(label_window(map, phase, 1, 10.0) == 1);
}

TEST_CASE("label map validation") {
  LabelMap gap;
  gap.rules = {{"a", RuleKind::Class, 0}, {"b", RuleKind::Class, 2}};
  CHECK_THROWS_AS(gap.validate(), DataError);
  LabelMap dup;
  dup.rules = {{"a", RuleKind::Class, 0}, {"a", RuleKind::Class, 1}};
  CHECK_THROWS_AS(dup.validate(), DataError);
}

TEST_CASE("z-score normalization") {
  // Channel 0 has mean 2 and std 3; channel 1 is constant.
  DatasetMeta meta = testing::make_meta(2, 4, 1);
  std::vector<float> values = {-1, 5, -1, 5, 7, 7, 7, 7, -1, 5, -1, 5, 7, 7, 7, 7};
  WindowedDataset ds(meta, 2, 4, values, {0, 0}, {"a", "b"});

  const auto none = normalize(ds, NormalizationScheme::None);
  CHECK(none == ds);
  CHECK(none.meta().normalization.state == NormalizationState::Raw);

  const auto z = normalize(ds, NormalizationScheme::ZScore);
  const auto& n = z.meta().normalization;
  CHECK(n.state == NormalizationState::ZScored);
  CHECK(n.mean[0] == doctest::Approx(2.0));
  CHECK(n.stddev[0] == doctest::Approx(3.0));
  CHECK_FALSE(n.degenerate[0]);
  CHECK(n.degenerate[1]);
  double m = 0, s2 = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (float v : z.channel(i, 0)) m += v, s2 += double(v) * v;
    for (float v : z.channel(i, 1)) CHECK(v == 0.0f);
  }
  m /= 8;
  CHECK(std::abs(m) < 1e-9);
  CHECK(std::abs(std::sqrt(s2 / 8 - m * m) - 1.0) < 1e-7);
  CHECK(z.channel(0, 0)[0] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(apply_normalization(z, n), DataError);
}

TEST_CASE("normalization statistics come from the reference partition only") {
  auto ds = testing::random_dataset(20, 1, 16, 2, 9);
  const std::vector<std::size_t> ref{0, 1, 2, 3, 4};
  const auto stats = fit_zscore(ds, ref);
  double sum = 0;
  for (auto i : ref) {
    for (float v : ds.channel(i, 0)) sum += v;
  }
  CHECK(stats.mean[0] == doctest::Approx(sum / 80.0).epsilon(1e-12));
  const auto applied = apply_normalization(ds, stats);
  CHECK(applied.channel(7, 0)[3] ==
        doctest::Approx((ds.channel(7, 0)[3] - stats.mean[0]) / stats.stddev[0]).epsilon(1e-6));
}

TEST_CASE("dataset construction invariants") {
  auto meta = testing::make_meta(1, 4, 2);
  CHECK_THROWS_AS(WindowedDataset(meta, 1, 4, {1, 2, 3}, {0}, {"a"}), DataError);
  CHECK_THROWS_AS(WindowedDataset(meta, 1, 4, {1, 2, 3, NAN}, {0}, {"a"}), DataError);
  CHECK_THROWS_AS(WindowedDataset(meta, 1, 4, {1, 2, 3, 4}, {2}, {"a"}), DataError);
  CHECK_THROWS_AS(WindowedDataset(meta, 1, 5, {1, 2, 3, 4, 5}, {0}, {"a"}), DataError);
  CHECK_THROWS_AS(WindowedDataset(meta, 0, 4, {}, {}, {}), DataError);
  CHECK(window_length(100.0, 10.0) == 1000);
  CHECK(window_length(128.0, 10.0) == 1280);
}

TEST_CASE("canonical round trip is bit-exact") {
  TempDir dir("canon");
  auto ds = testing::random_dataset(13, 2, 20, 3, 4);
  auto meta = ds.meta();
  meta.class_names = {"a", "b", "c"};
  meta.channels[1].lowpass_cutoff = 5.0;
  meta.provenance["degradation"] = "jitter(sigma=0.5, seed=1)";
  ds = normalize(ds.with_meta(meta), NormalizationScheme::ZScore);
  write_canonical(ds, dir.path());
  const auto back = read_canonical(dir.path());
  CHECK(back == ds);
  CHECK(std::memcmp(back.values().data(), ds.values().data(), ds.values().size_bytes()) == 0);
  CHECK(tensor_fingerprint(back) == tensor_fingerprint(ds));

  SUBCASE("writing twice is byte-identical") {
    TempDir other("canon2");
    write_canonical(back, other.path());
    for (const char* f : {"manifest.json", "windows.f32", "labels.csv"}) {
      CHECK(read_file_bytes(dir / f) == read_file_bytes(other / f));
    }
  }
  SUBCASE("truncated tensor") {
    auto bytes = read_file_bytes(dir / "windows.f32");
    bytes.resize(bytes.size() - 4);
    write_file_bytes(dir / "windows.f32", bytes);
    CHECK(error_of([&] { read_canonical(dir.path()); }).find("shape mismatch") != std::string::npos);
  }
  SUBCASE("corrupted tensor") {
    auto bytes = read_file_bytes(dir / "windows.f32");
    bytes[5] ^= std::byte{1};
    write_file_bytes(dir / "windows.f32", bytes);
    CHECK(error_of([&] { read_canonical(dir.path()); }).find("checksum") != std::string::npos);
  }
  SUBCASE("manifest claims 3 channels") {
    std::ifstream in(dir / "manifest.json");
    auto j = nlohmann::json::parse(in);
    j["shape"]["channels"] = 3;
    std::ofstream(dir / "manifest.json") << j.dump();
    CHECK_THROWS_AS(read_canonical(dir.path()), DataError);
  }
}

TEST_CASE("manifest parsing and validation") {
  TempDir dir("manifest");
  const auto path = testing::write_wesad_fixture(dir / "raw", {.subjects = 2});
  const auto m = load_manifest(path);
  CHECK(m.subjects() == std::vector<std::string>{"S2", "S3"});
  CHECK(m.channels.size() == 2);
  CHECK(m.channels[1].lowpass_cutoff == 5.0);
  const auto again = manifest_from_json(manifest_to_json(m), m.base_dir);
  CHECK(again.files.size() == m.files.size());
  CHECK(again.phases.size() == m.phases.size());

  SUBCASE("missing file") {
    std::filesystem::remove(dir / "raw" / "S3_EDA.csv");
    CHECK_THROWS_AS(load_manifest(path).validate(true), DataError);
  }
  SUBCASE("cutoff above Nyquist of the target rate") {
    auto j = manifest_to_json(m);
    j["channels"][1]["lowpass_cutoff"] = 60;
    CHECK_THROWS_AS(manifest_from_json(j, m.base_dir).validate(false), DataError);
  }
  SUBCASE("unmapped phase") {
    auto j = manifest_to_json(m);
    j["phases"][0]["phase"] = "lunch";
    CHECK_THROWS_AS(manifest_from_json(j, m.base_dir).validate(false), DataError);
  }
}

TEST_CASE("ingest reads one signal per subject and channel") {
  TempDir dir("ingest");
  const auto m = load_manifest(testing::write_wesad_fixture(dir.path(), {.subjects = 2}));
  const auto recs = ingest(m, 2);
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    REQUIRE(r.signals.size() == 2);
    CHECK(r.signals[0].size() == 70000);
    CHECK(r.signals[1].size() == 400);
    CHECK(r.rates == std::vector<double>{700.0, 4.0});
  }
}

TEST_CASE("15-subject WESAD fixture pipeline") {
  TempDir dir("pipeline");
  const auto m = load_manifest(testing::write_wesad_fixture(dir.path()));
  const auto ds = prepare_dataset(m, {NormalizationScheme::ZScore, 4});
  CHECK(ds.n_classes() == 2);
  CHECK(ds.length() == 1000);
  CHECK(ds.channels() == 2);
  // Per subject: baseline 4 + amusement 2 windows of class 0, TSST 2 of class 1.
  CHECK(ds.class_counts() == std::vector<std::size_t>{90, 30});
  const auto counts = ds.class_counts();
  CHECK(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == ds.size());
  for (float v : ds.values()) REQUIRE(std::isfinite(v));

  const auto summary = summarize(ds);
  CHECK(summary.subjects == 15);
  CHECK(summary.ratio_text == "3.0");
  CHECK(format_summary(summary).find("| 3.0 |") != std::string::npos);

  SUBCASE("deterministic across worker counts") {
    const auto serial = prepare_dataset(m, {NormalizationScheme::ZScore, 1});
    TempDir a("pa"), b("pb");
    write_canonical(ds, a.path());
    write_canonical(serial, b.path());
    for (const char* f : {"manifest.json", "windows.f32", "labels.csv"}) {
      CHECK(read_file_bytes(a / f) == read_file_bytes(b / f));
    }
  }
}
