#ifndef SYNTHTS_TESTS_FIXTURES_HPP
#define SYNTHTS_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "synthts/core/rng.hpp"

namespace synthts::testing {

struct WesadFixture {
  std::size_t subjects = 15;
  double ecg_rate = 700.0;
  double eda_rate = 4.0;
  std::uint64_t seed = 1;
};

// Writes per-subject ECG/EDA CSVs (header row, two columns: time, value) and
// a manifest.json using the WESAD label map. Phases per subject:
// baseline 0-40 s, amusement 40-60 s, TSST 60-80 s, recovery 80-100 s.
inline std::filesystem::path write_wesad_fixture(const std::filesystem::path& dir, const WesadFixture& fx = {}) {
  std::filesystem::create_directories(dir);
  const double duration = 100.0;
  Rng rng(fx.seed);
  nlohmann::json files = nlohmann::json::array();
  nlohmann::json phases = nlohmann::json::array();
  char buf[64];
  for (std::size_t s = 0; s < fx.subjects; ++s) {
    const std::string subject = "S" + std::to_string(s + 2);
    for (const auto& [channel, rate] : {std::pair<std::string, double>{"ECG", fx.ecg_rate}, {"EDA", fx.eda_rate}}) {
      const auto name = subject + "_" + channel + ".csv";
      std::ofstream out(dir / name);
      out << "time,value\n";
      const auto n = static_cast<std::size_t>(duration * rate);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double stress = t >= 60.0 && t < 80.0 ? 1.0 : 0.0;
        const double v = channel == "ECG"
                             ? std::sin(2 * std::numbers::pi * (1.1 + 0.4 * stress) * t) + 0.1 * rng.normal()
                             : 2.0 + stress + 0.05 * rng.normal();
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", t, v);
        out << buf;
      }
      files.push_back({{"subject", subject}, {"channel", channel}, {"path", name}, {"column", 1}, {"skip", 1},
                       {"native_rate", rate}});
    }
    const std::pair<const char*, std::array<double, 2>> layout[] = {
        {"baseline", {0, 40}}, {"amusement", {40, 60}}, {"TSST", {60, 80}}, {"recovery", {80, 100}}};
    for (const auto& [phase, span] : layout) {
      phases.push_back({{"subject", subject}, {"phase", phase}, {"start", span[0]}, {"end", span[1]}});
    }
  }
  nlohmann::json manifest = {
      {"schema_version", "1"},
      {"name", "WESAD-fixture"},
      {"target_rate", 100},
      {"window_seconds", 10},
      {"channels",
       {{{"name", "ECG"}, {"native_rate", fx.ecg_rate}, {"kind", "quasi-periodic"}},
        {{"name", "EDA"}, {"native_rate", fx.eda_rate}, {"kind", "slow-varying"}, {"lowpass_cutoff", 5}}}},
      {"files", files},
      {"phases", phases},
      {"label_map", "wesad"}};
  const auto path = dir / "manifest.json";
  std::ofstream(path) << manifest.dump(2) << '\n';
  return path;
}

}  // namespace synthts::testing

#endif  // SYNTHTS_TESTS_FIXTURES_HPP
