#ifndef SYNTHTS_TESTS_SUPPORT_HPP
#define SYNTHTS_TESTS_SUPPORT_HPP

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "synthts/core/rng.hpp"
#include "synthts/data/dataset.hpp"

namespace synthts::testing {

inline data::DatasetMeta make_meta(std::size_t channels, std::size_t length, int classes, double rate = 10.0) {
  data::DatasetMeta meta;
  meta.name = "fixture";
  for (std::size_t c = 0; c < channels; ++c) {
    meta.channels.push_back({"ch" + std::to_string(c), rate, data::ChannelKind::QuasiPeriodic, std::nullopt});
  }
  meta.rate = rate;
  meta.window_seconds = static_cast<double>(length) / rate;
  meta.n_classes = classes;
  return meta;
}

// N(0,1) windows; labels cycle through the classes.
inline data::WindowedDataset random_dataset(std::size_t n, std::size_t channels, std::size_t length, int classes,
                                            std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<float> values(n * channels * length);
  for (auto& v : values) v = static_cast<float>(scale * rng.normal());
  std::vector<int> labels(n);
  std::vector<std::string> subjects(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    subjects[i] = "S" + std::to_string(i % 5);
  }
  return data::WindowedDataset(make_meta(channels, length, classes), n, length, std::move(values), std::move(labels),
                               std::move(subjects));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("synthts_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace synthts::testing

#endif  // SYNTHTS_TESTS_SUPPORT_HPP
