#ifndef SYNTHTS_METRICS_FEATURES_HPP
#define SYNTHTS_METRICS_FEATURES_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace synthts::metrics {

// Fixed-order statistical summary of one window: mean, population standard
// deviation, min, max, median, RMS, skewness and excess kurtosis. Skewness
// and kurtosis are 0 when the standard deviation is 0.
struct FeatureVector {
  static constexpr std::size_t kSize = 8;
  std::array<double, kSize> values{};

  double mean() const { return values[0]; }
  double stddev() const { return values[1]; }
  double min() const { return values[2]; }
  double max() const { return values[3]; }
  double median() const { return values[4]; }
  double rms() const { return values[5]; }
  double skewness() const { return values[6]; }
  double kurtosis() const { return values[7]; }

  static constexpr std::array<std::string_view, kSize> names = {"mean", "std",  "min",  "max",
                                                                 "median", "rms", "skew", "kurtosis"};
};

// Throws DataError for fewer than 2 samples or non-finite values.
FeatureVector extract_features(std::span<const double> window);
FeatureVector extract_features(std::span<const float> window);

}  // namespace synthts::metrics

#endif  // SYNTHTS_METRICS_FEATURES_HPP
