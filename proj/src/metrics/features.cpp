#include "synthts/metrics/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "synthts/core/error.hpp"

namespace synthts::metrics {

FeatureVector extract_features(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n < 2) throw DataError("extract_features: window needs at least 2 samples");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double v : window) {
    if (!std::isfinite(v)) throw DataError("extract_features: non-finite sample");
    sum += v;
    sum_sq += v * v;
  }
  const auto count = static_cast<double>(n);
  const double mean = sum / count;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double v : window) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;

  std::vector<double> sorted(window.begin(), window.end());
  std::sort(sorted.begin(), sorted.end());
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  FeatureVector f;
  const double sd = std::sqrt(m2);
  f.values[0] = mean;
  f.values[1] = sd;
  f.values[2] = sorted.front();
  f.values[3] = sorted.back();
  f.values[4] = median;
  f.values[5] = std::sqrt(sum_sq / count);
  // A spread this small relative to the level is rounding noise, not shape.
  const bool flat = m2 == 0.0 || m2 <= 1e-24 * mean * mean;
  f.values[6] = flat ? 0.0 : m3 / (m2 * sd);
  f.values[7] = flat ? 0.0 : m4 / (m2 * m2) - 3.0;
  return f;
}

FeatureVector extract_features(std::span<const float> window) {
  std::vector<double> copy(window.begin(), window.end());
  return extract_features(copy);
}

}  // namespace synthts::metrics
