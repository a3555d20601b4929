#include "synthts/data/normalize.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "synthts/core/error.hpp"

namespace synthts::data {

Normalization fit_zscore(const WindowedDataset& dataset, std::span<const std::size_t> reference) {
  std::vector<std::size_t> all;
  if (reference.empty()) {
    all.resize(dataset.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    reference = all;
  }
  const auto channels = dataset.channels();
  Normalization stats;
  stats.state = NormalizationState::ZScored;
  stats.mean.assign(channels, 0.0);
  stats.stddev.assign(channels, 1.0);
  stats.degenerate.assign(channels, false);
  const auto count = static_cast<double>(reference.size() * dataset.length());
  for (std::size_t c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (const auto i : reference) {
      for (const float v : dataset.channel(i, c)) sum += v;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto i : reference) {
      for (const float v : dataset.channel(i, c)) ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / count);
    stats.mean[c] = mean;
    if (sd > 0.0) {
      stats.stddev[c] = sd;
    } else {
      stats.degenerate[c] = true;
    }
  }
  return stats;
}

WindowedDataset apply_normalization(const WindowedDataset& dataset, const Normalization& stats) {
  if (dataset.meta().normalization.state != NormalizationState::Raw) {
    throw DataError("dataset '" + dataset.meta().name + "' is already normalized");
  }
  if (stats.state != NormalizationState::ZScored) return dataset;
  const auto channels = dataset.channels();
  if (stats.mean.size() != channels || stats.stddev.size() != channels) {
    throw DataError("normalization statistics cover a different channel count");
  }
  std::vector<float> values(dataset.values().begin(), dataset.values().end());
  const auto len = dataset.length();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      float* row = values.data() + (i * channels + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        row[t] = static_cast<float>((static_cast<double>(row[t]) - stats.mean[c]) / stats.stddev[c]);
      }
    }
  }
  auto meta = dataset.meta();
  meta.normalization = stats;
  return WindowedDataset(std::move(meta), dataset.size(), len, std::move(values),
                         std::vector<int>(dataset.labels().begin(), dataset.labels().end()), dataset.subjects());
}

WindowedDataset normalize(const WindowedDataset& dataset, NormalizationScheme scheme,
                          std::span<const std::size_t> reference) {
  if (scheme == NormalizationScheme::None) return dataset;
  return apply_normalization(dataset, fit_zscore(dataset, reference));
}

}  // namespace synthts::data
