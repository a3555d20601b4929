#ifndef SYNTHTS_DISTRIBUTION_ENTROPY_HPP
#define SYNTHTS_DISTRIBUTION_ENTROPY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthts/data/dataset.hpp"

namespace synthts::distribution {

enum class EntropyAggregation { Sum, Mean };

std::string to_string(EntropyAggregation agg);
EntropyAggregation entropy_aggregation_from_string(const std::string& text);

struct EntropyConfig {
  EntropyAggregation aggregation = EntropyAggregation::Sum;
};

// Power spectrum |X_k|^2 for k = 1 .. L/2 (DC excluded) of the full-window
// periodogram.
std::vector<double> periodogram(std::span<const double> window);

// Shannon entropy in bits of the normalized L/2-bin power spectrum; 0 for a
// window with no power outside DC. Requires L >= 4 and finite samples.
double spectral_entropy(std::span<const double> window);
double spectral_entropy(std::span<const float> window);

// Sum or mean of per-window entropies.
double aggregate_entropy(std::span<const std::span<const float>> windows, const EntropyConfig& cfg);

struct EntropyGapResult {
  std::vector<std::optional<double>> per_class;
  std::optional<double> class_average;
  std::vector<std::optional<double>> real_aggregate;
  std::vector<std::optional<double>> synth_aggregate;
};

// |aggregate(real) - aggregate(synth)| per class on one channel, then the
// unweighted class average.
EntropyGapResult entropy_gap(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                             std::size_t channel, const EntropyConfig& cfg = {});

}  // namespace synthts::distribution

#endif  // SYNTHTS_DISTRIBUTION_ENTROPY_HPP
