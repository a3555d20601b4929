#ifndef SYNTHTS_METRICS_PAIRWISE_HPP
#define SYNTHTS_METRICS_PAIRWISE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synthts/data/dataset.hpp"

namespace synthts::metrics {

enum class SampleMetric { CD, CrD, L2, DTWD };

std::string to_string(SampleMetric metric);
SampleMetric sample_metric_from_string(const std::string& text);

// Which (real, synthetic) index pairs to average over. Capped plans draw
// max_pairs cells uniformly without replacement from the n_real x n_synth
// grid; when the cap covers the grid every pair is used.
struct PairPlan {
  enum class Mode { AllPairs, Capped };
  Mode mode = Mode::AllPairs;
  std::size_t max_pairs = 20000;
  std::uint64_t seed = 0;

  static PairPlan all_pairs() { return {}; }
  static PairPlan capped(std::size_t max_pairs, std::uint64_t seed) { return {Mode::Capped, max_pairs, seed}; }

  // Pairs sorted by (real, synth). Fully determined by mode, cap and seed.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(std::size_t n_real, std::size_t n_synth) const;
  std::string describe() const;
};

struct SampleMetricOptions {
  std::optional<std::size_t> band_radius;  // DTWD only
  std::size_t workers = 1;
};

struct PairwiseMean {
  double value = 0.0;
  std::size_t pairs = 0;
};

// Mean metric over the planned pairs of two window sets from one modality
// and one class. Feature metrics compare feature vectors, DTWD the raw
// windows. Throws DataError if either set is empty.
PairwiseMean mean_pairwise(SampleMetric metric, std::span<const std::span<const float>> real,
                           std::span<const std::span<const float>> synth, const PairPlan& plan,
                           const SampleMetricOptions& options = {});

struct SampleMetricResult {
  SampleMetric metric = SampleMetric::CD;
  // One entry per class id; nullopt when either dataset lacks the class.
  std::vector<std::optional<double>> per_class;
  // Unweighted mean over classes present in both datasets.
  std::optional<double> class_average;
  std::size_t pairs = 0;
};

// Per-class mean_pairwise on channel `channel` followed by the unweighted
// class average. Capped plans use a class-specific seed derived from
// plan.seed.
SampleMetricResult evaluate_sample_metric(SampleMetric metric, const data::WindowedDataset& real,
                                          const data::WindowedDataset& synth, std::size_t channel,
                                          const PairPlan& plan, const SampleMetricOptions& options = {});

}  // namespace synthts::metrics

#endif  // SYNTHTS_METRICS_PAIRWISE_HPP
