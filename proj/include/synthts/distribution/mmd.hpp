#ifndef SYNTHTS_DISTRIBUTION_MMD_HPP
#define SYNTHTS_DISTRIBUTION_MMD_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "synthts/data/dataset.hpp"

namespace synthts::distribution {

using WindowSet = std::span<const std::span<const float>>;

// Exponentiated-quadratic kernel k(x, y) = exp(-||x - y||^2 / (2 sigma^2)).
// With no fixed bandwidth sigma comes from the median heuristic over a
// seeded subsample of at most median_cap points.
struct KernelConfig {
  std::optional<double> bandwidth;
  std::size_t median_cap = 2000;
  std::uint64_t seed = 0;
};

struct Bandwidth {
  double sigma = 1.0;
  bool fallback = false;  // all sampled distances were 0; sigma forced to 1
};

// sigma = median pairwise Euclidean distance over the union / sqrt(2).
Bandwidth median_bandwidth(WindowSet real, WindowSet synth, std::size_t cap = 2000, std::uint64_t seed = 0);

struct MmdValue {
  double value = 0.0;
  Bandwidth bandwidth;
};

// Biased (V-statistic) squared MMD:
//   mean k(real, real) + mean k(synth, synth) - 2 mean k(real, synth),
// which lies in [0, 2] because 0 < k <= 1. Windows must share one length.
MmdValue mmd(WindowSet real, WindowSet synth, const KernelConfig& kernel = {});

struct MmdResult {
  std::vector<std::optional<double>> per_class;
  std::optional<double> class_average;
  std::optional<double> pooled;  // label-blind, all windows of both sets
  std::vector<Bandwidth> bandwidths;
};

// Per class (then unweighted class average) on one channel; `pooled`
// ignores labels entirely.
MmdResult evaluate_mmd(const data::WindowedDataset& real, const data::WindowedDataset& synth, std::size_t channel,
                       const KernelConfig& kernel = {});

}  // namespace synthts::distribution

#endif  // SYNTHTS_DISTRIBUTION_MMD_HPP
