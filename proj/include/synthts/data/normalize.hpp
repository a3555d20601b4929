#ifndef SYNTHTS_DATA_NORMALIZE_HPP
#define SYNTHTS_DATA_NORMALIZE_HPP

#include <cstddef>
#include <span>

#include "synthts/data/dataset.hpp"

namespace synthts::data {

enum class NormalizationScheme { None, ZScore };

// Per-channel mean and population standard deviation over the reference
// windows (all windows when `reference` is empty). Zero-variance channels are
// marked degenerate and get stddev 1 so they are only centered.
Normalization fit_zscore(const WindowedDataset& dataset, std::span<const std::size_t> reference = {});

// Applies recorded statistics: (x - mean) / stddev per channel. Used to put
// validation, test and synthetic data on the scale of the reference
// partition. Throws DataError if the dataset is already z-scored or the
// channel count differs.
WindowedDataset apply_normalization(const WindowedDataset& dataset, const Normalization& stats);

// scheme None returns the dataset unchanged; ZScore fits on `reference` and
// applies.
WindowedDataset normalize(const WindowedDataset& dataset, NormalizationScheme scheme,
                          std::span<const std::size_t> reference = {});

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_NORMALIZE_HPP
