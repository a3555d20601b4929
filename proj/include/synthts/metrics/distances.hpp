#ifndef SYNTHTS_METRICS_DISTANCES_HPP
#define SYNTHTS_METRICS_DISTANCES_HPP

#include <cstddef>
#include <optional>
#include <span>

namespace synthts::metrics {

// 1 - cos(u, v), in [0, 2]; 1 when either vector has zero norm.
double cosine_distance(std::span<const double> u, std::span<const double> v);

// 1 - Pearson(u, v), in [0, 2]; 1 when either vector has zero variance.
// Throws DataError on length mismatch or length < 2.
double correlation_distance(std::span<const double> u, std::span<const double> v);

// ||u - v||_2. Throws DataError on length mismatch.
double euclidean_distance(std::span<const double> u, std::span<const double> v);

// Minimum cumulative |x_i - y_j| over monotone alignments with steps
// (1,0), (0,1), (1,1) from (0,0) to (n-1,m-1). With band_radius r only cells
// with |i - j| <= r are admissible (Sakoe-Chiba); a band that admits no path
// throws DataError.
double dtw_distance(std::span<const double> x, std::span<const double> y,
                    std::optional<std::size_t> band_radius = std::nullopt);
double dtw_distance(std::span<const float> x, std::span<const float> y,
                    std::optional<std::size_t> band_radius = std::nullopt);

}  // namespace synthts::metrics

#endif  // SYNTHTS_METRICS_DISTANCES_HPP
