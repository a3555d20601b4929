#ifndef SYNTHTS_DISTRIBUTION_TSNE_HPP
#define SYNTHTS_DISTRIBUTION_TSNE_HPP

#include <array>
#include <span>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synthts/data/dataset.hpp"

namespace synthts::distribution {

struct EmbeddingConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
};

struct Embedding {
  std::vector<std::array<double, 2>> coords;
  std::vector<double> kl_trace;  // KL(P || Q) after every iteration
};

// Exact O(N^2) t-SNE: Gaussian conditional affinities calibrated to the
// target perplexity by per-point bisection on the precision, symmetrized,
// Student-t low-dimensional affinities, gradient descent with momentum and
// per-coordinate gains. Initialized from the first two principal components.
// Throws UsageError when N < 3 * perplexity + 1.
Embedding tsne(const std::vector<std::vector<double>>& points, const EmbeddingConfig& cfg);

// Conditional distribution P(j | i) for one row of squared distances whose
// entropy matches log(perplexity); exposed for testing.
std::vector<double> calibrate_row(std::span<const double> squared_distances, std::size_t self, double perplexity);

enum class EmbedSource { Real, Synthetic };

struct EmbeddedPoint {
  double x = 0.0;
  double y = 0.0;
  EmbedSource source = EmbedSource::Real;
  int class_id = 0;
  std::size_t window_index = 0;  // index in the source dataset
};

struct EmbedRequest {
  std::size_t channel = 0;
  int class_id = 0;
  std::size_t cap_per_source = 1000;  // seeded uniform subsample above this
  EmbeddingConfig config;
};

// Embeds the real and synthetic windows of one (channel, class) pair
// together.
std::vector<EmbeddedPoint> embed_class(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                                       const EmbedRequest& request);

// Columns x,y,source,class_id,window_index.
void write_embedding_csv(const std::vector<EmbeddedPoint>& points, const std::filesystem::path& path);
void write_embedding_svg(const std::vector<EmbeddedPoint>& points, const std::filesystem::path& path,
                         const std::string& title);

}  // namespace synthts::distribution

#endif  // SYNTHTS_DISTRIBUTION_TSNE_HPP
