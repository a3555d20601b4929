#include "synthts/nn/scoring.hpp"

#include <algorithm>
#include <numeric>

#include "synthts/core/error.hpp"

namespace synthts::nn {

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("auroc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("auroc: binary labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw DataError("auroc: labels contain a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based) average ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg;
    }
    i = j + 1;
  }
  const auto p = static_cast<double>(positives);
  const auto q = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double auroc_multiclass(std::span<const double> probs, std::size_t classes, std::span<const int> labels) {
  if (classes < 2 || probs.size() != labels.size() * classes) throw DataError("auroc: probability matrix shape mismatch");
  const std::size_t n = labels.size();
  std::vector<double> column(n);
  if (classes == 2) {
    for (std::size_t i = 0; i < n; ++i) column[i] = probs[i * 2 + 1];
    return auroc(column, labels);
  }
  std::vector<std::size_t> support(classes, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) throw DataError("auroc: label out of range");
    ++support[static_cast<std::size_t>(y)];
  }
  double total = 0.0;
  std::vector<int> binary(n);
  for (std::size_t c = 0; c < classes; ++c) {
    if (support[c] == 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = probs[i * classes + c];
      binary[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
    }
    total += static_cast<double>(support[c]) * auroc(column, binary);
  }
  return total / static_cast<double>(n);
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw DataError("accuracy: predictions and labels differ in length");
  if (labels.empty()) throw DataError("accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::vector<int> argmax_rows(std::span<const double> probs, std::size_t classes) {
  std::vector<int> out(probs.size() / classes);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = probs.subspan(i * classes, classes);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace synthts::nn
