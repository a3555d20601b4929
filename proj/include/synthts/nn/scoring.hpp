#ifndef SYNTHTS_NN_SCORING_HPP
#define SYNTHTS_NN_SCORING_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace synthts::nn {

// Binary AUROC from scores and 0/1 labels via average ranks, so tied
// scores count one half. Throws DataError without both classes.
double auroc(std::span<const double> scores, std::span<const int> labels);

// probs is row-major [n, classes]. Two classes use column 1 directly; more
// classes average one-vs-rest AUROC weighted by class support. Classes
// absent from labels carry zero weight and are skipped.
double auroc_multiclass(std::span<const double> probs, std::size_t classes, std::span<const int> labels);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Row-wise argmax of [n, classes]; the lowest index wins ties.
std::vector<int> argmax_rows(std::span<const double> probs, std::size_t classes);

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_SCORING_HPP
