#include "synthts/eval/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "synthts/core/error.hpp"
#include "synthts/core/rng.hpp"

namespace synthts::eval {

namespace {

constexpr std::int64_t kScale = 1'000'000;

std::array<std::int64_t, 3> weights(const SplitSpec& spec) {
  return {std::llround(spec.train * kScale), std::llround(spec.val * kScale), std::llround(spec.test * kScale)};
}

void sort_split(Split& s) {
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
}

}  // namespace

void SplitSpec::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("split fractions must lie in [0, 1]");
  }
  const auto w = weights(*this);
  if (w[0] + w[1] + w[2] != kScale) throw UsageError("split fractions must sum to 1");
  if (w[0] == 0 || w[1] == 0 || w[2] == 0) throw UsageError("every split fraction must be positive");
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  const auto w = weights(spec);
  std::array<std::size_t, 3> counts{};
  std::array<std::int64_t, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    const std::int64_t num = static_cast<std::int64_t>(n) * w[p];
    counts[p] = static_cast<std::size_t>(num / kScale);
    rem[p] = num % kScale;
    assigned += counts[p];
  }
  // Tie order: val, test, train.
  std::array<std::size_t, 3> order{1, 2, 0};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  if (n >= 5) {
    for (std::size_t p = 0; p < 3; ++p) {
      if (counts[p] == 0) {
        const auto donor = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        --counts[donor];
        ++counts[p];
      }
    }
  }
  return counts;
}

Split stratified_split(std::span<const int> labels, const SplitSpec& spec) {
  spec.validate();
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.empty()) throw DataError("split: dataset is empty");
  Split out;
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < 5) {
      throw DataError("split: class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                      " samples; at least 5 are needed");
    }
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(cls)}));
    rng.shuffle(idx.begin(), idx.end());
    const auto counts = split_counts(idx.size(), spec);
    auto it = idx.begin();
    out.train.insert(out.train.end(), it, it + static_cast<std::ptrdiff_t>(counts[0]));
    it += static_cast<std::ptrdiff_t>(counts[0]);
    out.val.insert(out.val.end(), it, it + static_cast<std::ptrdiff_t>(counts[1]));
    it += static_cast<std::ptrdiff_t>(counts[1]);
    out.test.insert(out.test.end(), it, idx.end());
  }
  sort_split(out);
  return out;
}

Split stratified_split(const data::WindowedDataset& dataset, const SplitSpec& spec) {
  if (!spec.subject_disjoint) return stratified_split(dataset.labels(), spec);
  spec.validate();
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_subject[dataset.subjects()[i]].push_back(i);
  if (by_subject.size() < 3) throw DataError("subject-disjoint split needs at least 3 subjects");
  std::vector<std::string> subjects;
  for (const auto& [s, _] : by_subject) subjects.push_back(s);
  Rng rng(derive_seed(spec.seed, {0x5b}));
  rng.shuffle(subjects.begin(), subjects.end());
  // Subjects fill train, then val, then test, by window count; each
  // partition receives at least one subject.
  const auto n = static_cast<double>(dataset.size());
  Split out;
  std::size_t filled = 0, k = 0;
  auto take = [&](std::vector<std::size_t>& dst) {
    const auto& idx = by_subject[subjects[k++]];
    dst.insert(dst.end(), idx.begin(), idx.end());
    filled += idx.size();
  };
  take(out.train);
  while (k + 2 < subjects.size() && static_cast<double>(filled) < spec.train * n) take(out.train);
  take(out.val);
  while (k + 1 < subjects.size() && static_cast<double>(filled) < (spec.train + spec.val) * n) take(out.val);
  while (k < subjects.size()) take(out.test);
  sort_split(out);
  for (const auto* part : {&out.train, &out.val, &out.test}) {
    std::vector<bool> seen(static_cast<std::size_t>(dataset.n_classes()), false);
    for (std::size_t i : *part) seen[static_cast<std::size_t>(dataset.labels()[i])] = true;
    for (std::size_t c = 0; c < seen.size(); ++c) {
      if (!seen[c] && !dataset.indices_of_class(static_cast<int>(c)).empty()) {
        throw DataError("subject-disjoint split: class " + std::to_string(c) + " is missing from a partition");
      }
    }
  }
  return out;
}

}  // namespace synthts::eval
