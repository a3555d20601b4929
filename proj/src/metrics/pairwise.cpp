#include "synthts/metrics/pairwise.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include "synthts/core/error.hpp"
#include "synthts/core/parallel.hpp"
#include "synthts/core/rng.hpp"
#include "synthts/metrics/distances.hpp"
#include "synthts/metrics/features.hpp"

namespace synthts::metrics {

std::string to_string(SampleMetric metric) {
  switch (metric) {
    case SampleMetric::CD:
      return "CD";
    case SampleMetric::CrD:
      return "CrD";
    case SampleMetric::L2:
      return "L2";
    case SampleMetric::DTWD:
      return "DTWD";
  }
  return "?";
}

SampleMetric sample_metric_from_string(const std::string& text) {
  std::string t;
  for (const char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "cd") return SampleMetric::CD;
  if (t == "crd") return SampleMetric::CrD;
  if (t == "l2") return SampleMetric::L2;
  if (t == "dtwd" || t == "dtw") return SampleMetric::DTWD;
  throw UsageError("unknown sample metric '" + text + "'");
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> PairPlan::pairs(std::size_t n_real, std::size_t n_synth) const {
  const std::uint64_t grid = static_cast<std::uint64_t>(n_real) * n_synth;
  std::vector<std::uint64_t> cells;
  if (mode == Mode::AllPairs || max_pairs >= grid) {
    cells.resize(grid);
    for (std::uint64_t c = 0; c < grid; ++c) cells[c] = c;
  } else {
    // Floyd's sampling: exactly max_pairs distinct cells, uniform.
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(max_pairs * 2);
    for (std::uint64_t j = grid - max_pairs; j < grid; ++j) {
      const auto t = rng.below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    cells.assign(chosen.begin(), chosen.end());
    std::sort(cells.begin(), cells.end());
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(cells.size());
  for (const auto c : cells) {
    out.emplace_back(static_cast<std::uint32_t>(c / n_synth), static_cast<std::uint32_t>(c % n_synth));
  }
  return out;
}

std::string PairPlan::describe() const {
  if (mode == Mode::AllPairs) return "all-pairs";
  std::ostringstream os;
  os << "capped(" << max_pairs << ", seed=" << seed << ")";
  return os.str();
}

PairwiseMean mean_pairwise(SampleMetric metric, std::span<const std::span<const float>> real,
                           std::span<const std::span<const float>> synth, const PairPlan& plan,
                           const SampleMetricOptions& options) {
  if (real.empty() || synth.empty()) throw DataError("mean_pairwise: empty window set");
  const auto pairs = plan.pairs(real.size(), synth.size());
  std::vector<double> distances(pairs.size());

  if (metric == SampleMetric::DTWD) {
    parallel_for(pairs.size(), options.workers, [&](std::size_t k) {
      distances[k] = dtw_distance(real[pairs[k].first], synth[pairs[k].second], options.band_radius);
    });
  } else {
    std::vector<FeatureVector> fr(real.size()), fs(synth.size());
    for (std::size_t i = 0; i < real.size(); ++i) fr[i] = extract_features(real[i]);
    for (std::size_t i = 0; i < synth.size(); ++i) fs[i] = extract_features(synth[i]);
    parallel_for(pairs.size(), options.workers, [&](std::size_t k) {
      const auto& u = fr[pairs[k].first].values;
      const auto& v = fs[pairs[k].second].values;
      switch (metric) {
        case SampleMetric::CD:
          distances[k] = cosine_distance(u, v);
          break;
        case SampleMetric::CrD:
          distances[k] = correlation_distance(u, v);
          break;
        default:
          distances[k] = euclidean_distance(u, v);
          break;
      }
    });
  }
  double sum = 0.0;
  for (const double d : distances) sum += d;
  return {sum / static_cast<double>(pairs.size()), pairs.size()};
}

SampleMetricResult evaluate_sample_metric(SampleMetric metric, const data::WindowedDataset& real,
                                          const data::WindowedDataset& synth, std::size_t channel,
                                          const PairPlan& plan, const SampleMetricOptions& options) {
  if (channel >= real.channels() || channel >= synth.channels()) throw DataError("channel index out of range");
  SampleMetricResult result;
  result.metric = metric;
  const int classes = real.n_classes();
  result.per_class.assign(static_cast<std::size_t>(classes), std::nullopt);
  double total = 0.0;
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::span<const float>> r, s;
    for (const auto i : real.indices_of_class(c)) r.push_back(real.channel(i, channel));
    if (c < synth.n_classes()) {
      for (const auto i : synth.indices_of_class(c)) s.push_back(synth.channel(i, channel));
    }
    if (r.empty() || s.empty()) continue;
    PairPlan class_plan = plan;
    class_plan.seed = derive_seed(plan.seed, {static_cast<std::uint64_t>(c)});
    const auto m = mean_pairwise(metric, r, s, class_plan, options);
    result.per_class[static_cast<std::size_t>(c)] = m.value;
    result.pairs += m.pairs;
    total += m.value;
    ++present;
  }
  if (present > 0) result.class_average = total / present;
  return result;
}

}  // namespace synthts::metrics
