#ifndef SYNTHTS_EVAL_PROTOCOLS_HPP
#define SYNTHTS_EVAL_PROTOCOLS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthts/data/dataset.hpp"
#include "synthts/eval/split.hpp"
#include "synthts/nn/train.hpp"

namespace synthts::eval {

// One finished (protocol, classifier, seed) training run, for the run ledger.
struct RunRecord {
  std::string protocol;
  nn::Architecture classifier = nn::Architecture::FCN;
  std::uint64_t seed = 0;
  std::optional<int> class_id;
  double value = 0.0;  // accuracy (DS) or AUROC
  double seconds = 0.0;
};

struct ProtocolConfig {
  std::vector<nn::Architecture> classifiers = nn::all_architectures();
  std::vector<std::uint64_t> seeds{1, 2, 3};
  nn::TrainingConfig training;  // loss kind and seed are set per run
  nn::ModelSizes sizes;
  SplitSpec split;  // seed is set per run
  std::size_t workers = 1;
  // Called from worker threads; must be thread-safe.
  std::function<void(const RunRecord&)> on_run;

  void validate() const;
};

// Windows at `indices` as a training tensor; `channel` selects one modality,
// nullopt keeps every channel.
nn::LabeledTensor to_labeled(const data::WindowedDataset& dataset, std::span<const std::size_t> indices,
                             std::optional<std::size_t> channel = std::nullopt);

void require_compatible(const data::WindowedDataset& real, const data::WindowedDataset& synth);

// ---- discriminative score ----

enum class DsMode { PerClass, Pooled };

struct DsRun {
  std::optional<int> class_id;  // nullopt in pooled mode
  nn::Architecture classifier = nn::Architecture::FCN;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double score = 0.0;  // |0.5 - accuracy|
};

struct DsResult {
  std::vector<std::optional<double>> per_class;  // absent when a class is too small on either side
  std::optional<double> class_average;
  std::optional<double> pooled;
  std::vector<DsRun> runs;
  std::vector<std::string> warnings;
};

// Real windows are labeled 0 and synthetic windows 1. Per class (or once,
// pooled), real and synthetic sets are each split with the same seed, the
// corresponding partitions concatenated, and every classifier trained with
// the binary recipe. Scores average over classifiers and seeds, then classes.
DsResult discriminative_score(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                              std::optional<std::size_t> channel, const ProtocolConfig& cfg,
                              DsMode mode = DsMode::PerClass);

// ---- utility ----

enum class Protocol { TRTR, TSTR, DaBalance, DaDouble, DaBalanceDouble };
enum class DaPolicy { Balance, Double, BalanceDouble };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& text);
std::string to_string(DaPolicy p);
Protocol protocol_of(DaPolicy p);

struct UtilityRun {
  Protocol protocol = Protocol::TRTR;
  nn::Architecture classifier = nn::Architecture::FCN;
  std::uint64_t seed = 0;
  double auroc = 0.0;
  std::optional<double> delta;  // auroc - TRTR auroc for the same classifier and seed
  std::vector<std::size_t> train_counts;
  std::vector<std::size_t> val_counts;
  std::optional<double> synthetic_ratio;  // DA only: synthetic added / real, over train and val
  std::size_t best_epoch = 0;
};

struct UtilityResult {
  std::vector<UtilityRun> runs;
};

UtilityResult run_trtr(const data::WindowedDataset& real, const ProtocolConfig& cfg);

// Train/val on the synthetic set's own partitions (same seed), test on the
// real test partition. Every synthetic train/val class count must be at
// least the real one.
UtilityResult run_tstr(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                       const ProtocolConfig& cfg, const UtilityResult& trtr);

// Real train/val augmented from the whole synthetic set, tested on real.
UtilityResult run_da(const data::WindowedDataset& real, const data::WindowedDataset& synth, DaPolicy policy,
                     const ProtocolConfig& cfg, const UtilityResult& trtr);

// Synthetic samples per class needed to satisfy the policy.
std::vector<std::size_t> da_requirement(std::span<const std::size_t> counts, DaPolicy policy);

struct HybridSets {
  nn::LabeledTensor train;
  nn::LabeledTensor val;
  std::vector<std::size_t> train_counts;
  std::vector<std::size_t> val_counts;
  std::vector<std::size_t> synthetic_train;  // indices into the pool
  std::vector<std::size_t> synthetic_val;
  double synthetic_ratio = 0.0;
};

// Draws without replacement from the pool, per class, seeded. Throws
// DataError listing required vs available per class on shortfall.
HybridSets apply_da_policy(const nn::LabeledTensor& real_train, const nn::LabeledTensor& real_val,
                           const nn::LabeledTensor& pool, std::size_t classes, DaPolicy policy, std::uint64_t seed);

// Mean over seeds of one (protocol, classifier) pair.
struct UtilitySummary {
  Protocol protocol = Protocol::TRTR;
  nn::Architecture classifier = nn::Architecture::FCN;
  double auroc = 0.0;
  std::optional<double> delta;
};
std::vector<UtilitySummary> summarize(const UtilityResult& result);

}  // namespace synthts::eval

#endif  // SYNTHTS_EVAL_PROTOCOLS_HPP
