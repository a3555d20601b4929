#ifndef SYNTHTS_EVAL_QUALITY_HPP
#define SYNTHTS_EVAL_QUALITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "synthts/distribution/entropy.hpp"
#include "synthts/distribution/mmd.hpp"
#include "synthts/eval/report.hpp"
#include "synthts/metrics/pairwise.hpp"

namespace synthts::eval {

enum class QualityMetric { CD, CrD, L2, DTWD, MMD, En, DS };

std::string to_string(QualityMetric m);
QualityMetric quality_metric_from_string(const std::string& text);
const std::vector<QualityMetric>& all_quality_metrics();

struct QualityOptions {
  std::vector<QualityMetric> metrics = all_quality_metrics();
  metrics::PairPlan plan = metrics::PairPlan::capped(20000, 0);
  std::optional<std::size_t> band_radius;
  distribution::KernelConfig kernel;
  distribution::EntropyConfig entropy;
  ProtocolConfig ds;
  DsMode ds_mode = DsMode::PerClass;
  std::size_t workers = 1;
};

// Every selected metric on every modality, in table order (modalities by
// channel, metrics as listed). Warnings name classes missing on either side.
std::vector<QualityEntry> evaluate_quality(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                                           const QualityOptions& options, std::vector<std::string>& warnings);

}  // namespace synthts::eval

#endif  // SYNTHTS_EVAL_QUALITY_HPP
