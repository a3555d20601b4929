#ifndef SYNTHTS_DATA_PIPELINE_HPP
#define SYNTHTS_DATA_PIPELINE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "synthts/data/dataset.hpp"
#include "synthts/data/manifest.hpp"
#include "synthts/data/normalize.hpp"

namespace synthts::data {

// Raw channels of one subject at their native rates, ordered as the
// manifest's channel list.
struct RawRecording {
  std::string subject;
  std::vector<std::vector<double>> signals;
  std::vector<double> rates;
};

// Reads every (subject, channel) file named by the manifest. Subjects keep
// their first-appearance order.
std::vector<RawRecording> ingest(const DatasetManifest& manifest, std::size_t workers = 1);

struct PipelineOptions {
  NormalizationScheme normalization = NormalizationScheme::ZScore;
  std::size_t workers = 1;
};

// ingest -> resample -> low-pass -> per-phase segmentation -> labeling ->
// normalization. Phase windows start at the phase start; z-score statistics
// are fit over the whole prepared dataset.
WindowedDataset prepare_dataset(const DatasetManifest& manifest, const PipelineOptions& options);

// Class counts plus majority/minority ratios.
struct DatasetSummary {
  std::string name;
  std::size_t subjects = 0;
  int n_classes = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> class_counts;
  // Majority count divided by each other class count, ascending; "2.9" style
  // one-decimal rendering joined by '/'.
  std::string ratio_text;
};

DatasetSummary summarize(const WindowedDataset& dataset);
std::string format_summary(const DatasetSummary& summary);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_PIPELINE_HPP
