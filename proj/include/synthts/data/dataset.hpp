#ifndef SYNTHTS_DATA_DATASET_HPP
#define SYNTHTS_DATA_DATASET_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace synthts::data {

enum class ChannelKind { QuasiPeriodic, SlowVarying };

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& text);

struct ChannelSpec {
  std::string name;
  double native_rate = 0.0;  // samples per second
  ChannelKind kind = ChannelKind::QuasiPeriodic;
  std::optional<double> lowpass_cutoff;  // Hz, applied after resampling

  // Throws DataError when native_rate <= 0 or the cutoff is not below the
  // Nyquist frequency of `filter_rate`, the rate the low-pass runs at.
  void validate(double filter_rate) const;

  bool operator==(const ChannelSpec&) const = default;
};

enum class NormalizationState { Raw, ZScored };

std::string to_string(NormalizationState state);
NormalizationState normalization_state_from_string(const std::string& text);

// Per-channel statistics recorded by z-scoring. A degenerate channel had zero
// standard deviation over the reference partition and was only centered.
struct Normalization {
  NormalizationState state = NormalizationState::Raw;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> degenerate;

  bool operator==(const Normalization&) const = default;
};

struct DatasetMeta {
  std::string name;
  std::vector<ChannelSpec> channels;
  double rate = 0.0;            // common samples per second after resampling
  double window_seconds = 0.0;  // duration of one window
  int n_classes = 0;
  std::vector<std::string> class_names;  // empty or n_classes entries
  Normalization normalization;
  // Free-form provenance, e.g. the degradation that produced a reference
  // synthetic set. Serialized as a JSON object when non-empty.
  std::map<std::string, std::string> provenance;

  bool operator==(const DatasetMeta&) const = default;
};

// N fixed-length multi-channel windows stored row-major as [N, C, L] 32-bit
// floats with one class label and one subject id per window. Immutable once
// constructed; the constructor validates every invariant.
class WindowedDataset {
 public:
  WindowedDataset(DatasetMeta meta, std::size_t n, std::size_t length, std::vector<float> values,
                  std::vector<int> labels, std::vector<std::string> subjects);

  const DatasetMeta& meta() const { return meta_; }
  std::size_t size() const { return n_; }
  std::size_t channels() const { return meta_.channels.size(); }
  std::size_t length() const { return length_; }
  int n_classes() const { return meta_.n_classes; }

  std::span<const float> values() const { return values_; }
  std::span<const int> labels() const { return labels_; }
  const std::vector<std::string>& subjects() const { return subjects_; }

  // All channels of window i, [C, L].
  std::span<const float> window(std::size_t i) const;
  // One channel of window i, length L.
  std::span<const float> channel(std::size_t i, std::size_t c) const;

  // Number of windows per class id, size n_classes.
  std::vector<std::size_t> class_counts() const;
  // Indices of windows carrying class id `label`, ascending.
  std::vector<std::size_t> indices_of_class(int label) const;

  // Copy with replaced values / labels (same shape); the result is validated
  // like any other dataset.
  WindowedDataset with_values(std::vector<float> values) const;
  WindowedDataset with_labels(std::vector<int> labels) const;
  WindowedDataset with_meta(DatasetMeta meta) const;
  // Sub-dataset of the listed windows, in the listed order.
  WindowedDataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const WindowedDataset&) const = default;

 private:
  DatasetMeta meta_;
  std::size_t n_ = 0;
  std::size_t length_ = 0;
  std::vector<float> values_;
  std::vector<int> labels_;
  std::vector<std::string> subjects_;
};

// Samples per window implied by rate and duration; throws DataError unless
// rate * window_seconds is an integer.
std::size_t window_length(double rate, double window_seconds);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_DATASET_HPP
