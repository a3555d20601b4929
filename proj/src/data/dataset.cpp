#include "synthts/data/dataset.hpp"

#include <cmath>
#include <sstream>

#include "synthts/core/error.hpp"

namespace synthts::data {

std::string to_string(ChannelKind kind) {
  return kind == ChannelKind::QuasiPeriodic ? "quasi-periodic" : "slow-varying";
}

ChannelKind channel_kind_from_string(const std::string& text) {
  if (text == "quasi-periodic") return ChannelKind::QuasiPeriodic;
  if (text == "slow-varying") return ChannelKind::SlowVarying;
  throw DataError("unknown channel kind '" + text + "'");
}

void ChannelSpec::validate(double filter_rate) const {
  if (name.empty()) throw DataError("channel with empty name");
  if (!(native_rate > 0.0) || !std::isfinite(native_rate)) {
    throw DataError("channel '" + name + "': native_rate must be > 0");
  }
  if (lowpass_cutoff && !(*lowpass_cutoff > 0.0 && *lowpass_cutoff < filter_rate / 2.0)) {
    std::ostringstream os;
    os << "channel '" << name << "': lowpass_cutoff " << *lowpass_cutoff << " Hz must lie in (0, "
       << filter_rate / 2.0 << ")";
    throw DataError(os.str());
  }
}

std::string to_string(NormalizationState state) {
  return state == NormalizationState::Raw ? "raw" : "z-scored";
}

NormalizationState normalization_state_from_string(const std::string& text) {
  if (text == "raw") return NormalizationState::Raw;
  if (text == "z-scored") return NormalizationState::ZScored;
  throw DataError("unknown normalization state '" + text + "'");
}

std::size_t window_length(double rate, double window_seconds) {
  if (!(rate > 0.0) || !(window_seconds > 0.0)) {
    throw DataError("rate and window_seconds must be > 0");
  }
  const double exact = rate * window_seconds;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 1.0) {
    std::ostringstream os;
    os << "rate " << rate << " x window " << window_seconds << " s is not a whole number of samples";
    throw DataError(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

WindowedDataset::WindowedDataset(DatasetMeta meta, std::size_t n, std::size_t length, std::vector<float> values,
                                 std::vector<int> labels, std::vector<std::string> subjects)
    : meta_(std::move(meta)),
      n_(n),
      length_(length),
      values_(std::move(values)),
      labels_(std::move(labels)),
      subjects_(std::move(subjects)) {
  if (n_ == 0) throw DataError("dataset '" + meta_.name + "' has no windows");
  if (meta_.channels.empty()) throw DataError("dataset '" + meta_.name + "' has no channels");
  if (window_length(meta_.rate, meta_.window_seconds) != length_) {
    std::ostringstream os;
    os << "dataset '" << meta_.name << "': window length " << length_ << " != rate " << meta_.rate
       << " x " << meta_.window_seconds << " s";
    throw DataError(os.str());
  }
  if (values_.size() != n_ * channels() * length_) {
    std::ostringstream os;
    os << "dataset '" << meta_.name << "': " << values_.size() << " values for shape [" << n_ << ", "
       << channels() << ", " << length_ << "]";
    throw DataError(os.str());
  }
  if (labels_.size() != n_ || subjects_.size() != n_) {
    throw DataError("dataset '" + meta_.name + "': labels/subjects do not match window count");
  }
  if (meta_.n_classes <= 0) throw DataError("dataset '" + meta_.name + "': n_classes must be > 0");
  if (!meta_.class_names.empty() && meta_.class_names.size() != static_cast<std::size_t>(meta_.n_classes)) {
    throw DataError("dataset '" + meta_.name + "': class_names size differs from n_classes");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (labels_[i] < 0 || labels_[i] >= meta_.n_classes) {
      std::ostringstream os;
      os << "dataset '" << meta_.name << "': window " << i << " has label " << labels_[i] << " outside [0, "
         << meta_.n_classes << ")";
      throw DataError(os.str());
    }
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream os;
      os << "dataset '" << meta_.name << "': non-finite value in window " << i / (channels() * length_);
      throw DataError(os.str());
    }
  }
  const auto& norm = meta_.normalization;
  if (norm.state == NormalizationState::ZScored &&
      (norm.mean.size() != channels() || norm.stddev.size() != channels() || norm.degenerate.size() != channels())) {
    throw DataError("dataset '" + meta_.name + "': normalization statistics do not cover every channel");
  }
}

std::span<const float> WindowedDataset::window(std::size_t i) const {
  const auto stride = channels() * length_;
  return std::span<const float>(values_).subspan(i * stride, stride);
}

std::span<const float> WindowedDataset::channel(std::size_t i, std::size_t c) const {
  return std::span<const float>(values_).subspan((i * channels() + c) * length_, length_);
}

std::vector<std::size_t> WindowedDataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(meta_.n_classes), 0);
  for (const int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

std::vector<std::size_t> WindowedDataset::indices_of_class(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_; ++i) {
    if (labels_[i] == label) out.push_back(i);
  }
  return out;
}

WindowedDataset WindowedDataset::with_values(std::vector<float> values) const {
  return WindowedDataset(meta_, n_, length_, std::move(values), labels_, subjects_);
}

WindowedDataset WindowedDataset::with_labels(std::vector<int> labels) const {
  return WindowedDataset(meta_, n_, length_, values_, std::move(labels), subjects_);
}

WindowedDataset WindowedDataset::with_meta(DatasetMeta meta) const {
  return WindowedDataset(std::move(meta), n_, length_, values_, labels_, subjects_);
}

WindowedDataset WindowedDataset::subset(std::span<const std::size_t> indices) const {
  const auto stride = channels() * length_;
  std::vector<float> values;
  values.reserve(indices.size() * stride);
  std::vector<int> labels;
  std::vector<std::string> subjects;
  for (const auto i : indices) {
    if (i >= n_) throw DataError("subset index out of range");
    const auto w = window(i);
    values.insert(values.end(), w.begin(), w.end());
    labels.push_back(labels_[i]);
    subjects.push_back(subjects_[i]);
  }
  return WindowedDataset(meta_, indices.size(), length_, std::move(values), std::move(labels), std::move(subjects));
}

}  // namespace synthts::data
