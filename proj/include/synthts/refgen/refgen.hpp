#ifndef SYNTHTS_REFGEN_REFGEN_HPP
#define SYNTHTS_REFGEN_REFGEN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "synthts/data/dataset.hpp"

namespace synthts::refgen {

enum class DegradationKind { Identity, Jitter, AmplitudeScale, CircularShift, WhiteNoise, LabelPermute };

std::string to_string(DegradationKind kind);
DegradationKind degradation_kind_from_string(const std::string& text);

struct DegradationSpec {
  DegradationKind kind = DegradationKind::Identity;
  double sigma = 0.0;       // jitter standard deviation
  double alpha = 1.0;       // amplitude factor
  std::size_t shift = 0;    // circular shift in samples, taken modulo L
  std::uint64_t seed = 0;

  // Throws UsageError for sigma < 0 or alpha <= 0 (or non-finite values).
  void validate() const;
  // e.g. "jitter(sigma=0.5, seed=7)"; stored as provenance.
  std::string describe() const;
};

// Same N, C, L, subjects as `real`; labels too except for label-permute.
//   identity        values copied bit for bit
//   jitter          x + N(0, sigma^2) per sample
//   amplitude-scale alpha * x
//   circular-shift  each channel rotated right by shift mod L
//   white-noise     N(mean_c, std_c^2) per sample, channel statistics of real
//   label-permute   seeded shuffle of the labels, values untouched
// Provenance gains "degradation" and "source_fingerprint".
data::WindowedDataset generate(const data::WindowedDataset& real, const DegradationSpec& spec);

// Two-class separable task. Class 0: amplitude * sin(2 pi f0 t + phase) plus
// Gaussian noise; class 1: a second tone at f1 with the same noise, or white
// noise scaled to the class-0 variance when f1 is unset. Phase is drawn per
// window and channel.
struct ToyTaskSpec {
  double f0 = 2.0;
  std::optional<double> f1;
  double amplitude = 1.0;
  double noise_std = 0.5;  // amplitude / noise_std is the signal-to-noise ratio
  std::size_t per_class = 100;
  std::size_t length = 256;
  double rate = 100.0;
  std::size_t channels = 1;
  std::size_t subjects = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

// Raw (not z-scored) dataset, windows interleaved by class: 0, 1, 0, 1, ...
data::WindowedDataset make_toy_task(const ToyTaskSpec& spec);

}  // namespace synthts::refgen

#endif  // SYNTHTS_REFGEN_REFGEN_HPP
