#include "synthts/refgen/refgen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "synthts/core/error.hpp"
#include "synthts/core/rng.hpp"
#include "synthts/data/canonical.hpp"

namespace synthts::refgen {

std::string to_string(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::Identity: return "identity";
    case DegradationKind::Jitter: return "jitter";
    case DegradationKind::AmplitudeScale: return "amplitude-scale";
    case DegradationKind::CircularShift: return "circular-shift";
    case DegradationKind::WhiteNoise: return "white-noise";
    case DegradationKind::LabelPermute: return "label-permute";
  }
  return "?";
}

DegradationKind degradation_kind_from_string(const std::string& text) {
  for (auto k : {DegradationKind::Identity, DegradationKind::Jitter, DegradationKind::AmplitudeScale,
                 DegradationKind::CircularShift, DegradationKind::WhiteNoise, DegradationKind::LabelPermute}) {
    if (to_string(k) == text) return k;
  }
  throw UsageError("unknown degradation kind '" + text +
                   "' (expected identity, jitter, amplitude-scale, circular-shift, white-noise or label-permute)");
}

void DegradationSpec::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) throw UsageError("jitter sigma must be finite and >= 0");
  if (!std::isfinite(alpha) || alpha <= 0.0) throw UsageError("amplitude-scale alpha must be finite and > 0");
}

std::string DegradationSpec::describe() const {
  char buf[128];
  switch (kind) {
    case DegradationKind::Jitter:
      std::snprintf(buf, sizeof buf, "jitter(sigma=%.17g, seed=%llu)", sigma, static_cast<unsigned long long>(seed));
      return buf;
    case DegradationKind::AmplitudeScale:
      std::snprintf(buf, sizeof buf, "amplitude-scale(alpha=%.17g)", alpha);
      return buf;
    case DegradationKind::CircularShift:
      return "circular-shift(k=" + std::to_string(shift) + ")";
    case DegradationKind::WhiteNoise:
    case DegradationKind::LabelPermute:
      return to_string(kind) + "(seed=" + std::to_string(seed) + ")";
    case DegradationKind::Identity:
      break;
  }
  return "identity";
}

data::WindowedDataset generate(const data::WindowedDataset& real, const DegradationSpec& spec) {
  spec.validate();
  const std::size_t N = real.size(), C = real.channels(), L = real.length();
  std::vector<float> values(real.values().begin(), real.values().end());
  std::vector<int> labels(real.labels().begin(), real.labels().end());
  switch (spec.kind) {
    case DegradationKind::Identity:
      break;
    case DegradationKind::Jitter:
      if (spec.sigma > 0.0) {
        for (std::size_t i = 0; i < N; ++i) {
          Rng rng(derive_seed(spec.seed, {i}));
          for (std::size_t j = i * C * L; j < (i + 1) * C * L; ++j) {
            values[j] = static_cast<float>(static_cast<double>(values[j]) + rng.normal(0.0, spec.sigma));
          }
        }
      }
      break;
    case DegradationKind::AmplitudeScale:
      for (auto& v : values) v = static_cast<float>(spec.alpha * static_cast<double>(v));
      break;
    case DegradationKind::CircularShift: {
      const std::size_t k = spec.shift % L;
      for (std::size_t r = 0; r < N * C; ++r) {
        auto* row = values.data() + r * L;
        std::rotate(row, row + (L - k) % L, row + L);
      }
      break;
    }
    case DegradationKind::WhiteNoise: {
      std::vector<double> mean(C, 0.0), sd(C, 0.0);
      for (std::size_t c = 0; c < C; ++c) {
        double s = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
          for (float v : real.channel(i, c)) s += v;
        }
        mean[c] = s / static_cast<double>(N * L);
        for (std::size_t i = 0; i < N; ++i) {
          for (float v : real.channel(i, c)) ss += (v - mean[c]) * (v - mean[c]);
        }
        sd[c] = std::sqrt(ss / static_cast<double>(N * L));
      }
      for (std::size_t i = 0; i < N; ++i) {
        Rng rng(derive_seed(spec.seed, {i}));
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t t = 0; t < L; ++t) {
            values[(i * C + c) * L + t] = static_cast<float>(rng.normal(mean[c], sd[c]));
          }
        }
      }
      break;
    }
    case DegradationKind::LabelPermute: {
      Rng rng(spec.seed);
      rng.shuffle(labels.begin(), labels.end());
      break;
    }
  }
  auto meta = real.meta();
  meta.provenance["degradation"] = spec.describe();
  meta.provenance["source_fingerprint"] = data::tensor_fingerprint(real);
  return data::WindowedDataset(std::move(meta), N, L, std::move(values), std::move(labels), real.subjects());
}

void ToyTaskSpec::validate() const {
  const double nyquist = rate / 2.0;
  if (!(rate > 0.0)) throw UsageError("toy task: rate must be > 0");
  if (!(f0 > 0.0 && f0 < nyquist)) throw UsageError("toy task: f0 must lie in (0, rate/2)");
  if (f1 && !(*f1 > 0.0 && *f1 < nyquist && *f1 != f0)) {
    throw UsageError("toy task: f1 must lie in (0, rate/2) and differ from f0");
  }
  if (!(amplitude > 0.0) || !(noise_std >= 0.0)) throw UsageError("toy task: amplitude > 0 and noise_std >= 0 required");
  if (per_class == 0 || length == 0 || channels == 0 || subjects == 0) {
    throw UsageError("toy task: counts must be positive");
  }
}

data::WindowedDataset make_toy_task(const ToyTaskSpec& spec) {
  spec.validate();
  const std::size_t N = 2 * spec.per_class, C = spec.channels, L = spec.length;
  const double noise_class_sd = std::sqrt(spec.amplitude * spec.amplitude / 2.0 + spec.noise_std * spec.noise_std);
  std::vector<float> values(N * C * L);
  std::vector<int> labels(N);
  std::vector<std::string> subjects(N);
  for (std::size_t i = 0; i < N; ++i) {
    const int y = static_cast<int>(i % 2);
    labels[i] = y;
    subjects[i] = "s" + std::to_string((i / 2) % spec.subjects);
    Rng rng(derive_seed(spec.seed, {i}));
    for (std::size_t c = 0; c < C; ++c) {
      float* row = values.data() + (i * C + c) * L;
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double f = y == 0 ? spec.f0 : spec.f1.value_or(0.0);
      for (std::size_t t = 0; t < L; ++t) {
        double v;
        if (y == 1 && !spec.f1) {
          v = rng.normal(0.0, noise_class_sd);
        } else {
          v = spec.amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / spec.rate + phase) +
              rng.normal(0.0, spec.noise_std);
        }
        row[t] = static_cast<float>(v);
      }
    }
  }
  data::DatasetMeta meta;
  meta.name = "toy";
  for (std::size_t c = 0; c < C; ++c) {
    meta.channels.push_back({"ch" + std::to_string(c), spec.rate, data::ChannelKind::QuasiPeriodic, std::nullopt});
  }
  meta.rate = spec.rate;
  meta.window_seconds = static_cast<double>(L) / spec.rate;
  meta.n_classes = 2;
  meta.class_names = {"tone", spec.f1 ? "tone2" : "noise"};
  return data::WindowedDataset(std::move(meta), N, L, std::move(values), std::move(labels), std::move(subjects));
}

}  // namespace synthts::refgen
