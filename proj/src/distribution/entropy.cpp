#include "synthts/distribution/entropy.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "synthts/core/error.hpp"

namespace synthts::distribution {

namespace {

// FFTW planning is not thread-safe; plans are created once per length under
// a lock and then executed on caller-owned buffers.
fftw_plan plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  auto* in = fftw_alloc_real(n);
  auto* out = fftw_alloc_complex(n / 2 + 1);
  const auto plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(n, plan);
  return plan;
}

}  // namespace

std::string to_string(EntropyAggregation agg) { return agg == EntropyAggregation::Sum ? "sum" : "mean"; }

EntropyAggregation entropy_aggregation_from_string(const std::string& text) {
  if (text == "sum") return EntropyAggregation::Sum;
  if (text == "mean") return EntropyAggregation::Mean;
  throw UsageError("unknown entropy aggregation '" + text + "' (expected sum or mean)");
}

std::vector<double> periodogram(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n < 4) throw DataError("spectral entropy needs at least 4 samples");
  std::vector<double> in(window.begin(), window.end());
  for (const double v : in) {
    if (!std::isfinite(v)) throw DataError("spectral entropy: non-finite sample");
  }
  std::vector<fftw_complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan_for(n), in.data(), out.data());
  std::vector<double> power(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) power[k - 1] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  return power;
}

double spectral_entropy(std::span<const double> window) {
  const auto power = periodogram(window);
  double total = 0.0;
  for (const double p : power) total += p;
  // Leakage from a DC offset in floating point sits many orders below any
  // genuine spectral content.
  double dc = 0.0;
  for (const double v : window) dc += v;
  const double scale = std::max(dc * dc, 1.0) * 1e-24 * static_cast<double>(window.size());
  if (!(total > scale)) return 0.0;
  double h = 0.0;
  for (const double p : power) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log2(q);
  }
  return std::max(0.0, h);
}

double spectral_entropy(std::span<const float> window) {
  std::vector<double> copy(window.begin(), window.end());
  return spectral_entropy(copy);
}

double aggregate_entropy(std::span<const std::span<const float>> windows, const EntropyConfig& cfg) {
  double sum = 0.0;
  for (const auto& w : windows) sum += spectral_entropy(w);
  if (cfg.aggregation == EntropyAggregation::Mean && !windows.empty()) sum /= static_cast<double>(windows.size());
  return sum;
}

EntropyGapResult entropy_gap(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                             std::size_t channel, const EntropyConfig& cfg) {
  if (channel >= real.channels() || channel >= synth.channels()) throw DataError("channel index out of range");
  EntropyGapResult result;
  const auto classes = static_cast<std::size_t>(real.n_classes());
  result.per_class.assign(classes, std::nullopt);
  result.real_aggregate.assign(classes, std::nullopt);
  result.synth_aggregate.assign(classes, std::nullopt);
  double total = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::span<const float>> r, s;
    for (const auto i : real.indices_of_class(static_cast<int>(c))) r.push_back(real.channel(i, channel));
    if (c < static_cast<std::size_t>(synth.n_classes())) {
      for (const auto i : synth.indices_of_class(static_cast<int>(c))) s.push_back(synth.channel(i, channel));
    }
    if (r.empty() || s.empty()) continue;
    const double ar = aggregate_entropy(r, cfg);
    const double as = aggregate_entropy(s, cfg);
    result.real_aggregate[c] = ar;
    result.synth_aggregate[c] = as;
    result.per_class[c] = std::abs(ar - as);
    total += *result.per_class[c];
    ++present;
  }
  if (present > 0) result.class_average = total / present;
  return result;
}

}  // namespace synthts::distribution
