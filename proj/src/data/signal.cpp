#include "synthts/data/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "synthts/core/error.hpp"
#include "synthts/data/dataset.hpp"

namespace synthts::data {

namespace {

double dc_gain(const Biquad& s) {
  return (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]);
}

// Transposed direct form II over one section, in place.
void run_section(const Biquad& s, std::vector<double>& x) {
  if (x.empty()) return;
  const double g = dc_gain(s);
  const double x0 = x.front();
  double z1 = (g - s.b[0]) * x0;
  double z2 = (s.b[2] - s.a[1] * g) * x0;
  for (auto& v : x) {
    const double in = v;
    const double out = s.b[0] * in + z1;
    z1 = s.b[1] * in - s.a[0] * out + z2;
    z2 = s.b[2] * in - s.a[1] * out;
    v = out;
  }
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double rate_hz) {
  if (order < 1) throw DataError("butterworth order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < rate_hz / 2.0)) {
    std::ostringstream os;
    os << "low-pass cutoff " << cutoff_hz << " Hz must lie in (0, " << rate_hz / 2.0 << ") at rate " << rate_hz
       << " Hz";
    throw DataError(os.str());
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    const double zeta = std::sin(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order));
    const double a0 = 1.0 + 2.0 * zeta * k + k2;
    Biquad s;
    s.b = {k2 / a0, 2.0 * k2 / a0, k2 / a0};
    s.a = {(2.0 * k2 - 2.0) / a0, (1.0 - 2.0 * zeta * k + k2) / a0};
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double a0 = 1.0 + k;
    Biquad s;
    s.b = {k / a0, k / a0, 0.0};
    s.a = {(k - 1.0) / a0, 0.0};
    sections.push_back(s);
  }
  return sections;
}

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sections) run_section(s, y);
  return y;
}

std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n == 1) return {x[0]};
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * sections.size() + 1));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  for (const auto& s : sections) run_section(s, ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& s : sections) run_section(s, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

std::vector<double> lowpass(std::span<const double> signal, double rate, double cutoff) {
  const auto sections = butterworth_lowpass(4, cutoff, rate);
  return sosfiltfilt(sections, signal);
}

std::vector<double> resample(std::span<const double> signal, double from_rate, double to_rate) {
  if (!(from_rate > 0.0) || !(to_rate > 0.0)) throw DataError("resample: rates must be > 0");
  if (signal.empty()) throw DataError("resample: empty signal");
  if (from_rate == to_rate) return std::vector<double>(signal.begin(), signal.end());

  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(signal.size()) * to_rate / from_rate));
  if (n_out == 0) throw DataError("resample: output would be empty");

  std::vector<double> source;
  if (to_rate < from_rate) {
    const auto sections = butterworth_lowpass(8, 0.45 * to_rate / 2.0, from_rate);
    source = sosfiltfilt(sections, signal);
  } else {
    source.assign(signal.begin(), signal.end());
  }

  const double step = from_rate / to_rate;
  const std::size_t last = source.size() - 1;
  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto left = std::min(static_cast<std::size_t>(pos), last);
    const auto right = std::min(left + 1, last);
    const double frac = pos - static_cast<double>(left);
    out[i] = frac <= 0.0 || left == right ? source[left] : source[left] + frac * (source[right] - source[left]);
  }
  return out;
}

std::vector<std::vector<double>> segment(std::span<const double> signal, double rate, double window_seconds) {
  const std::size_t len = window_length(rate, window_seconds);
  if (signal.size() < len) {
    std::ostringstream os;
    os << "segment: " << signal.size() << " samples is shorter than one " << window_seconds << " s window ("
       << len << " samples)";
    throw DataError(os.str());
  }
  const std::size_t count = signal.size() / len;
  std::vector<std::vector<double>> windows;
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    const auto first = signal.begin() + static_cast<std::ptrdiff_t>(w * len);
    windows.emplace_back(first, first + static_cast<std::ptrdiff_t>(len));
  }
  return windows;
}

}  // namespace synthts::data
