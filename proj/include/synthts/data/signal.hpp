#ifndef SYNTHTS_DATA_SIGNAL_HPP
#define SYNTHTS_DATA_SIGNAL_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace synthts::data {

// One second-order IIR section, normalized so a0 = 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};  // a1, a2
};

// Digital Butterworth low-pass as cascaded sections (bilinear transform with
// frequency prewarping). Odd orders end with a first-order section stored as
// a biquad with b2 = a2 = 0.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double rate_hz);

// Single forward pass, initial state at steady state for the first sample.
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x);

// Forward-backward (zero phase) filtering with odd-reflection padding and
// steady-state initial conditions.
std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x);

// Zero-phase 4th-order Butterworth low-pass. Throws DataError unless
// 0 < cutoff < rate/2.
std::vector<double> lowpass(std::span<const double> signal, double rate, double cutoff);

// Rate conversion. Output length is round(n * to_rate / from_rate). Equal
// rates return an exact copy. Downsampling first applies a zero-phase
// 8th-order Butterworth anti-alias filter at 0.45 x the target Nyquist;
// both directions then sample the signal at the output instants by linear
// interpolation (which is plain decimation for integer factors).
std::vector<double> resample(std::span<const double> signal, double from_rate, double to_rate);

// Non-overlapping windows of round(rate * window_seconds) samples starting at
// the first sample; the trailing partial window is dropped. Throws DataError
// when the signal is shorter than one window.
std::vector<std::vector<double>> segment(std::span<const double> signal, double rate, double window_seconds);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_SIGNAL_HPP
