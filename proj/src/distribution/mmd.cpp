#include "synthts/distribution/mmd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthts/core/error.hpp"
#include "synthts/core/rng.hpp"

namespace synthts::distribution {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_matrix(WindowSet set) {
  const auto len = set.front().size();
  Matrix m(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].size() != len) throw DataError("mmd: windows differ in length");
    for (std::size_t t = 0; t < len; ++t) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = set[i][t];
  }
  return m;
}

// Mean of exp(-||a_i - b_j||^2 / (2 sigma^2)) over all (i, j).
double mean_kernel(const Matrix& a, const Matrix& b, double sigma) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  const Matrix cross = a * b.transpose();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < cross.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < cross.cols(); ++j) {
      const double d2 = std::max(0.0, na(i) + nb(j) - 2.0 * cross(i, j));
      row += std::exp(-d2 * scale);
    }
    sum += row;
  }
  return sum / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double squared_distance(std::span<const float> x, std::span<const float> y) {
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = static_cast<double>(x[t]) - static_cast<double>(y[t]);
    s += d * d;
  }
  return s;
}

}  // namespace

Bandwidth median_bandwidth(WindowSet real, WindowSet synth, std::size_t cap, std::uint64_t seed) {
  std::vector<std::span<const float>> points(real.begin(), real.end());
  points.insert(points.end(), synth.begin(), synth.end());
  if (points.size() > cap && cap >= 2) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    order.resize(cap);
    std::sort(order.begin(), order.end());
    std::vector<std::span<const float>> sub;
    for (const auto i : order) sub.push_back(points[i]);
    points = std::move(sub);
  }
  std::vector<double> distances;
  distances.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) distances.push_back(std::sqrt(squared_distance(points[i], points[j])));
  }
  if (distances.empty()) return {1.0, true};
  const auto mid = distances.size() / 2;
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid), distances.end());
  double median = distances[mid];
  if (distances.size() % 2 == 0) {
    const double lower = *std::max_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) return {1.0, true};
  return {median / std::sqrt(2.0), false};
}

MmdValue mmd(WindowSet real, WindowSet synth, const KernelConfig& kernel) {
  if (real.empty() || synth.empty()) throw DataError("mmd: empty window set");
  if (real.front().size() != synth.front().size()) throw DataError("mmd: real and synthetic window lengths differ");
  MmdValue out;
  if (kernel.bandwidth) {
    if (!(*kernel.bandwidth > 0.0)) throw UsageError("mmd: bandwidth must be > 0");
    out.bandwidth = {*kernel.bandwidth, false};
  } else {
    out.bandwidth = median_bandwidth(real, synth, kernel.median_cap, kernel.seed);
  }
  const Matrix a = to_matrix(real);
  const Matrix b = to_matrix(synth);
  const double sigma = out.bandwidth.sigma;
  const double value = mean_kernel(a, a, sigma) + mean_kernel(b, b, sigma) - 2.0 * mean_kernel(a, b, sigma);
  out.value = std::clamp(value, 0.0, 2.0);
  return out;
}

MmdResult evaluate_mmd(const data::WindowedDataset& real, const data::WindowedDataset& synth, std::size_t channel,
                       const KernelConfig& kernel) {
  if (channel >= real.channels() || channel >= synth.channels()) throw DataError("channel index out of range");
  MmdResult result;
  const int classes = real.n_classes();
  result.per_class.assign(static_cast<std::size_t>(classes), std::nullopt);
  double total = 0.0;
  int present = 0;
  std::vector<std::span<const float>> all_r, all_s;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::span<const float>> r, s;
    for (const auto i : real.indices_of_class(c)) r.push_back(real.channel(i, channel));
    if (c < synth.n_classes()) {
      for (const auto i : synth.indices_of_class(c)) s.push_back(synth.channel(i, channel));
    }
    if (r.empty() || s.empty()) continue;
    KernelConfig k = kernel;
    k.seed = derive_seed(kernel.seed, {static_cast<std::uint64_t>(c)});
    const auto v = mmd(r, s, k);
    result.per_class[static_cast<std::size_t>(c)] = v.value;
    result.bandwidths.push_back(v.bandwidth);
    total += v.value;
    ++present;
  }
  if (present > 0) result.class_average = total / present;
  for (std::size_t i = 0; i < real.size(); ++i) all_r.push_back(real.channel(i, channel));
  for (std::size_t i = 0; i < synth.size(); ++i) all_s.push_back(synth.channel(i, channel));
  result.pooled = mmd(all_r, all_s, kernel).value;
  return result;
}

}  // namespace synthts::distribution
