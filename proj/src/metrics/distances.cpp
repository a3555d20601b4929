#include "synthts/metrics/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "synthts/core/error.hpp"

namespace synthts::metrics {

namespace {

void require_same_length(std::span<const double> u, std::span<const double> v, const char* what) {
  if (u.size() != v.size()) {
    std::ostringstream os;
    os << what << ": length mismatch (" << u.size() << " vs " << v.size() << ")";
    throw DataError(os.str());
  }
}

template <typename T>
double dtw_impl(std::span<const T> x, std::span<const T> y, std::optional<std::size_t> band_radius) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  if (n == 0 || m == 0) throw DataError("dtw_distance: empty sequence");
  const std::size_t diff = n > m ? n - m : m - n;
  if (band_radius && *band_radius < diff) {
    std::ostringstream os;
    os << "dtw_distance: band radius " << *band_radius << " admits no path for lengths " << n << " and " << m;
    throw DataError(os.str());
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t radius = band_radius.value_or(std::max(n, m));
  std::vector<double> prev(m, inf), curr(m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > radius ? i - radius : 0;
    const std::size_t hi = std::min(m - 1, i + radius);
    std::fill(curr.begin(), curr.end(), inf);
    const double xi = static_cast<double>(x[i]);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = std::abs(xi - static_cast<double>(y[j]));
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, curr[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      curr[j] = cost + best;
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

// 1 - <a, b> for the unit vectors a = (u - cu) / su and b = (v - cv) / sv,
// evaluated as ||a - b||^2 / 2 so identical inputs give exactly 0.
double unit_gap(std::span<const double> u, std::span<const double> v, double cu, double cv, double su, double sv) {
  double gap = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = (u[i] - cu) / su - (v[i] - cv) / sv;
    gap += d * d;
  }
  return std::clamp(0.5 * gap, 0.0, 2.0);
}

}  // namespace

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "cosine_distance");
  double nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return unit_gap(u, v, 0.0, 0.0, std::sqrt(nu), std::sqrt(nv));
}

double correlation_distance(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "correlation_distance");
  if (u.size() < 2) throw DataError("correlation_distance: vectors need at least 2 entries");
  const auto n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double vu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    vu += (u[i] - mu) * (u[i] - mu);
    vv += (v[i] - mv) * (v[i] - mv);
  }
  if (vu == 0.0 || vv == 0.0) return 1.0;
  return unit_gap(u, v, mu, mv, std::sqrt(vu), std::sqrt(vv));
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "euclidean_distance");
  double ss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

double dtw_distance(std::span<const double> x, std::span<const double> y, std::optional<std::size_t> band_radius) {
  return dtw_impl(x, y, band_radius);
}

double dtw_distance(std::span<const float> x, std::span<const float> y, std::optional<std::size_t> band_radius) {
  return dtw_impl(x, y, band_radius);
}

}  // namespace synthts::metrics
