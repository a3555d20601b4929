#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "support.hpp"
#include "synthts/core/error.hpp"
#include "synthts/distribution/entropy.hpp"
#include "synthts/distribution/mmd.hpp"
#include "synthts/distribution/tsne.hpp"

using namespace synthts;
using namespace synthts::distribution;

namespace {

using Windows = std::vector<std::vector<float>>;

Windows random_windows(Rng& rng, std::size_t n, std::size_t len, double shift = 0.0) {
  Windows w(n, std::vector<float>(len));
  for (auto& row : w) {
    for (auto& v : row) v = static_cast<float>(shift + rng.normal());
  }
  return w;
}

std::vector<std::span<const float>> spans(const Windows& w) { return {w.begin(), w.end()}; }

std::vector<std::vector<double>> as_double(const Windows& w) {
  std::vector<std::vector<double>> out;
  for (const auto& row : w) out.emplace_back(row.begin(), row.end());
  return out;
}

double silhouette(const std::vector<std::array<double, 2>>& pts, const std::vector<int>& ids, int k) {
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> sum(std::size_t(k), 0.0);
    std::vector<int> count(std::size_t(k), 0);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      sum[std::size_t(ids[j])] += std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
      count[std::size_t(ids[j])]++;
    }
    const double a = sum[std::size_t(ids[i])] / count[std::size_t(ids[i])];
    double b = INFINITY;
    for (int c = 0; c < k; ++c) {
      if (c != ids[i]) b = std::min(b, sum[std::size_t(c)] / count[std::size_t(c)]);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / double(pts.size());
}

}  // namespace

TEST_CASE("mmd of two single points") {
  const Windows a{{0.0f}}, b{{1.0f}};
  const auto r = mmd(spans(a), spans(b), {.bandwidth = 1.0});
  CHECK(r.value == doctest::Approx(2.0 - 2.0 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(0.7869).epsilon(1e-4));
}

TEST_CASE("mmd matches the double-loop oracle") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_windows(rng, 10 + rng.below(20), 16);
    const auto b = random_windows(rng, 10 + rng.below(20), 16, 0.3 * (t % 4));
    const auto fast = mmd(spans(a), spans(b));
    const double slow = oracle::naive_mmd(as_double(a), as_double(b), fast.bandwidth.sigma);
    CHECK(std::abs(fast.value - slow) <= 1e-10);
  }
}

TEST_CASE("mmd identity, symmetry and bounds") {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_windows(rng, 5 + rng.below(15), 8);
    CHECK(mmd(spans(a), spans(a)).value <= 1e-9);
    const auto b = random_windows(rng, 5 + rng.below(15), 8, 2.0 * rng.uniform());
    const double ab = mmd(spans(a), spans(b)).value, ba = mmd(spans(b), spans(a)).value;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab <= 2.0);
  }
}

TEST_CASE("median bandwidth") {
  const Windows a{{0.0f, 0.0f}}, b{{3.0f, 4.0f}};
  CHECK(median_bandwidth(spans(a), spans(b)).sigma == doctest::Approx(5.0 / std::sqrt(2.0)));

  Rng rng(3);
  const auto x = random_windows(rng, 15, 6), y = random_windows(rng, 12, 6, 1.0);
  const double s = median_bandwidth(spans(x), spans(y)).sigma;
  // Oracle: median over all pairwise distances of the union.
  auto all = as_double(x);
  for (auto& row : as_double(y)) all.push_back(row);
  std::vector<double> d;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      double ss = 0;
      for (std::size_t k = 0; k < 6; ++k) ss += (all[i][k] - all[j][k]) * (all[i][k] - all[j][k]);
      d.push_back(std::sqrt(ss));
    }
  }
  std::sort(d.begin(), d.end());
  const double med = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  CHECK(s == doctest::Approx(med / std::sqrt(2.0)).epsilon(1e-6));

  Windows xs = x, ys = y;
  for (auto* w : {&xs, &ys}) {
    for (auto& row : *w) {
      for (auto& v : row) v *= 4.0f;
    }
  }
  CHECK(median_bandwidth(spans(xs), spans(ys)).sigma == doctest::Approx(4.0 * s).epsilon(1e-6));

  const auto big = random_windows(rng, 300, 4);
  CHECK(median_bandwidth(spans(big), spans(big), 50, 9).sigma == median_bandwidth(spans(big), spans(big), 50, 9).sigma);

  const Windows same{{1.0f, 1.0f}, {1.0f, 1.0f}};
  const auto fb = median_bandwidth(spans(same), spans(same));
  CHECK(fb.fallback);
  CHECK(fb.sigma == 1.0);
}

TEST_CASE("mmd grows along a jitter ladder") {
  const auto real = testing::random_dataset(60, 1, 64, 1, 5);
  std::vector<double> values;
  for (double sigma : {0.0, 0.1, 0.5, 1.0}) {
    Rng rng(77);
    std::vector<float> v(real.values().begin(), real.values().end());
    for (auto& x : v) x = static_cast<float>(x + sigma * rng.normal());
    const auto synth = real.with_values(std::move(v));
    values.push_back(*evaluate_mmd(real, synth, 0).class_average);
  }
  CHECK(values[0] <= 1e-9);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] >= values[i - 1]);
}

TEST_CASE("per-class and pooled mmd") {
  const auto real = testing::random_dataset(40, 2, 16, 2, 1);
  const auto synth = testing::random_dataset(30, 2, 16, 2, 2);
  const auto res = evaluate_mmd(real, synth, 1);
  REQUIRE(res.per_class.size() == 2);
  CHECK(*res.class_average == doctest::Approx((*res.per_class[0] + *res.per_class[1]) / 2));
  CHECK(res.pooled.has_value());
  const auto same = evaluate_mmd(real, real, 0);
  CHECK(*same.class_average <= 1e-9);
}

TEST_CASE("spectral entropy conventions") {
  std::vector<double> tone(64), flat(64, 3.0);
  for (std::size_t t = 0; t < tone.size(); ++t) tone[t] = std::sin(2 * std::numbers::pi * 5.0 * double(t) / 64.0);
  CHECK(spectral_entropy(tone) < 1e-9);
  CHECK(spectral_entropy(flat) == 0.0);
  // Unit impulse: flat power over all 32 non-DC bins.
  std::vector<double> impulse(64, 0.0);
  impulse[0] = 1.0;
  CHECK(spectral_entropy(impulse) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(spectral_entropy(std::vector<double>{1, 2, 3}), DataError);
  CHECK_THROWS_AS(spectral_entropy(std::vector<double>{1, 2, NAN, 4}), DataError);
}

TEST_CASE("spectral entropy matches a direct DFT and is amplitude invariant") {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    std::vector<double> x(4 + rng.below(120));
    for (auto& v : x) v = rng.normal() + 0.5 * std::sin(double(&v - x.data()));
    const double h = spectral_entropy(x);
    CHECK(h == doctest::Approx(oracle::dft_entropy(x)).epsilon(1e-9));
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(double(x.size() / 2)) + 1e-12);
    for (double c : {-2.0, 0.01, 1e3}) {
      std::vector<double> y(x);
      for (auto& v : y) v *= c;
      CHECK(spectral_entropy(y) == doctest::Approx(h).epsilon(1e-9));
    }
  }
}

TEST_CASE("entropy gap of noise against tones") {
  const std::size_t L = 1000, n = 40;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    Windows tones(n, std::vector<float>(L)), noise(n, std::vector<float>(L));
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 1 + double(rng.below(40));
      for (std::size_t t = 0; t < L; ++t) {
        tones[i][t] = static_cast<float>(std::sin(2 * std::numbers::pi * f * double(t) / double(L)));
        noise[i][t] = static_cast<float>(rng.normal());
      }
    }
    const EntropyConfig mean_cfg{EntropyAggregation::Mean};
    const double gap = std::abs(aggregate_entropy(spans(noise), mean_cfg) - aggregate_entropy(spans(tones), mean_cfg));
    const double bound = std::log2(double(L) / 2 - 1);
    CHECK(std::abs(gap - bound) <= 0.1 * bound);
  }
}

TEST_CASE("sum aggregation doubles under duplication") {
  Rng rng(8);
  const auto w = random_windows(rng, 10, 32);
  auto doubled = w;
  doubled.insert(doubled.end(), w.begin(), w.end());
  const EntropyConfig sum_cfg{};
  CHECK(aggregate_entropy(spans(doubled), sum_cfg) == doctest::Approx(2 * aggregate_entropy(spans(w), sum_cfg)));
  const auto ds = testing::random_dataset(20, 1, 32, 2, 3);
  CHECK(*entropy_gap(ds, ds, 0).class_average == 0.0);
}

TEST_CASE("perplexity calibration hits the target entropy") {
  Rng rng(2);
  std::vector<double> d(60);
  for (auto& v : d) v = 10 * rng.uniform();
  const std::size_t self = 7;
  d[self] = 0;
  for (double perp : {5.0, 15.0, 30.0}) {
    const auto p = calibrate_row(d, self, perp);
    double sum = 0, h = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      sum += p[j];
      if (p[j] > 0) h -= p[j] * std::log(p[j]);
    }
    CHECK(p[self] == 0.0);
    CHECK(sum == doctest::Approx(1.0));
    CHECK(std::exp(h) == doctest::Approx(perp).epsilon(1e-3));
  }
}

TEST_CASE("t-SNE separates three clusters") {
  Rng rng(5);
  std::vector<std::vector<double>> pts;
  std::vector<int> ids;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> p(5);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = (k == std::size_t(c) ? 10.0 : 0.0) + 0.1 * rng.normal();
      pts.push_back(p);
      ids.push_back(c);
    }
  }
  EmbeddingConfig cfg;
  cfg.seed = 1;
  const auto emb = tsne(pts, cfg);
  REQUIRE(emb.coords.size() == 150);
  for (const auto& c : emb.coords) {
    CHECK(std::isfinite(c[0]));
    CHECK(std::isfinite(c[1]));
  }
  CHECK(silhouette(emb.coords, ids, 3) > 0.5);
  REQUIRE(emb.kl_trace.size() == 1000);
  for (std::size_t i = emb.kl_trace.size() - 100; i < emb.kl_trace.size(); ++i) {
    CHECK(emb.kl_trace[i] <= emb.kl_trace[i - 1] + 1e-12);
  }
  CHECK(tsne(pts, cfg).coords == emb.coords);
}

TEST_CASE("t-SNE perplexity precondition") {
  std::vector<std::vector<double>> pts(90, std::vector<double>(2, 0.0));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i][0] = double(i);
  CHECK_THROWS_AS(tsne(pts, {}), UsageError);
}

namespace {

double opposite_neighbor_fraction(const std::vector<EmbeddedPoint>& pts) {
  std::size_t opposite = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = INFINITY;
    std::size_t arg = i;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      if (d < best) best = d, arg = j;
    }
    opposite += pts[arg].source != pts[i].source;
  }
  return double(opposite) / double(pts.size());
}

}  // namespace

// Exact duplicates receive identical affinities and stay coincident in the
// embedding, so each point's nearest neighbor is its own copy. Kept as a
// non-gating check; see the independent-draw variant below.
TEST_CASE("embedding an identical copy interleaves real and synthetic" * doctest::may_fail()) {
  const auto real = testing::random_dataset(200, 1, 16, 1, 10);
  for (std::uint64_t seed : {1, 2, 3}) {
    EmbedRequest req;
    req.config.seed = seed;
    const auto pts = embed_class(real, real, req);
    REQUIRE(pts.size() == 400);
    const double frac = opposite_neighbor_fraction(pts);
    CHECK(frac >= 0.35);
    CHECK(frac <= 0.65);
  }
}

TEST_CASE("embedding a same-distribution sample interleaves real and synthetic") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto real = testing::random_dataset(200, 1, 16, 1, 10 + seed);
    const auto synth = testing::random_dataset(200, 1, 16, 1, 100 + seed);
    EmbedRequest req;
    req.config.seed = seed;
    const double frac = opposite_neighbor_fraction(embed_class(real, synth, req));
    CHECK(frac >= 0.35);
    CHECK(frac <= 0.65);
  }
}

TEST_CASE("embedding csv layout") {
  testing::TempDir dir("embed");
  const std::vector<EmbeddedPoint> pts{{1.5, -2.0, EmbedSource::Real, 0, 3}, {0.0, 1.0, EmbedSource::Synthetic, 0, 1}};
  write_embedding_csv(pts, dir / "e.csv");
  std::ifstream in(dir / "e.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x,y,source,class_id,window_index");
  CHECK(row.find(",real,0,3") != std::string::npos);
  write_embedding_svg(pts, dir / "e.svg", "t");
  CHECK(std::filesystem::file_size(dir / "e.svg") > 0);
}
