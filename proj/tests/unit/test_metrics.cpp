#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "support.hpp"
#include "synthts/core/error.hpp"
#include "synthts/metrics/distances.hpp"
#include "synthts/metrics/features.hpp"
#include "synthts/metrics/pairwise.hpp"

using namespace synthts;
using namespace synthts::metrics;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

std::vector<std::span<const float>> windows_of(const data::WindowedDataset& ds) {
  std::vector<std::span<const float>> out;
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(ds.channel(i, 0));
  return out;
}

// All sequences of the given length over {0..3}.
std::vector<std::vector<double>> sequences(int length) {
  std::vector<std::vector<double>> out;
  int total = 1;
  for (int i = 0; i < length; ++i) total *= 4;
  for (int code = 0; code < total; ++code) {
    std::vector<double> s;
    for (int i = 0, c = code; i < length; ++i, c /= 4) s.push_back(c % 4);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("features of [1,2,3,4]") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto f = extract_features(x);
  CHECK(f.mean() == doctest::Approx(2.5));
  CHECK(f.stddev() == doctest::Approx(1.1180).epsilon(1e-4));
  CHECK(f.min() == 1);
  CHECK(f.max() == 4);
  CHECK(f.median() == 2.5);
  CHECK(f.rms() == doctest::Approx(2.7386).epsilon(1e-4));
  CHECK(std::abs(f.skewness()) < 1e-12);
  CHECK(f.kurtosis() == doctest::Approx(-1.36));
}

TEST_CASE("features match the moment oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_vector(rng, 2 + rng.below(50), 1.0 + trial % 7);
    for (auto& v : x) v = v * v * (v > 0 ? 1 : -0.3);  // skewed
    const auto f = extract_features(x);
    const auto o = oracle::moments(x);
    const double expect[] = {o.mean, o.std, o.min, o.max, o.median, o.rms, o.skew, o.kurt};
    for (std::size_t k = 0; k < FeatureVector::kSize; ++k) {
      CHECK(f.values[k] == doctest::Approx(expect[k]).epsilon(1e-9).scale(1.0));
    }
    CHECK(f.min() <= f.median());
    CHECK(f.median() <= f.max());
  }
}

TEST_CASE("constant window features") {
  const std::vector<double> x{5, 5, 5};
  const auto f = extract_features(x);
  CHECK(f.stddev() == 0);
  CHECK(f.skewness() == 0);
  CHECK(f.kurtosis() == 0);
  CHECK(f.rms() == doctest::Approx(5));
  CHECK_THROWS_AS(extract_features(std::vector<double>{1.0}), DataError);
  CHECK_THROWS_AS(extract_features(std::vector<double>{1.0, NAN}), DataError);
}

TEST_CASE("feature symmetry and scale equivariance") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = random_vector(rng, 31);
    for (auto& v : x) v = std::exp(v);
    const auto f = extract_features(x);
    std::vector<double> neg(x), scaled(x);
    for (auto& v : neg) v = -v;
    const double c = 0.1 + 5 * rng.uniform();
    for (auto& v : scaled) v *= c;
    const auto g = extract_features(neg);
    const auto h = extract_features(scaled);
    CHECK(g.mean() == doctest::Approx(-f.mean()));
    CHECK(g.median() == doctest::Approx(-f.median()));
    CHECK(g.min() == doctest::Approx(-f.max()));
    CHECK(g.max() == doctest::Approx(-f.min()));
    CHECK(g.stddev() == doctest::Approx(f.stddev()));
    CHECK(g.rms() == doctest::Approx(f.rms()));
    CHECK(g.skewness() == doctest::Approx(-f.skewness()));
    CHECK(g.kurtosis() == doctest::Approx(f.kurtosis()));
    for (std::size_t k = 0; k < 6; ++k) CHECK(h.values[k] == doctest::Approx(c * f.values[k]));
    CHECK(h.skewness() == doctest::Approx(f.skewness()));
    CHECK(h.kurtosis() == doctest::Approx(f.kurtosis()));
  }
}

TEST_CASE("cosine distance") {
  const std::vector<double> u{1, 1}, e0{1, 0}, e1{0, 1}, z{0, 0};
  CHECK(cosine_distance(u, u) == doctest::Approx(0.0));
  CHECK(cosine_distance(e0, e1) == doctest::Approx(1.0));
  CHECK(cosine_distance(u, e0) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(cosine_distance(u, z) == 1.0);
  CHECK(cosine_distance(e0, std::vector<double>{-3, 0}) == doctest::Approx(2.0));
}

TEST_CASE("correlation distance") {
  const std::vector<double> u{1, 2, 3};
  CHECK(correlation_distance(u, std::vector<double>{3, 2, 1}) == doctest::Approx(2.0));
  CHECK(correlation_distance(u, std::vector<double>{5, 7, 9}) == doctest::Approx(0.0).scale(1.0));
  CHECK(correlation_distance(std::vector<double>{4, 4, 4}, u) == 1.0);
  CHECK_THROWS_AS(correlation_distance(u, std::vector<double>{1, 2}), DataError);
}

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == 5.0);
  CHECK_THROWS_AS(euclidean_distance(std::vector<double>{0}, std::vector<double>{3, 4}), DataError);
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_vector(rng, 8), b = random_vector(rng, 8), c = random_vector(rng, 8);
    CHECK(euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12);
  }
}

TEST_CASE("distance bounds over random pairs") {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_vector(rng, 8, 10), b = random_vector(rng, 8, 10);
    const double cd = cosine_distance(a, b), crd = correlation_distance(a, b);
    CHECK(cd >= 0.0);
    CHECK(cd <= 2.0);
    CHECK(crd >= 0.0);
    CHECK(crd <= 2.0);
  }
}

TEST_CASE("dtw worked examples") {
  CHECK(dtw_distance(std::vector<double>{0, 1, 2}, std::vector<double>{0, 2}) == 1.0);
  CHECK(dtw_distance(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 1, 2}) == 0.0);
  CHECK(dtw_distance(std::vector<double>{1, 5, 2}, std::vector<double>{1, 5, 2}) == 0.0);
  CHECK_THROWS_AS(dtw_distance(std::vector<double>{}, std::vector<double>{1}), DataError);
}

TEST_CASE("dtw equals full path enumeration up to length 4") {
  for (int n = 1; n <= 4; ++n) {
    for (int m = 1; m <= 4; ++m) {
      const auto paths = oracle::all_paths(n, m);
      for (const auto& x : sequences(n)) {
        for (const auto& y : sequences(m)) {
          REQUIRE(dtw_distance(x, y) == oracle::path_min(paths, x, y));
        }
      }
    }
  }
}

TEST_CASE("dominance pruning keeps the path minimum") {
  Rng rng(4);
  for (int n = 1; n <= 6; ++n) {
    for (int m = 1; m <= 6; ++m) {
      const auto all = oracle::all_paths(n, m);
      const auto kept = oracle::undominated(all);
      CHECK(kept.size() <= all.size());
      for (int t = 0; t < 50; ++t) {
        const auto x = random_vector(rng, std::size_t(n)), y = random_vector(rng, std::size_t(m));
        CHECK(oracle::path_min(kept, x, y) == oracle::path_min(all, x, y));
      }
    }
  }
}

TEST_CASE("dtw symmetry, identity and band monotonicity") {
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    const auto x = random_vector(rng, 5 + rng.below(30));
    const auto y = random_vector(rng, 5 + rng.below(30));
    const double free = dtw_distance(x, y);
    CHECK(free == doctest::Approx(dtw_distance(y, x)));
    CHECK(dtw_distance(x, x) == 0.0);
    const std::size_t need = x.size() > y.size() ? x.size() - y.size() : y.size() - x.size();
    double last = INFINITY;
    for (std::size_t r = need; r <= need + 6; ++r) {
      const double banded = dtw_distance(x, y, r);
      CHECK(banded >= free - 1e-12);
      CHECK(banded <= last + 1e-12);
      last = banded;
    }
  }
}

TEST_CASE("dtw band matches restricted enumeration") {
  Rng rng(7);
  for (int n = 2; n <= 6; ++n) {
    for (int m = 2; m <= 6; ++m) {
      const auto all = oracle::all_paths(n, m);
      for (int r = std::abs(n - m); r <= 3; ++r) {
        std::vector<oracle::Path> inside;
        for (const auto& p : all) {
          if (std::all_of(p.begin(), p.end(), [&](int c) { return std::abs(c / m - c % m) <= r; })) inside.push_back(p);
        }
        for (int t = 0; t < 20; ++t) {
          const auto x = random_vector(rng, std::size_t(n)), y = random_vector(rng, std::size_t(m));
          CHECK(dtw_distance(x, y, std::size_t(r)) == doctest::Approx(oracle::path_min(inside, x, y)).epsilon(1e-12));
        }
      }
    }
  }
  CHECK_THROWS_AS(dtw_distance(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1}, 1), DataError);
}

TEST_CASE("pair plans") {
  const auto all = PairPlan::all_pairs().pairs(2, 3);
  CHECK(all.size() == 6);
  const auto capped = PairPlan::capped(10, 7);
  const auto a = capped.pairs(20, 30), b = capped.pairs(20, 30);
  CHECK(a == b);
  CHECK(a.size() == 10);
  CHECK(std::set(a.begin(), a.end()).size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(PairPlan::capped(10, 8).pairs(20, 30) != a);
  CHECK(PairPlan::capped(100, 1).pairs(5, 6).size() == 30);
}

TEST_CASE("capped pairs are uniform over the grid") {
  std::vector<int> hits(12, 0);
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    for (const auto& [r, s] : PairPlan::capped(3, seed).pairs(3, 4)) ++hits[r * 4 + s];
  }
  for (int h : hits) CHECK(std::abs(h - 750) < 100);
}

TEST_CASE("mean_pairwise over identical sets") {
  const auto ds = testing::random_dataset(6, 1, 32, 1, 5);
  const auto w = windows_of(ds);
  for (auto metric : {SampleMetric::CD, SampleMetric::CrD, SampleMetric::L2, SampleMetric::DTWD}) {
    const auto self = mean_pairwise(metric, w, w, PairPlan::all_pairs());
    CHECK(self.pairs == 36);
    double diag = 0, brute = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::vector<std::span<const float>> one{w[i]};
      diag += mean_pairwise(metric, one, one, PairPlan::all_pairs()).value;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const std::vector<std::span<const float>> other{w[j]};
        brute += mean_pairwise(metric, one, other, PairPlan::all_pairs()).value;
      }
    }
    CHECK(diag == 0.0);
    CHECK(self.value == doctest::Approx(brute / 36.0).epsilon(1e-12));
  }
}

TEST_CASE("mean_pairwise is permutation invariant and worker independent") {
  const auto r = testing::random_dataset(9, 1, 24, 1, 11);
  const auto s = testing::random_dataset(7, 1, 24, 1, 12);
  auto wr = windows_of(r), ws = windows_of(s);
  for (auto metric : {SampleMetric::CD, SampleMetric::CrD, SampleMetric::L2, SampleMetric::DTWD}) {
    const auto base = mean_pairwise(metric, wr, ws, PairPlan::all_pairs());
    auto pr = wr, ps = ws;
    std::reverse(pr.begin(), pr.end());
    std::rotate(ps.begin(), ps.begin() + 3, ps.end());
    CHECK(mean_pairwise(metric, pr, ps, PairPlan::all_pairs()).value == doctest::Approx(base.value).epsilon(1e-12));
    const auto serial = mean_pairwise(metric, wr, ws, PairPlan::capped(20, 3), {std::nullopt, 1});
    const auto parallel = mean_pairwise(metric, wr, ws, PairPlan::capped(20, 3), {std::nullopt, 4});
    CHECK(serial.value == parallel.value);
  }
  const std::vector<std::span<const float>> none;
  CHECK_THROWS_AS(mean_pairwise(SampleMetric::L2, none, ws, PairPlan::all_pairs()), DataError);
}

TEST_CASE("per-class evaluation averages classes without weighting") {
  const auto real = testing::random_dataset(30, 2, 16, 3, 1);
  const auto synth = testing::random_dataset(12, 2, 16, 3, 2);
  const auto res = evaluate_sample_metric(SampleMetric::L2, real, synth, 1, PairPlan::all_pairs());
  REQUIRE(res.per_class.size() == 3);
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    std::vector<std::span<const float>> rc, sc;
    for (auto i : real.indices_of_class(c)) rc.push_back(real.channel(i, 1));
    for (auto i : synth.indices_of_class(c)) sc.push_back(synth.channel(i, 1));
    const double v = mean_pairwise(SampleMetric::L2, rc, sc, PairPlan::all_pairs()).value;
    CHECK(*res.per_class[std::size_t(c)] == doctest::Approx(v));
    sum += v;
  }
  CHECK(*res.class_average == doctest::Approx(sum / 3));
  CHECK(res.pairs == 3 * 10 * 4);
}

TEST_CASE("metric names round-trip") {
  for (auto m : {SampleMetric::CD, SampleMetric::CrD, SampleMetric::L2, SampleMetric::DTWD}) {
    CHECK(sample_metric_from_string(to_string(m)) == m);
  }
  CHECK_THROWS(sample_metric_from_string("nope"));
}
