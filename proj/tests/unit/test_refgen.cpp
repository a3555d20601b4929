#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "synthts/core/error.hpp"
#include "synthts/data/canonical.hpp"
#include "synthts/distribution/entropy.hpp"
#include "synthts/refgen/refgen.hpp"

using namespace synthts;
using namespace synthts::refgen;

namespace {

data::WindowedDataset base() { return testing::random_dataset(12, 2, 16, 3, 5, 2.0); }

DegradationSpec spec(DegradationKind kind, double sigma = 0, double alpha = 1, std::size_t shift = 0,
                     std::uint64_t seed = 0) {
  DegradationSpec s;
  s.kind = kind;
  s.sigma = sigma;
  s.alpha = alpha;
  s.shift = shift;
  s.seed = seed;
  return s;
}

bool same_tensor(const data::WindowedDataset& a, const data::WindowedDataset& b) {
  return std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end()) &&
         std::equal(a.labels().begin(), a.labels().end(), b.labels().begin(), b.labels().end());
}

}  // namespace

TEST_CASE("identity is a bit-exact copy with provenance") {
  const auto real = base();
  const auto out = generate(real, {});
  CHECK(same_tensor(real, out));
  CHECK(out.subjects() == real.subjects());
  CHECK(out.meta().provenance.at("degradation") == "identity");
  CHECK(out.meta().provenance.at("source_fingerprint") == data::tensor_fingerprint(real));
  CHECK(data::tensor_fingerprint(out) == data::tensor_fingerprint(real));
}

TEST_CASE("jitter") {
  const auto real = base();
  CHECK(same_tensor(real, generate(real, spec(DegradationKind::Jitter, 0.0))));
  const auto a = generate(real, spec(DegradationKind::Jitter, 0.5, 1, 0, 7));
  CHECK(same_tensor(a, generate(real, spec(DegradationKind::Jitter, 0.5, 1, 0, 7))));
  CHECK_FALSE(same_tensor(a, generate(real, spec(DegradationKind::Jitter, 0.5, 1, 0, 8))));
  CHECK(a.meta().provenance.at("degradation") == "jitter(sigma=0.5, seed=7)");

  const auto big = testing::random_dataset(200, 1, 100, 2, 1);
  const auto j = generate(big, spec(DegradationKind::Jitter, 0.3, 1, 0, 2));
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < big.values().size(); ++i) {
    const double d = double(j.values()[i]) - double(big.values()[i]);
    s += d;
    ss += d * d;
  }
  const double n = double(big.values().size());
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::sqrt(ss / n) == doctest::Approx(0.3).epsilon(0.02));
  CHECK(std::equal(j.labels().begin(), j.labels().end(), big.labels().begin()));
}

TEST_CASE("amplitude scale multiplies every value") {
  const auto real = base();
  const auto out = generate(real, spec(DegradationKind::AmplitudeScale, 0, 2.5));
  for (std::size_t i = 0; i < real.values().size(); ++i) {
    CHECK(out.values()[i] == static_cast<float>(2.5 * double(real.values()[i])));
  }
  CHECK(same_tensor(real, generate(real, spec(DegradationKind::AmplitudeScale, 0, 1.0))));
}

TEST_CASE("circular shift rotates each channel") {
  const auto real = base();
  const std::size_t L = real.length();
  CHECK(same_tensor(real, generate(real, spec(DegradationKind::CircularShift, 0, 1, 0))));
  CHECK(same_tensor(real, generate(real, spec(DegradationKind::CircularShift, 0, 1, L))));
  CHECK(same_tensor(generate(real, spec(DegradationKind::CircularShift, 0, 1, 3)),
                    generate(real, spec(DegradationKind::CircularShift, 0, 1, L + 3))));
  for (std::size_t k : {1u, 5u, 15u}) {
    const auto out = generate(real, spec(DegradationKind::CircularShift, 0, 1, k));
    for (std::size_t i = 0; i < real.size(); ++i) {
      for (std::size_t c = 0; c < real.channels(); ++c) {
        const auto x = real.channel(i, c), y = out.channel(i, c);
        for (std::size_t t = 0; t < L; ++t) CHECK(y[(t + k) % L] == x[t]);
      }
    }
  }
}

TEST_CASE("white noise matches per-channel moments and discards structure") {
  auto real = testing::random_dataset(300, 2, 64, 2, 4);
  std::vector<float> v(real.values().begin(), real.values().end());
  for (std::size_t i = 0; i < real.size(); ++i) {
    for (std::size_t t = 0; t < 64; ++t) {
      v[(i * 2 + 1) * 64 + t] = 5.0f + 3.0f * v[(i * 2 + 1) * 64 + t];
    }
  }
  real = real.with_values(std::move(v));
  const auto out = generate(real, spec(DegradationKind::WhiteNoise, 0, 1, 0, 3));
  for (std::size_t c = 0; c < 2; ++c) {
    double rs = 0, rss = 0, os = 0, oss = 0;
    for (std::size_t i = 0; i < real.size(); ++i) {
      for (float x : real.channel(i, c)) rs += x, rss += double(x) * x;
      for (float x : out.channel(i, c)) os += x, oss += double(x) * x;
    }
    const double n = 300.0 * 64;
    const double rm = rs / n, om = os / n;
    const double rsd = std::sqrt(rss / n - rm * rm), osd = std::sqrt(oss / n - om * om);
    CHECK(std::abs(om - rm) < 4 * rsd / std::sqrt(n));
    CHECK(osd == doctest::Approx(rsd).epsilon(0.02));
  }
  CHECK(std::equal(out.labels().begin(), out.labels().end(), real.labels().begin()));
  CHECK(out.meta().provenance.at("degradation") == "white-noise(seed=3)");
}

TEST_CASE("label permutation keeps values and class counts") {
  const auto real = testing::random_dataset(60, 1, 8, 3, 2);
  const auto out = generate(real, spec(DegradationKind::LabelPermute, 0, 1, 0, 11));
  CHECK(std::equal(out.values().begin(), out.values().end(), real.values().begin()));
  CHECK(out.class_counts() == real.class_counts());
  CHECK_FALSE(std::equal(out.labels().begin(), out.labels().end(), real.labels().begin()));
}

TEST_CASE("degradation parameters are validated") {
  const auto real = base();
  CHECK_THROWS_AS(generate(real, spec(DegradationKind::Jitter, -0.1)), UsageError);
  CHECK_THROWS_AS(generate(real, spec(DegradationKind::Jitter, NAN)), UsageError);
  CHECK_THROWS_AS(generate(real, spec(DegradationKind::AmplitudeScale, 0, 0.0)), UsageError);
  CHECK_THROWS_AS(degradation_kind_from_string("blur"), UsageError);
  for (auto k : {DegradationKind::Identity, DegradationKind::Jitter, DegradationKind::AmplitudeScale,
                 DegradationKind::CircularShift, DegradationKind::WhiteNoise, DegradationKind::LabelPermute}) {
    CHECK(degradation_kind_from_string(to_string(k)) == k);
  }
}

TEST_CASE("toy task layout") {
  ToyTaskSpec s;
  s.per_class = 50;
  s.length = 128;
  s.channels = 2;
  s.seed = 4;
  const auto ds = make_toy_task(s);
  CHECK(ds.size() == 100);
  CHECK(ds.channels() == 2);
  CHECK(ds.length() == 128);
  CHECK(ds.class_counts() == std::vector<std::size_t>{50, 50});
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(ds.labels()[i] == int(i % 2));
  CHECK(ds.meta().window_seconds == doctest::Approx(1.28));
  CHECK(make_toy_task(s) == ds);

  ToyTaskSpec bad = s;
  bad.f0 = 60;
  CHECK_THROWS_AS(make_toy_task(bad), UsageError);
  bad = s;
  bad.f1 = s.f0;
  CHECK_THROWS_AS(make_toy_task(bad), UsageError);
}

TEST_CASE("toy tone class has lower spectral entropy than the noise class") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ToyTaskSpec s;
    s.per_class = 30;
    s.seed = seed;
    const auto ds = make_toy_task(s);
    double h[2] = {0, 0};
    for (std::size_t i = 0; i < ds.size(); ++i) h[ds.labels()[i]] += distribution::spectral_entropy(ds.channel(i, 0)) / 30;
    CHECK(h[0] < h[1]);
  }
}

TEST_CASE("toy classes have matched variance") {
  ToyTaskSpec s;
  s.per_class = 200;
  s.seed = 9;
  const auto ds = make_toy_task(s);
  double var[2] = {0, 0};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (float x : ds.channel(i, 0)) var[ds.labels()[i]] += double(x) * x / (200.0 * 256);
  }
  CHECK(var[1] == doctest::Approx(var[0]).epsilon(0.05));
}
