#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "support.hpp"
#include "synthts/core/error.hpp"
#include "synthts/nn/gradcheck.hpp"
#include "synthts/nn/model.hpp"
#include "synthts/nn/ops.hpp"
#include "synthts/nn/optim.hpp"
#include "synthts/nn/scoring.hpp"
#include "synthts/nn/serialize.hpp"
#include "synthts/nn/train.hpp"

using namespace synthts;
using namespace synthts::nn;

namespace {

using D = double;

Var<D> random_param(Rng& rng, std::vector<std::size_t> shape, double scale = 1.0) {
  Tensor<D> t(std::move(shape));
  for (auto& v : t.data) v = scale * rng.normal();
  return parameter(std::move(t));
}

Tensor<D> random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale = 1.0) {
  Tensor<D> t(std::move(shape));
  for (auto& v : t.data) v = scale * rng.normal();
  return t;
}

// Small layer sizes so whole-model checks stay cheap.
ModelSizes tiny_sizes() {
  ModelSizes s;
  s.mlp_width = 6;
  s.cnn_filters = {3, 4};
  s.cnn_kernel = 3;
  s.cnn_dense = 5;
  s.fcn_filters = {4, 5, 4};
  s.fcn_kernels = {4, 3, 2};
  s.lstm_filters = 3;
  s.lstm_kernel = 3;
  s.lstm_pool = 2;
  s.lstm_units = 4;
  s.ae_hidden = 7;
  s.ae_code = 5;
  return s;
}

LabeledTensor toy_set(std::size_t n, std::size_t len, std::uint64_t seed, double separation) {
  Rng rng(seed);
  LabeledTensor out;
  out.values = Tensor<float>({n, 1, len});
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    out.labels.push_back(y);
    for (std::size_t t = 0; t < len; ++t) {
      out.values.data[i * len + t] = static_cast<float>(rng.normal() + (y ? separation : 0.0) * std::sin(0.3 * double(t)));
    }
  }
  return out;
}

constexpr double kDenseTol = 1e-4;
constexpr double kRecurrentTol = 1e-3;

}  // namespace

TEST_CASE("gradient check: dense + relu + softmax cross-entropy") {
  Rng rng(1);
  auto x = random_param(rng, {4, 5});
  auto w1 = random_param(rng, {6, 5}), b1 = random_param(rng, {6});
  auto w2 = random_param(rng, {3, 6}), b2 = random_param(rng, {3});
  const std::vector<int> labels{0, 2, 1, 2};
  auto loss = [&] { return softmax_cross_entropy(linear(relu(linear(x, w1, b1)), w2, b2), labels); };
  const auto r = gradient_check(loss, {x, w1, b1, w2, b2}, {"x", "w1", "b1", "w2", "b2"}, 30, 1);
  CHECK(r.checked > 50);
  CHECK(r.max_relative_error < kDenseTol);
}

TEST_CASE("gradient check: conv1d with odd and even kernels") {
  for (std::size_t k : {1u, 4u, 5u}) {
    Rng rng(k);
    auto x = random_param(rng, {2, 3, 9});
    auto w = random_param(rng, {4, 3, k}), b = random_param(rng, {4});
    const auto target = random_tensor(rng, {2, 4, 9});
    auto loss = [&] { return mse(conv1d(x, w, b), target); };
    const auto r = gradient_check(loss, {x, w, b}, {"x", "w", "b"}, 40, 2);
    CHECK(r.max_relative_error < kDenseTol);
  }
}

TEST_CASE("conv1d matches a direct same-padding convolution") {
  Rng rng(3);
  auto x = random_param(rng, {2, 2, 7});
  auto w = random_param(rng, {3, 2, 4}), b = random_param(rng, {3});
  const auto y = conv1d(x, w, b)->value;
  REQUIRE(y.shape == std::vector<std::size_t>{2, 3, 7});
  const int left = 1;  // (K - 1) / 2
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t f = 0; f < 3; ++f) {
      for (int t = 0; t < 7; ++t) {
        double acc = b->value.data[f];
        for (std::size_t c = 0; c < 2; ++c) {
          for (int k = 0; k < 4; ++k) {
            const int src = t + k - left;
            if (src < 0 || src >= 7) continue;
            acc += w->value.data[(f * 2 + c) * 4 + std::size_t(k)] * x->value.data[(n * 2 + c) * 7 + std::size_t(src)];
          }
        }
        CHECK(y.data[(n * 3 + f) * 7 + std::size_t(t)] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gradient check: batch norm on [B,C] and [B,C,L]") {
  Rng rng(4);
  for (const auto& shape : {std::vector<std::size_t>{6, 3}, std::vector<std::size_t>{4, 3, 5}}) {
    auto x = random_param(rng, shape);
    auto gamma = random_param(rng, {3}), beta = random_param(rng, {3});
    const auto target = random_tensor(rng, shape);
    NormStats<D> stats{std::vector<D>(3, 0.0), std::vector<D>(3, 1.0)};
    auto loss = [&] { return mse(batch_norm(x, gamma, beta, stats, true), target); };
    const auto r = gradient_check(loss, {x, gamma, beta}, {"x", "gamma", "beta"}, 40, 3);
    CHECK(r.max_relative_error < kDenseTol);
  }
}

TEST_CASE("batch norm running statistics") {
  Tensor<D> t({4, 1}, std::vector<D>{1, 2, 3, 6});
  auto x = constant(t);
  auto gamma = parameter(Tensor<D>({1}, 1.0)), beta = parameter(Tensor<D>({1}, 0.0));
  NormStats<D> stats{{0.0}, {1.0}};
  const auto y = batch_norm(x, gamma, beta, stats, true)->value;
  double m = 0, s2 = 0;
  for (double v : y.data) m += v / 4, s2 += v * v / 4;
  CHECK(std::abs(m) < 1e-12);
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(stats.mean[0] == doctest::Approx(0.1 * 3.0));
  CHECK(stats.var[0] == doctest::Approx(0.9 + 0.1 * 14.0 / 3.0));  // unbiased batch variance
  const auto eval = batch_norm(x, gamma, beta, stats, false)->value;
  CHECK(eval.data[0] == doctest::Approx((1.0 - stats.mean[0]) / std::sqrt(stats.var[0] + 1e-5)));
}

TEST_CASE("gradient check: pooling, reshaping and elementwise ops") {
  Rng rng(5);
  auto x = random_param(rng, {3, 2, 9});
  auto y = random_param(rng, {3, 2, 9});
  const auto t_pool = random_tensor(rng, {3, 2, 4});
  const auto t_gap = random_tensor(rng, {3, 2});
  const auto t_flat = random_tensor(rng, {3, 18});
  auto pool = [&] { return mse(max_pool1d(x, 2), t_pool); };
  auto gap = [&] { return mse(global_avg_pool(add(x, scale(y, 0.5))), t_gap); };
  auto flat = [&] { return mse(flatten(relu(x)), t_flat); };
  auto drop = [&] {
    Rng masks(9);
    return mse(flatten(dropout(x, 0.3, masks, true)), t_flat);
  };
  CHECK(gradient_check(pool, {x}, {"x"}, 54, 1).max_relative_error < kDenseTol);
  CHECK(gradient_check(gap, {x, y}, {"x", "y"}, 54, 1).max_relative_error < kDenseTol);
  CHECK(gradient_check(flat, {x}, {"x"}, 54, 1).max_relative_error < kDenseTol);
  CHECK(gradient_check(drop, {x}, {"x"}, 54, 1).max_relative_error < kDenseTol);
}

TEST_CASE("max pool drops the trailing partial window") {
  auto x = constant(Tensor<D>({1, 1, 5}, std::vector<D>{1, 3, 2, 0, 9}));
  const auto y = max_pool1d(x, 2)->value;
  CHECK(y.shape == std::vector<std::size_t>{1, 1, 2});
  CHECK(y.data == std::vector<D>{3, 2});
}

TEST_CASE("dropout scaling") {
  Rng rng(1);
  auto x = constant(Tensor<D>({1, 10000}, 1.0));
  const auto y = dropout(x, 0.2, rng, true)->value;
  double sum = 0;
  for (double v : y.data) {
    CHECK((v == 0.0 || v == doctest::Approx(1.25)));
    sum += v;
  }
  CHECK(sum / 10000 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(dropout(x, 0.2, rng, false)->value.data == x->value.data);
}

TEST_CASE("gradient check: LSTM over 10 steps") {
  Rng rng(6);
  const std::size_t H = 4, C = 3;
  auto x = random_param(rng, {2, C, 10});
  auto wx = random_param(rng, {4 * H, C}, 0.5), wh = random_param(rng, {4 * H, H}, 0.5);
  auto b = random_param(rng, {4 * H}, 0.5);
  const std::vector<int> labels{1, 3};
  auto loss = [&] { return softmax_cross_entropy(lstm_last(x, wx, wh, b), labels); };
  const auto r = gradient_check(loss, {x, wx, wh, b}, {"x", "wx", "wh", "b"}, 60, 4);
  CHECK(r.max_relative_error < kRecurrentTol);
}

TEST_CASE("gradient check: every architecture end to end") {
  Rng rng(7);
  const auto batch = random_tensor(rng, {4, 2, 12});
  const std::vector<int> labels{0, 1, 2, 1};
  for (const auto arch : all_architectures()) {
    ModelSpec spec{arch, 2, 12, 3, tiny_sizes()};
    Network<D> net(spec, 11);
    const auto r = gradient_check(net, batch, labels, 12, 5);
    INFO(to_string(arch), " worst ", r.worst);
    CHECK(r.max_relative_error < (arch == Architecture::ConvLSTM ? kRecurrentTol : kDenseTol));
  }
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + rng.below(6);
    const auto logits = random_tensor(rng, {3, k}, 1.0 + 50.0 * rng.uniform());
    const auto p = softmax(logits);
    for (std::size_t r = 0; r < 3; ++r) {
      double s = 0;
      for (std::size_t c = 0; c < k; ++c) {
        REQUIRE(p.data[r * k + c] >= 0.0);
        s += p.data[r * k + c];
      }
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("cross-entropy value") {
  auto logits = constant(Tensor<D>({2, 2}, std::vector<D>{0, 0, 1000, 0}));
  const std::vector<int> labels{1, 0};
  CHECK(softmax_cross_entropy(logits, labels)->value.data[0] == doctest::Approx(std::log(2.0) / 2));
}

TEST_CASE("MLP parameter count") {
  Network<float> mlp({Architecture::MLP, 2, 1000, 2, {}}, 1);
  // 2000*128+128 + 128*128+128 + 128*2+2
  CHECK(mlp.parameter_count() == 272898);
  CHECK(mlp.parameter_count() == 2000 * 128 + 128 + 128 * 128 + 128 + 128 * 2 + 2);
}

TEST_CASE("FCN parameter count") {
  Network<float> fcn({Architecture::FCN, 2, 256, 2, {}}, 1);
  const std::size_t convs = (2 * 8 * 64 + 64) + (64 * 5 * 128 + 128) + (128 * 3 * 64 + 64);
  const std::size_t norms = 2 * (64 + 128 + 64);
  CHECK(fcn.parameter_count() == convs + norms + 64 * 2 + 2);
}

TEST_CASE("model spec validation") {
  CHECK_THROWS_AS(ModelSpec({Architecture::FCN, 1, 5, 2, {}}).validate(), DataError);
  CHECK_THROWS_AS(ModelSpec({Architecture::ConvLSTM, 1, 3, 2, {}}).validate(), DataError);
  CHECK_THROWS_AS(architecture_from_string("transformer"), UsageError);
  CHECK(architecture_from_string("resnet") == Architecture::ResNet);
  for (auto a : all_architectures()) CHECK(architecture_from_string(to_string(a)) == a);
}

TEST_CASE("initialization is seed-determined") {
  Network<float> a({Architecture::CNN, 1, 32, 2, {}}, 3), b({Architecture::CNN, 1, 32, 2, {}}, 3),
      c({Architecture::CNN, 1, 32, 2, {}}, 4);
  CHECK(a.snapshot().parameters == b.snapshot().parameters);
  CHECK(a.snapshot().parameters != c.snapshot().parameters);
}

TEST_CASE("Adam single step") {
  auto w = parameter(Tensor<D>({1}, 1.0));
  Adam<D> opt({w});
  w->grad_buffer().data[0] = 1.0;
  opt.step();
  CHECK(std::abs(w->value.data[0] - 0.999) < 1e-9);
  CHECK(opt.steps() == 1);
}

TEST_CASE("Adam matches a hand-rolled update over several steps") {
  auto w = parameter(Tensor<D>({2}, std::vector<D>{0.5, -1.0}));
  AdamConfig cfg{0.01, 0.8, 0.99, 1e-8};
  Adam<D> opt({w}, cfg);
  double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {0.5, -1.0};
  for (int t = 1; t <= 5; ++t) {
    const double g[2] = {std::sin(t), 0.3 * t};
    w->grad_buffer().data = {g[0], g[1]};
    opt.step();
    for (int i = 0; i < 2; ++i) {
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(cfg.beta1, t)), vh = v[i] / (1 - std::pow(cfg.beta2, t));
      ref[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
      CHECK(w->value.data[std::size_t(i)] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("AUROC worked example and pair-counting oracle") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  CHECK(auroc(s, y) == 0.75);

  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + rng.below(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = double(rng.below(t % 2 ? 5 : 1000)) / 10.0;  // odd trials are tie-heavy
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 0;
    labels[1] = 1;
    CHECK(std::abs(auroc(scores, labels) - oracle::pair_auroc(scores, labels)) <= 1e-12);
  }
  CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DataError);
}

TEST_CASE("AUROC is invariant under strictly monotone maps") {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 10 + rng.below(40);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.normal();
      y[i] = static_cast<int>(i % 2);
    }
    const double a = auroc(s, y);
    const double shift = rng.normal(), gain = 0.1 + rng.uniform();
    std::vector<double> m1(s), m2(s), m3(s);
    for (auto& v : m1) v = gain * v + shift;
    for (auto& v : m2) v = std::exp(v);
    for (auto& v : m3) v = v * v * v + v;
    CHECK(auroc(m1, y) == a);
    CHECK(auroc(m2, y) == a);
    CHECK(auroc(m3, y) == a);
  }
}

TEST_CASE("multiclass AUROC weights one-vs-rest by support") {
  Rng rng(11);
  const std::size_t n = 60, k = 3;
  std::vector<double> probs(n * k);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i < 10 ? 0 : i < 30 ? 1 : 2);
    double s = 0;
    for (std::size_t c = 0; c < k; ++c) s += probs[i * k + c] = rng.uniform() + (std::size_t(y[i]) == c ? 0.3 : 0.0);
    for (std::size_t c = 0; c < k; ++c) probs[i * k + c] /= s;
  }
  double expected = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> col(n);
    std::vector<int> bin(n);
    std::size_t support = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = probs[i * k + c];
      bin[i] = std::size_t(y[i]) == c;
      support += std::size_t(bin[i]);
    }
    expected += double(support) / double(n) * oracle::pair_auroc(col, bin);
  }
  CHECK(auroc_multiclass(probs, k, y) == doctest::Approx(expected).epsilon(1e-12));

  std::vector<double> two{0.9, 0.1, 0.3, 0.7, 0.6, 0.4};
  CHECK(auroc_multiclass(two, 2, std::vector<int>{0, 1, 1}) == auroc(std::vector<double>{0.1, 0.7, 0.4}, std::vector<int>{0, 1, 1}));
}

TEST_CASE("accuracy and argmax") {
  CHECK(accuracy(std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 1, 0, 0}) == 0.75);
  CHECK(argmax_rows(std::vector<double>{0.2, 0.8, 0.5, 0.5, 0.9, 0.1}, 2) == std::vector<int>{1, 0, 0});
}

TEST_CASE("training is deterministic and restores the best checkpoint") {
  const auto train_set = toy_set(48, 24, 1, 1.5), val_set = toy_set(16, 24, 2, 1.5);
  TrainingConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 8;
  cfg.loss = LossKind::Binary;
  cfg.seed = 5;
  ModelSpec spec{Architecture::CNN, 1, 24, 2, tiny_sizes()};
  const auto a = train(Network<float>(spec, 3), train_set, val_set, cfg);
  const auto b = train(Network<float>(spec, 3), train_set, val_set, cfg);
  REQUIRE(a.trace.size() == 12);
  for (std::size_t e = 0; e < a.trace.size(); ++e) {
    CHECK(a.trace[e].train_loss == b.trace[e].train_loss);
    CHECK(a.trace[e].val_loss == b.trace[e].val_loss);
  }
  double best = INFINITY;
  std::size_t first = 0;
  for (const auto& r : a.trace) {
    if (r.val_loss < best) best = r.val_loss, first = r.epoch;
  }
  CHECK(a.best_val_loss == best);
  CHECK(a.best_epoch == first);
  auto restored = a.network;
  CHECK(evaluate_loss(*restored, val_set) == doctest::Approx(best).epsilon(1e-6));
  CHECK(a.trace.front().train_loss > a.trace.back().train_loss);
}

TEST_CASE("training rejects inconsistent inputs") {
  const auto train_set = toy_set(20, 16, 1, 1.0);
  TrainingConfig cfg;
  cfg.epochs = 1;
  cfg.loss = LossKind::Binary;
  ModelSpec spec{Architecture::MLP, 1, 16, 2, tiny_sizes()};
  LabeledTensor one_class = train_set.subset(std::vector<std::size_t>{0, 2, 4});
  CHECK_THROWS_AS(train(Network<float>(spec, 1), train_set, one_class, cfg), DataError);
  CHECK_THROWS_AS(train(Network<float>(spec, 1), LabeledTensor{}, train_set, cfg), DataError);
  cfg.epochs = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("a trained model learns a separable task") {
  const auto train_set = toy_set(120, 32, 3, 2.0), val_set = toy_set(30, 32, 4, 2.0),
             test_set = toy_set(60, 32, 5, 2.0);
  TrainingConfig cfg;
  cfg.epochs = 15;
  cfg.loss = LossKind::Binary;
  cfg.seed = 1;
  for (auto arch : {Architecture::MLP, Architecture::CNN, Architecture::AE}) {
    const auto model = train(Network<float>({arch, 1, 32, 2, {}}, 2), train_set, val_set, cfg);
    const auto p = model.predict_proba(test_set.values);
    std::vector<double> probs(p.data.begin(), p.data.end());
    INFO(to_string(arch));
    CHECK(auroc_multiclass(probs, 2, test_set.labels) > 0.9);
  }
}

TEST_CASE("model serialization round trip is bit-exact") {
  const auto train_set = toy_set(32, 16, 1, 1.0), val_set = toy_set(10, 16, 2, 1.0);
  TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.loss = LossKind::Binary;
  for (auto arch : all_architectures()) {
    ModelSpec spec{arch, 1, 16, 2, tiny_sizes()};
    const auto model = train(Network<float>(spec, 1), train_set, val_set, cfg);
    testing::TempDir dir("model");
    save_model(model, dir.path());
    const auto back = load_model(dir.path());
    CHECK(back.network->spec() == spec);
    CHECK(back.best_epoch == model.best_epoch);
    CHECK(back.best_val_loss == model.best_val_loss);
    CHECK(back.network->snapshot().parameters == model.network->snapshot().parameters);
    const auto p = model.predict_proba(val_set.values), q = back.predict_proba(val_set.values);
    CHECK(std::memcmp(p.data.data(), q.data.data(), p.data.size() * sizeof(float)) == 0);
  }
}
