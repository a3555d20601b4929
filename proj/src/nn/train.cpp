#include "synthts/nn/train.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "synthts/core/error.hpp"

namespace synthts::nn {

void TrainingConfig::validate() const {
  if (epochs == 0) throw UsageError("training: epochs must be > 0");
  if (batch_size == 0) throw UsageError("training: batch size must be > 0");
}

LabeledTensor LabeledTensor::subset(std::span<const std::size_t> indices) const {
  const std::size_t per = labels.empty() ? 0 : values.size() / labels.size();
  LabeledTensor out;
  out.values = Tensor<float>({indices.size(), values.dim(1), values.dim(2)});
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= labels.size()) throw InvariantError("subset index out of range");
    std::copy_n(values.data.begin() + static_cast<std::ptrdiff_t>(src * per), per,
                out.values.data.begin() + static_cast<std::ptrdiff_t>(i * per));
    out.labels.push_back(labels[src]);
  }
  return out;
}

LabeledTensor LabeledTensor::concat(const LabeledTensor& a, const LabeledTensor& b) {
  if (a.values.dim(1) != b.values.dim(1) || a.values.dim(2) != b.values.dim(2)) {
    throw DataError("cannot concatenate windows of different shapes");
  }
  LabeledTensor out;
  out.values = Tensor<float>({a.size() + b.size(), a.values.dim(1), a.values.dim(2)});
  std::copy(a.values.data.begin(), a.values.data.end(), out.values.data.begin());
  std::copy(b.values.data.begin(), b.values.data.end(),
            out.values.data.begin() + static_cast<std::ptrdiff_t>(a.values.size()));
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

double evaluate_loss(Network<float>& model, const LabeledTensor& data, std::size_t chunk) {
  const std::size_t n = data.size();
  const std::size_t per = data.values.size() / n;
  Rng unused(0);
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t m = std::min(chunk, n - start);
    Tensor<float> part({m, data.values.dim(1), data.values.dim(2)},
                       std::vector<float>(data.values.data.begin() + static_cast<std::ptrdiff_t>(start * per),
                                          data.values.data.begin() + static_cast<std::ptrdiff_t>((start + m) * per)));
    const auto logits = model.forward(part, false, unused).logits;
    const auto l = softmax_cross_entropy(logits, std::span<const int>(data.labels).subspan(start, m));
    total += static_cast<double>(l->value.data[0]) * static_cast<double>(m);
  }
  return total / static_cast<double>(n);
}

TrainedModel train(Network<float> model, const LabeledTensor& train_set, const LabeledTensor& val_set,
                   const TrainingConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0) throw DataError("training: empty training split");
  if (val_set.size() == 0) throw DataError("training: empty validation split");
  const std::set<int> train_classes(train_set.labels.begin(), train_set.labels.end());
  const std::set<int> val_classes(val_set.labels.begin(), val_set.labels.end());
  if (cfg.loss == LossKind::Binary) {
    if (model.spec().classes != 2) throw DataError("training: binary loss needs a two-class head");
    if (train_classes.size() < 2) throw DataError("training: training split holds a single class");
  }
  if (train_classes != val_classes) throw DataError("training: train and validation label sets differ");
  for (int c : train_classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= model.spec().classes) {
      throw DataError("training: label " + std::to_string(c) + " outside the model's classes");
    }
  }

  const std::size_t n = train_set.size();
  const std::size_t per = train_set.values.size() / n;
  const std::size_t channels = train_set.values.dim(1), length = train_set.values.dim(2);
  Adam<float> optimizer(model.parameters(), cfg.adam);

  TrainedModel result;
  result.seed = cfg.seed;
  typename Network<float>::State best;
  std::vector<std::size_t> order(n);
  Tensor<float> batch;
  std::vector<int> labels;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, {epoch}));
    rng.shuffle(order.begin(), order.end());
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t m = std::min(cfg.batch_size, n - start);
      batch = Tensor<float>({m, channels, length});
      labels.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(train_set.values.data.begin() + static_cast<std::ptrdiff_t>(src * per), per,
                    batch.data.begin() + static_cast<std::ptrdiff_t>(i * per));
        labels[i] = train_set.labels[src];
      }
      model.zero_grad();
      auto loss = model.loss(batch, labels, true, rng);
      backward(loss);
      optimizer.step();
      total += static_cast<double>(loss->value.data[0]) * static_cast<double>(m);
    }
    EpochRecord rec{epoch, total / static_cast<double>(n), evaluate_loss(model, val_set)};
    if (result.trace.empty() || rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      best = model.snapshot();
    }
    result.trace.push_back(rec);
  }
  model.zero_grad();
  model.restore(best);
  result.network = std::make_shared<Network<float>>(std::move(model));
  return result;
}

}  // namespace synthts::nn
