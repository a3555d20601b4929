#ifndef SYNTHTS_NN_TRAIN_HPP
#define SYNTHTS_NN_TRAIN_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "synthts/nn/model.hpp"
#include "synthts/nn/optim.hpp"

namespace synthts::nn {

// Binary runs use a two-way softmax head, so both kinds reduce to the same
// cross-entropy; Binary additionally requires exactly two classes.
enum class LossKind { Binary, Categorical };

struct TrainingConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  AdamConfig adam;
  LossKind loss = LossKind::Categorical;
  std::uint64_t seed = 0;

  void validate() const;
};

// Windows [n, C, L] with one label each.
struct LabeledTensor {
  Tensor<float> values;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  LabeledTensor subset(std::span<const std::size_t> indices) const;
  static LabeledTensor concat(const LabeledTensor& a, const LabeledTensor& b);
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainedModel {
  std::shared_ptr<Network<float>> network;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> trace;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;

  Tensor<float> predict_proba(const Tensor<float>& batch) const { return network->predict_proba(batch); }
};

// Trains for exactly cfg.epochs and restores the parameters of the first
// epoch with minimal validation loss. Test data is not an input.
TrainedModel train(Network<float> model, const LabeledTensor& train_set, const LabeledTensor& val_set,
                   const TrainingConfig& cfg);

// Mean classification loss in evaluation mode.
double evaluate_loss(Network<float>& model, const LabeledTensor& data, std::size_t chunk = 256);

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_TRAIN_HPP
