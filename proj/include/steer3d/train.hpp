#pragma once

#include "steer3d/model.hpp"

namespace steer3d {

using LabeledDataset = std::vector<std::pair<FieldTensor, int>>;

struct TrainConfig {
  int epochs = 200;
  double lr = 0.01;
  double lr_decay = 0.98;   // multiplicative, applied per epoch past decay_after
  int decay_after = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  unsigned seed = 0;
  bool verbose = false;
};

struct TrainResult {
  std::vector<double> loss;       // per epoch
  std::vector<double> train_acc;  // per epoch
};

/// Full-batch Adam training with cross-entropy loss and the exponential
/// learning-rate schedule. Aborts with a diagnostic if the loss goes
/// non-finite.
TrainResult train(Model& model, const LabeledDataset& data, const TrainConfig& config);

/// Classification accuracy of the model (inference mode) on a dataset.
double evaluate(Model& model, const LabeledDataset& data);

}  // namespace steer3d
