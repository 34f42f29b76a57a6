#include "steer3d/train.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace steer3d {

using Eigen::VectorXd;

TrainResult train(Model& model, const LabeledDataset& data, const TrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");

  std::vector<FieldTensor> batch;
  std::vector<int> labels;
  for (const auto& [tensor, label] : data) {
    batch.push_back(tensor);
    labels.push_back(label);
  }

  VectorXd params = model.parameters();
  VectorXd m = VectorXd::Zero(params.size());
  VectorXd v = VectorXd::Zero(params.size());

  TrainResult result;
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr =
        config.lr * std::pow(config.lr_decay, std::max(0, epoch - config.decay_after));

    const auto logits = model.forward(batch, /*training=*/true);
    std::vector<VectorXd> dlogits;
    const double loss = cross_entropy(logits, labels, &dlogits);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                               std::to_string(epoch));
    }

    int correct = 0;
    for (size_t s = 0; s < logits.size(); ++s) {
      int arg = 0;
      logits[s].maxCoeff(&arg);
      if (arg == labels[s]) ++correct;
    }
    result.loss.push_back(loss);
    result.train_acc.push_back(static_cast<double>(correct) / logits.size());

    if (lr > 0.0) {
      const VectorXd grad = model.gradient(batch, dlogits);
      ++step;
      m = config.beta1 * m + (1.0 - config.beta1) * grad;
      v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
      const double bc1 = 1.0 - std::pow(config.beta1, step);
      const double bc2 = 1.0 - std::pow(config.beta2, step);
      for (int i = 0; i < params.size(); ++i) {
        params(i) -= lr * (m(i) / bc1) / (std::sqrt(v(i) / bc2) + config.adam_eps);
      }
      model.set_parameters(params);
    }

    if (config.verbose && (epoch % 20 == 0 || epoch == config.epochs - 1)) {
      std::cerr << "epoch " << epoch << " loss " << loss << " acc "
                << result.train_acc.back() << " lr " << lr << "\n";
    }
  }
  return result;
}

double evaluate(Model& model, const LabeledDataset& data) {
  if (data.empty()) return 0.0;
  std::vector<FieldTensor> batch;
  std::vector<int> labels;
  for (const auto& [tensor, label] : data) {
    batch.push_back(tensor);
    labels.push_back(label);
  }
  const auto logits = model.forward(batch, /*training=*/false);
  int correct = 0;
  for (size_t s = 0; s < logits.size(); ++s) {
    int arg = 0;
    logits[s].maxCoeff(&arg);
    if (arg == labels[s]) ++correct;
  }
  return static_cast<double>(correct) / logits.size();
}

}  // namespace steer3d
