#pragma once

#include <memory>
#include <random>

#include "steer3d/field.hpp"
#include "steer3d/stencil.hpp"

namespace steer3d {

enum class Pad { Same, Valid };

/// Dense cross-correlation: out[o](x) = sum_i sum_n W[o][i][n] in[i](x + n),
/// zero-padded ("same") or shrinking by k-1 ("valid").
FieldTensor conv3d(const FieldTensor& input, const DiscreteFilter& filter,
                   Pad pad, const FieldType& out_field);

/// Gradient of conv3d w.r.t. its input, given the upstream gradient.
FieldTensor conv3d_input_grad(const DiscreteFilter& filter,
                              const FieldTensor& upstream, const FieldType& in_field,
                              int n1, int n2, int n3, Pad pad);

/// Gradient of conv3d w.r.t. the filter taps.
DiscreteFilter conv3d_weight_grad(const FieldTensor& input,
                                  const FieldTensor& upstream, int k, Pad pad);

/// Adjoint of discretize: projects a filter-tap gradient back onto the ten
/// coefficient blocks.
PdoCoefficients discretize_adjoint(const DiscreteFilter& w_grad,
                                   const DiscretizationScheme& scheme);

/// A convolution layer whose filter is a learnable linear combination of an
/// equivariant coefficient basis, discretized on the fly.
struct EquivConvLayer {
  FieldType in_field;
  FieldType out_field;
  std::shared_ptr<const KernelBasis> basis;
  DiscretizationScheme scheme;
  Pad pad = Pad::Same;
  Eigen::VectorXd coeffs;

  static EquivConvLayer create(const FieldType& in, const FieldType& out,
                               const DiscretizationScheme& scheme,
                               double rel_tol = 1e-8, Pad pad = Pad::Same);

  int n_params() const { return static_cast<int>(coeffs.size()); }
  DiscreteFilter materialize() const;

  FieldTensor forward(const FieldTensor& input) const;
  std::vector<FieldTensor> forward_batch(const std::vector<FieldTensor>& inputs) const;

  struct Grads {
    Eigen::VectorXd coeff_grads;
    FieldTensor input_grad;
  };
  Grads backward(const FieldTensor& input, const FieldTensor& upstream) const;

  /// Batch gradient with one filter materialization and one coefficient
  /// projection for the whole batch.
  struct BatchGrads {
    Eigen::VectorXd coeff_grads;
    std::vector<FieldTensor> input_grads;
  };
  BatchGrads backward_batch(const std::vector<FieldTensor>& inputs,
                            const std::vector<FieldTensor>& upstreams) const;

  /// Generalized He draw: coefficient variance 2 / fan, with the fan taken as
  /// the mean per-output-channel squared energy of the discretized basis
  /// elements, so unit-variance white input keeps unit-scale pre-activations.
  void init_he(std::mt19937_64& rng);
};

/// Elementwise max(0, x). Only admissible for permutation-like fields;
/// irrep factors are rejected.
FieldTensor pointwise_relu(const FieldTensor& input);
FieldTensor pointwise_relu_backward(const FieldTensor& input,
                                    const FieldTensor& upstream);

/// Multiplies each factor instance block by a learned sigmoid gate; gates is
/// a scalar field with one channel per gated instance.
FieldTensor gated_nonlinearity(const FieldTensor& features, const FieldTensor& gates);

/// f -> relu(|f| - b) * f / |f| per factor instance per voxel (zero stays
/// zero). Norm-only, so it commutes with any orthogonal field action.
FieldTensor norm_relu(const FieldTensor& input, const Eigen::VectorXd& bias);

/// Batch normalization with a single scale and bias per factor instance;
/// statistics pool over batch, space and the channels of each instance.
/// Permutation-like fields only.
struct FieldBatchNorm {
  explicit FieldBatchNorm(const FieldType& field);

  FieldType field;
  double eps = 1e-5;
  double momentum = 0.1;
  Eigen::VectorXd gamma, beta;           // one per instance
  Eigen::VectorXd running_mean, running_var;

  std::vector<FieldTensor> forward(const std::vector<FieldTensor>& batch,
                                   bool training);

  /// Training-mode gradient. Must be called after forward(.., true) on the
  /// same batch (uses the cached statistics).
  struct Grads {
    std::vector<FieldTensor> input_grads;
    Eigen::VectorXd dgamma, dbeta;
  };
  Grads backward(const std::vector<FieldTensor>& batch,
                 const std::vector<FieldTensor>& upstream) const;

 private:
  Eigen::VectorXd batch_mean_, batch_var_;  // cached by forward(training)
  friend struct FieldBatchNormTestAccess;
};

/// Norm-only normalization for irrep fields: each factor instance is divided
/// by the root-mean-square feature norm over batch and space.
struct ScaleBatchNorm {
  explicit ScaleBatchNorm(const FieldType& field);

  FieldType field;
  double eps = 1e-12;  // zero-norm guard only; keeps the map scale-invariant
  double momentum = 0.1;
  Eigen::VectorXd running_ms;  // mean squared norm per instance

  std::vector<FieldTensor> forward(const std::vector<FieldTensor>& batch,
                                   bool training);
};

/// Block-mean downsampling by an integer factor (spatial dims must divide).
FieldTensor avg_pool(const FieldTensor& input, int factor);
FieldTensor avg_pool_backward(const FieldTensor& upstream, int factor,
                              const FieldType& field, int n1, int n2, int n3);

/// Mean over all voxels, one value per channel.
Eigen::VectorXd global_avg_pool(const FieldTensor& input);
FieldTensor global_avg_pool_backward(const Eigen::VectorXd& upstream,
                                     const FieldType& field, int n1, int n2, int n3);

/// Fully connected head on pooled invariant features.
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  DenseLayer(int in_dim, int out_dim) : weight(out_dim, in_dim), bias(out_dim) {
    weight.setZero();
    bias.setZero();
  }
  void init_xavier(std::mt19937_64& rng);
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    return weight * x + bias;
  }
};

}  // namespace steer3d
