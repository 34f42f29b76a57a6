#include "steer3d/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "steer3d/basis.hpp"

namespace steer3d {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Shape {
  int n1, n2, n3;
};

Shape output_shape(const FieldTensor& in, int k, Pad pad) {
  if (pad == Pad::Same) return {in.n1, in.n2, in.n3};
  const Shape s{in.n1 - k + 1, in.n2 - k + 1, in.n3 - k + 1};
  if (s.n1 < 1 || s.n2 < 1 || s.n3 < 1) {
    throw std::invalid_argument("conv3d: input smaller than the valid window");
  }
  return s;
}

/// dst(x) += w * src(x + shift) over the overlapping range.
void accumulate_shifted(double* dst, Shape dshape, const double* src, Shape sshape,
                        double w, int s1, int s2, int s3) {
  const int i_lo = std::max(0, -s1), i_hi = std::min(dshape.n1, sshape.n1 - s1);
  const int j_lo = std::max(0, -s2), j_hi = std::min(dshape.n2, sshape.n2 - s2);
  const int k_lo = std::max(0, -s3), k_hi = std::min(dshape.n3, sshape.n3 - s3);
  for (int i = i_lo; i < i_hi; ++i) {
    for (int j = j_lo; j < j_hi; ++j) {
      double* d = dst + (static_cast<size_t>(i) * dshape.n2 + j) * dshape.n3;
      const double* s =
          src + (static_cast<size_t>(i + s1) * sshape.n2 + (j + s2)) * sshape.n3 + s3;
      for (int k = k_lo; k < k_hi; ++k) d[k] += w * s[k];
    }
  }
}

/// sum_x a(x) * b(x + shift) over the overlapping range.
double dot_shifted(const double* a, Shape ashape, const double* b, Shape bshape,
                   int s1, int s2, int s3) {
  const int i_lo = std::max(0, -s1), i_hi = std::min(ashape.n1, bshape.n1 - s1);
  const int j_lo = std::max(0, -s2), j_hi = std::min(ashape.n2, bshape.n2 - s2);
  const int k_lo = std::max(0, -s3), k_hi = std::min(ashape.n3, bshape.n3 - s3);
  double sum = 0.0;
  for (int i = i_lo; i < i_hi; ++i) {
    for (int j = j_lo; j < j_hi; ++j) {
      const double* pa = a + (static_cast<size_t>(i) * ashape.n2 + j) * ashape.n3;
      const double* pb =
          b + (static_cast<size_t>(i + s1) * bshape.n2 + (j + s2)) * bshape.n3 + s3;
      for (int k = k_lo; k < k_hi; ++k) sum += pa[k] * pb[k];
    }
  }
  return sum;
}

}  // namespace

FieldTensor conv3d(const FieldTensor& input, const DiscreteFilter& filter, Pad pad,
                   const FieldType& out_field) {
  if (filter.in_channels != input.channels()) {
    throw std::invalid_argument("conv3d: filter expects " +
                                std::to_string(filter.in_channels) + " channels, got " +
                                std::to_string(input.channels()));
  }
  if (out_field.channels() != filter.out_channels) {
    throw std::invalid_argument("conv3d: output field/filter channel mismatch");
  }
  const int r = filter.k / 2;
  const int org = (pad == Pad::Same) ? 0 : r;
  const Shape os = output_shape(input, filter.k, pad);
  const Shape is{input.n1, input.n2, input.n3};

  FieldTensor out(out_field, os.n1, os.n2, os.n3);
  for (int o = 0; o < filter.out_channels; ++o) {
    double* dst = out.channel(o);
    for (int i = 0; i < filter.in_channels; ++i) {
      const double* src = input.channel(i);
      for (int a = -r; a <= r; ++a) {
        for (int b = -r; b <= r; ++b) {
          for (int c = -r; c <= r; ++c) {
            const double w = filter.at(o, i, a, b, c);
            if (w == 0.0) continue;
            accumulate_shifted(dst, os, src, is, w, a + org, b + org, c + org);
          }
        }
      }
    }
  }
  return out;
}

FieldTensor conv3d_input_grad(const DiscreteFilter& filter, const FieldTensor& upstream,
                              const FieldType& in_field, int n1, int n2, int n3,
                              Pad pad) {
  const int r = filter.k / 2;
  const int org = (pad == Pad::Same) ? 0 : r;
  FieldTensor din(in_field, n1, n2, n3);
  const Shape is{n1, n2, n3};
  const Shape os{upstream.n1, upstream.n2, upstream.n3};
  for (int o = 0; o < filter.out_channels; ++o) {
    const double* up = upstream.channel(o);
    for (int i = 0; i < filter.in_channels; ++i) {
      double* dst = din.channel(i);
      for (int a = -r; a <= r; ++a) {
        for (int b = -r; b <= r; ++b) {
          for (int c = -r; c <= r; ++c) {
            const double w = filter.at(o, i, a, b, c);
            if (w == 0.0) continue;
            // u = y + n + org  =>  din(u) += w * upstream(u - n - org)
            accumulate_shifted(dst, is, up, os, w, -(a + org), -(b + org), -(c + org));
          }
        }
      }
    }
  }
  return din;
}

DiscreteFilter conv3d_weight_grad(const FieldTensor& input, const FieldTensor& upstream,
                                  int k, Pad pad) {
  const int r = k / 2;
  const int org = (pad == Pad::Same) ? 0 : r;
  DiscreteFilter grad(upstream.channels(), input.channels(), k);
  const Shape is{input.n1, input.n2, input.n3};
  const Shape os{upstream.n1, upstream.n2, upstream.n3};
  for (int o = 0; o < grad.out_channels; ++o) {
    const double* up = upstream.channel(o);
    for (int i = 0; i < grad.in_channels; ++i) {
      const double* src = input.channel(i);
      for (int a = -r; a <= r; ++a) {
        for (int b = -r; b <= r; ++b) {
          for (int c = -r; c <= r; ++c) {
            grad.at(o, i, a, b, c) =
                dot_shifted(up, os, src, is, a + org, b + org, c + org);
          }
        }
      }
    }
  }
  return grad;
}

PdoCoefficients discretize_adjoint(const DiscreteFilter& w_grad,
                                   const DiscretizationScheme& scheme) {
  PdoCoefficients g = PdoCoefficients::zero(w_grad.out_channels, w_grad.in_channels);
  const size_t taps = w_grad.taps();
  auto project = [&](MatrixXd& dst, int col_block, const Stencil3& st) {
    for (int o = 0; o < w_grad.out_channels; ++o) {
      for (int i = 0; i < w_grad.in_channels; ++i) {
        const double* w = w_grad.block(o, i);
        double sum = 0.0;
        for (size_t t = 0; t < taps; ++t) sum += w[t] * st.w[t];
        dst(o, col_block * w_grad.in_channels + i) = sum;
      }
    }
  };
  project(g.b0, 0, scheme[PdoIndex::Identity]);
  for (int a = 0; a < 3; ++a) project(g.b1, a, scheme.stencils[1 + a]);
  for (int s = 0; s < 6; ++s) project(g.b2, s, scheme.stencils[4 + s]);
  return g;
}

EquivConvLayer EquivConvLayer::create(const FieldType& in, const FieldType& out,
                                      const DiscretizationScheme& scheme,
                                      double rel_tol, Pad pad) {
  EquivConvLayer layer;
  layer.in_field = in;
  layer.out_field = out;
  layer.basis = std::make_shared<KernelBasis>(
      solve_basis_blockwise(in.rep, out.rep, rel_tol));
  layer.scheme = scheme;
  layer.pad = pad;
  layer.coeffs = VectorXd::Zero(layer.basis->total());
  return layer;
}

DiscreteFilter EquivConvLayer::materialize() const {
  return discretize(basis->combine(coeffs), scheme);
}

FieldTensor EquivConvLayer::forward(const FieldTensor& input) const {
  if (!(input.field == in_field)) {
    throw std::invalid_argument("EquivConvLayer: input field mismatch (got " +
                                input.field.name() + ")");
  }
  return conv3d(input, materialize(), pad, out_field);
}

std::vector<FieldTensor> EquivConvLayer::forward_batch(
    const std::vector<FieldTensor>& inputs) const {
  const DiscreteFilter w = materialize();
  std::vector<FieldTensor> out;
  out.reserve(inputs.size());
  for (const auto& input : inputs) {
    if (!(input.field == in_field)) {
      throw std::invalid_argument("EquivConvLayer: input field mismatch");
    }
    out.push_back(conv3d(input, w, pad, out_field));
  }
  return out;
}

EquivConvLayer::Grads EquivConvLayer::backward(const FieldTensor& input,
                                               const FieldTensor& upstream) const {
  Grads g;
  const DiscreteFilter w = materialize();
  const DiscreteFilter dw = conv3d_weight_grad(input, upstream, scheme.k, pad);
  g.coeff_grads = basis->coefficient_gradients(discretize_adjoint(dw, scheme));
  g.input_grad =
      conv3d_input_grad(w, upstream, in_field, input.n1, input.n2, input.n3, pad);
  return g;
}

EquivConvLayer::BatchGrads EquivConvLayer::backward_batch(
    const std::vector<FieldTensor>& inputs,
    const std::vector<FieldTensor>& upstreams) const {
  if (inputs.size() != upstreams.size()) {
    throw std::invalid_argument("backward_batch: batch size mismatch");
  }
  BatchGrads g;
  const DiscreteFilter w = materialize();
  DiscreteFilter dw_total(w.out_channels, w.in_channels, w.k);
  g.input_grads.reserve(inputs.size());
  for (size_t s = 0; s < inputs.size(); ++s) {
    const DiscreteFilter dw = conv3d_weight_grad(inputs[s], upstreams[s], scheme.k, pad);
    for (size_t t = 0; t < dw.w.size(); ++t) dw_total.w[t] += dw.w[t];
    g.input_grads.push_back(conv3d_input_grad(w, upstreams[s], in_field, inputs[s].n1,
                                              inputs[s].n2, inputs[s].n3, pad));
  }
  g.coeff_grads = basis->coefficient_gradients(discretize_adjoint(dw_total, scheme));
  return g;
}

void EquivConvLayer::init_he(std::mt19937_64& rng) {
  const int n = n_params();
  coeffs = VectorXd::Zero(n);
  if (n == 0) return;

  VectorXd fan = VectorXd::Zero(out_field.channels());
  VectorXd unit = VectorXd::Zero(n);
  for (int t = 0; t < n; ++t) {
    unit.setZero();
    unit(t) = 1.0;
    const DiscreteFilter d = discretize(basis->combine(unit), scheme);
    for (int o = 0; o < d.out_channels; ++o) {
      for (int i = 0; i < d.in_channels; ++i) {
        const double* w = d.block(o, i);
        for (size_t tap = 0; tap < d.taps(); ++tap) fan(o) += w[tap] * w[tap];
      }
    }
  }
  const double mean_fan = fan.mean();
  const double sigma = mean_fan > 0.0 ? std::sqrt(2.0 / mean_fan) : 0.0;
  std::normal_distribution<double> gauss(0.0, sigma);
  for (int t = 0; t < n; ++t) coeffs(t) = gauss(rng);
}

FieldTensor pointwise_relu(const FieldTensor& input) {
  if (!input.field.permutation_like()) {
    throw std::invalid_argument(
        "pointwise_relu: field has non-permutation factors; use a norm-based "
        "nonlinearity instead");
  }
  FieldTensor out = input;
  for (double& v : out.data) v = std::max(0.0, v);
  return out;
}

FieldTensor pointwise_relu_backward(const FieldTensor& input,
                                    const FieldTensor& upstream) {
  FieldTensor grad = upstream;
  for (size_t i = 0; i < grad.data.size(); ++i) {
    if (input.data[i] <= 0.0) grad.data[i] = 0.0;
  }
  return grad;
}

FieldTensor gated_nonlinearity(const FieldTensor& features, const FieldTensor& gates) {
  const auto& instances = features.field.instances;
  if (gates.channels() != static_cast<int>(instances.size())) {
    throw std::invalid_argument("gated_nonlinearity: expected one gate channel per "
                                "factor instance");
  }
  if (gates.n1 != features.n1 || gates.n2 != features.n2 || gates.n3 != features.n3) {
    throw std::invalid_argument("gated_nonlinearity: gate/feature shape mismatch");
  }
  FieldTensor out = features;
  const size_t vox = features.voxels();
  for (size_t inst = 0; inst < instances.size(); ++inst) {
    const double* gate = gates.channel(static_cast<int>(inst));
    for (int c = instances[inst].offset; c < instances[inst].offset + instances[inst].dim;
         ++c) {
      double* f = out.channel(c);
      for (size_t v = 0; v < vox; ++v) f[v] *= 1.0 / (1.0 + std::exp(-gate[v]));
    }
  }
  return out;
}

FieldTensor norm_relu(const FieldTensor& input, const VectorXd& bias) {
  const auto& instances = input.field.instances;
  if (bias.size() != static_cast<int>(instances.size())) {
    throw std::invalid_argument("norm_relu: one bias per factor instance required");
  }
  FieldTensor out = input;
  const size_t vox = input.voxels();
  for (size_t inst = 0; inst < instances.size(); ++inst) {
    const int off = instances[inst].offset;
    const int dim = instances[inst].dim;
    for (size_t v = 0; v < vox; ++v) {
      double norm2 = 0.0;
      for (int c = off; c < off + dim; ++c) {
        const double x = input.channel(c)[v];
        norm2 += x * x;
      }
      const double norm = std::sqrt(norm2);
      const double scale =
          norm > 0.0 ? std::max(0.0, norm - bias(inst)) / norm : 0.0;
      for (int c = off; c < off + dim; ++c) out.channel(c)[v] *= scale;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

FieldBatchNorm::FieldBatchNorm(const FieldType& f) : field(f) {
  if (!field.permutation_like()) {
    throw std::invalid_argument(
        "FieldBatchNorm: irrep factors are not admissible; use ScaleBatchNorm");
  }
  const int n = static_cast<int>(field.instances.size());
  gamma = VectorXd::Ones(n);
  beta = VectorXd::Zero(n);
  running_mean = VectorXd::Zero(n);
  running_var = VectorXd::Ones(n);
}

std::vector<FieldTensor> FieldBatchNorm::forward(const std::vector<FieldTensor>& batch,
                                                 bool training) {
  if (batch.empty()) throw std::invalid_argument("FieldBatchNorm: empty batch");
  const int n_inst = static_cast<int>(field.instances.size());
  VectorXd mean(n_inst), var(n_inst);

  if (training) {
    for (int inst = 0; inst < n_inst; ++inst) {
      const auto& info = field.instances[inst];
      double sum = 0.0, sum2 = 0.0;
      size_t count = 0;
      for (const auto& t : batch) {
        const size_t vox = t.voxels();
        for (int c = info.offset; c < info.offset + info.dim; ++c) {
          const double* p = t.channel(c);
          for (size_t v = 0; v < vox; ++v) {
            sum += p[v];
            sum2 += p[v] * p[v];
          }
        }
        count += vox * info.dim;
      }
      mean(inst) = sum / count;
      var(inst) = sum2 / count - mean(inst) * mean(inst);
    }
    batch_mean_ = mean;
    batch_var_ = var;
    running_mean = (1.0 - momentum) * running_mean + momentum * mean;
    running_var = (1.0 - momentum) * running_var + momentum * var;
  } else {
    mean = running_mean;
    var = running_var;
  }

  std::vector<FieldTensor> out = batch;
  for (int inst = 0; inst < n_inst; ++inst) {
    const auto& info = field.instances[inst];
    const double scale = gamma(inst) / std::sqrt(var(inst) + eps);
    const double shift = beta(inst) - mean(inst) * scale;
    for (auto& t : out) {
      for (int c = info.offset; c < info.offset + info.dim; ++c) {
        double* p = t.channel(c);
        for (size_t v = 0; v < t.voxels(); ++v) p[v] = p[v] * scale + shift;
      }
    }
  }
  return out;
}

FieldBatchNorm::Grads FieldBatchNorm::backward(
    const std::vector<FieldTensor>& batch,
    const std::vector<FieldTensor>& upstream) const {
  if (batch_mean_.size() == 0) {
    throw std::logic_error("FieldBatchNorm::backward: call forward(training) first");
  }
  const int n_inst = static_cast<int>(field.instances.size());
  Grads g;
  g.input_grads = upstream;  // same shapes; contents overwritten below
  g.dgamma = VectorXd::Zero(n_inst);
  g.dbeta = VectorXd::Zero(n_inst);

  for (int inst = 0; inst < n_inst; ++inst) {
    const auto& info = field.instances[inst];
    const double mu = batch_mean_(inst);
    const double inv_std = 1.0 / std::sqrt(batch_var_(inst) + eps);

    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    size_t count = 0;
    for (size_t bi = 0; bi < batch.size(); ++bi) {
      const size_t vox = batch[bi].voxels();
      for (int c = info.offset; c < info.offset + info.dim; ++c) {
        const double* x = batch[bi].channel(c);
        const double* dy = upstream[bi].channel(c);
        for (size_t v = 0; v < vox; ++v) {
          const double xhat = (x[v] - mu) * inv_std;
          sum_dy += dy[v];
          sum_dy_xhat += dy[v] * xhat;
        }
      }
      count += vox * info.dim;
    }
    g.dbeta(inst) = sum_dy;
    g.dgamma(inst) = sum_dy_xhat;

    const double n = static_cast<double>(count);
    const double k_gamma = gamma(inst) * inv_std;
    for (size_t bi = 0; bi < batch.size(); ++bi) {
      const size_t vox = batch[bi].voxels();
      for (int c = info.offset; c < info.offset + info.dim; ++c) {
        const double* x = batch[bi].channel(c);
        const double* dy = upstream[bi].channel(c);
        double* dx = g.input_grads[bi].channel(c);
        for (size_t v = 0; v < vox; ++v) {
          const double xhat = (x[v] - mu) * inv_std;
          dx[v] = k_gamma * (dy[v] - sum_dy / n - xhat * sum_dy_xhat / n);
        }
      }
    }
  }
  return g;
}

ScaleBatchNorm::ScaleBatchNorm(const FieldType& f) : field(f) {
  running_ms = VectorXd::Ones(static_cast<int>(field.instances.size()));
}

std::vector<FieldTensor> ScaleBatchNorm::forward(const std::vector<FieldTensor>& batch,
                                                 bool training) {
  if (batch.empty()) throw std::invalid_argument("ScaleBatchNorm: empty batch");
  const int n_inst = static_cast<int>(field.instances.size());
  VectorXd ms(n_inst);

  if (training) {
    for (int inst = 0; inst < n_inst; ++inst) {
      const auto& info = field.instances[inst];
      double sum2 = 0.0;
      size_t sites = 0;
      for (const auto& t : batch) {
        const size_t vox = t.voxels();
        for (int c = info.offset; c < info.offset + info.dim; ++c) {
          const double* p = t.channel(c);
          for (size_t v = 0; v < vox; ++v) sum2 += p[v] * p[v];
        }
        sites += vox;
      }
      ms(inst) = sum2 / sites;  // mean squared norm per voxel
    }
    running_ms = (1.0 - momentum) * running_ms + momentum * ms;
  } else {
    ms = running_ms;
  }

  std::vector<FieldTensor> out = batch;
  for (int inst = 0; inst < n_inst; ++inst) {
    const auto& info = field.instances[inst];
    const double scale = 1.0 / std::sqrt(ms(inst) + eps);
    for (auto& t : out) {
      for (int c = info.offset; c < info.offset + info.dim; ++c) {
        double* p = t.channel(c);
        for (size_t v = 0; v < t.voxels(); ++v) p[v] *= scale;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

FieldTensor avg_pool(const FieldTensor& input, int factor) {
  if (factor < 1) throw std::invalid_argument("avg_pool: factor must be >= 1");
  if (factor == 1) return input;
  if (input.n1 % factor || input.n2 % factor || input.n3 % factor) {
    throw std::invalid_argument("avg_pool: spatial dims must divide the factor");
  }
  FieldTensor out(input.field, input.n1 / factor, input.n2 / factor, input.n3 / factor);
  const double inv = 1.0 / (factor * factor * factor);
  for (int c = 0; c < input.channels(); ++c) {
    for (int i = 0; i < out.n1; ++i)
      for (int j = 0; j < out.n2; ++j)
        for (int k = 0; k < out.n3; ++k) {
          double sum = 0.0;
          for (int a = 0; a < factor; ++a)
            for (int b = 0; b < factor; ++b)
              for (int d = 0; d < factor; ++d)
                sum += input.at(c, i * factor + a, j * factor + b, k * factor + d);
          out.at(c, i, j, k) = sum * inv;
        }
  }
  return out;
}

FieldTensor avg_pool_backward(const FieldTensor& upstream, int factor,
                              const FieldType& field, int n1, int n2, int n3) {
  FieldTensor grad(field, n1, n2, n3);
  if (factor == 1) {
    grad.data = upstream.data;
    return grad;
  }
  const double inv = 1.0 / (factor * factor * factor);
  for (int c = 0; c < grad.channels(); ++c) {
    for (int i = 0; i < upstream.n1; ++i)
      for (int j = 0; j < upstream.n2; ++j)
        for (int k = 0; k < upstream.n3; ++k) {
          const double g = upstream.at(c, i, j, k) * inv;
          for (int a = 0; a < factor; ++a)
            for (int b = 0; b < factor; ++b)
              for (int d = 0; d < factor; ++d)
                grad.at(c, i * factor + a, j * factor + b, k * factor + d) = g;
        }
  }
  return grad;
}

VectorXd global_avg_pool(const FieldTensor& input) {
  VectorXd out(input.channels());
  const double inv = 1.0 / static_cast<double>(input.voxels());
  for (int c = 0; c < input.channels(); ++c) {
    const double* p = input.channel(c);
    double sum = 0.0;
    for (size_t v = 0; v < input.voxels(); ++v) sum += p[v];
    out(c) = sum * inv;
  }
  return out;
}

FieldTensor global_avg_pool_backward(const VectorXd& upstream, const FieldType& field,
                                     int n1, int n2, int n3) {
  FieldTensor grad(field, n1, n2, n3);
  const double inv = 1.0 / static_cast<double>(grad.voxels());
  for (int c = 0; c < grad.channels(); ++c) {
    double* p = grad.channel(c);
    for (size_t v = 0; v < grad.voxels(); ++v) p[v] = upstream(c) * inv;
  }
  return grad;
}

void DenseLayer::init_xavier(std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (weight.rows() + weight.cols()));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (int i = 0; i < weight.rows(); ++i)
    for (int j = 0; j < weight.cols(); ++j) weight(i, j) = u(rng);
  bias.setZero();
}

}  // namespace steer3d
