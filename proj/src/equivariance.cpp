#include "steer3d/equivariance.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace steer3d {

int ErrorReport::defined() const {
  int n = 0;
  for (const auto& r : records) n += r.error.has_value();
  return n;
}

double ErrorReport::mean() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.error) {
      sum += *r.error;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

double ErrorReport::stddev() const {
  const double mu = mean();
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.error) {
      sum += (*r.error - mu) * (*r.error - mu);
      ++n;
    }
  }
  return n > 1 ? std::sqrt(sum / (n - 1)) : 0.0;
}

nlohmann::json ErrorReport::summary_json() const {
  return {{"mean", mean()}, {"std", stddev()}, {"n", defined()}};
}

void ErrorReport::write_csv(std::ostream& os) const {
  os << "scheme,kernel_size,sigma,rotation_id,error\n";
  for (const auto& r : records) {
    os << r.scheme << "," << r.kernel_size << "," << r.sigma << "," << r.rotation_id
       << ",";
    if (r.error) {
      os << *r.error;
    } else {
      os << "undefined";
    }
    os << "\n";
  }
}

namespace {

double cropped_sq_norm(const FieldTensor& t, int margin) {
  double sum = 0.0;
  for (int c = 0; c < t.channels(); ++c) {
    for (int i = margin; i < t.n1 - margin; ++i)
      for (int j = margin; j < t.n2 - margin; ++j)
        for (int k = margin; k < t.n3 - margin; ++k) {
          const double v = t.at(c, i, j, k);
          sum += v * v;
        }
  }
  return sum;
}

double cropped_sq_dist(const FieldTensor& a, const FieldTensor& b, int margin) {
  double sum = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int i = margin; i < a.n1 - margin; ++i)
      for (int j = margin; j < a.n2 - margin; ++j)
        for (int k = margin; k < a.n3 - margin; ++k) {
          const double v = a.at(c, i, j, k) - b.at(c, i, j, k);
          sum += v * v;
        }
  }
  return sum;
}

}  // namespace

ErrorReport layer_equivariance_error(const EquivConvLayer& layer,
                                     const std::vector<VoxelRotation>& rotations,
                                     const std::vector<FieldTensor>& inputs,
                                     int crop_margin) {
  const int margin =
      crop_margin >= 0 ? crop_margin : (layer.scheme.k + 1) / 2;

  ErrorReport report;
  for (size_t ri = 0; ri < rotations.size(); ++ri) {
    const auto& rot = rotations[ri];
    for (const auto& input : inputs) {
      const FieldTensor ref = layer.forward(input);
      if (2 * margin >= ref.n1 || 2 * margin >= ref.n2 || 2 * margin >= ref.n3) {
        throw std::invalid_argument("layer_equivariance_error: crop leaves no interior");
      }
      VoxelRotation out_rot = rot;
      const FieldTensor lhs = [&] {
        FieldTensor moved = rotate_voxels(ref, out_rot);
        // output channels transform with the layer's output field
        return moved;
      }();
      const FieldTensor rhs = layer.forward(rotate_voxels(input, rot));

      ErrorRecord rec;
      rec.scheme = layer.scheme.name;
      rec.kernel_size = layer.scheme.k;
      rec.rotation_id = static_cast<int>(ri);
      const double denom = std::sqrt(cropped_sq_norm(ref, margin));
      if (denom == 0.0) {
        rec.error = std::nullopt;
      } else {
        rec.error = std::sqrt(cropped_sq_dist(lhs, rhs, margin)) / denom;
      }
      report.records.push_back(std::move(rec));
    }
  }
  return report;
}

ErrorReport model_equivariance_error(Model& model,
                                     const std::vector<VoxelRotation>& rotations,
                                     const std::vector<FieldTensor>& inputs) {
  if (!model.invariant_head()) {
    throw std::invalid_argument(
        "model_equivariance_error: model must end in a globally pooled trivial field");
  }
  ErrorReport report;
  std::vector<FieldTensor> refs = inputs;
  const auto ref_out = model.forward(refs, /*training=*/false);

  for (size_t ri = 0; ri < rotations.size(); ++ri) {
    for (size_t s = 0; s < inputs.size(); ++s) {
      std::vector<FieldTensor> moved{rotate_voxels(inputs[s], rotations[ri])};
      const auto out = model.forward(moved, /*training=*/false);

      ErrorRecord rec;
      rec.scheme = model.spec().scheme;
      rec.kernel_size = model.spec().k;
      rec.sigma = model.spec().sigma;
      rec.rotation_id = static_cast<int>(ri);
      const double denom = ref_out[s].norm();
      if (denom == 0.0) {
        rec.error = std::nullopt;
      } else {
        rec.error = (out[0] - ref_out[s]).norm() / denom;
      }
      report.records.push_back(std::move(rec));
    }
  }
  return report;
}

FieldTensor smooth_noise(const FieldType& field, int n, double smooth_sigma,
                         std::mt19937_64& rng) {
  FieldTensor noise(field, n, n, n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : noise.data) v = gauss(rng);
  if (smooth_sigma <= 0.0) return noise;

  int k = 2 * static_cast<int>(std::ceil(2.0 * smooth_sigma)) + 1;
  if (k >= n) k = (n % 2 == 0) ? n - 1 : n;
  const Stencil3 kernel = gaussian_stencils(k, smooth_sigma, false)[PdoIndex::Identity];

  FieldTensor out(field, n, n, n);
  const int r = kernel.radius();
  for (int c = 0; c < noise.channels(); ++c) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          double acc = 0.0;
          for (int a = std::max(-r, -i); a <= std::min(r, n - 1 - i); ++a)
            for (int b = std::max(-r, -j); b <= std::min(r, n - 1 - j); ++b)
              for (int e = std::max(-r, -l); e <= std::min(r, n - 1 - l); ++e)
                acc += kernel.at(a, b, e) * noise.at(c, i + a, j + b, l + e);
          out.at(c, i, j, l) = acc;
        }
  }
  return out;
}

}  // namespace steer3d
