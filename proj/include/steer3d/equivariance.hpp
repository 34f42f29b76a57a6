#pragma once

#include <iosfwd>
#include <optional>

#include "steer3d/model.hpp"
#include "steer3d/voxel_rotate.hpp"

namespace steer3d {

struct ErrorRecord {
  std::string scheme;
  int kernel_size = 3;
  double sigma = 0.0;
  int rotation_id = 0;
  std::optional<double> error;  // empty when the reference output has zero norm
};

struct ErrorReport {
  std::vector<ErrorRecord> records;

  int defined() const;
  double mean() const;
  double stddev() const;
  nlohmann::json summary_json() const;  // {mean, std, n}
  void write_csv(std::ostream& os) const;
};

/// Relative commutation error of one layer per (rotation, input) pair:
/// ||pi'(g)[L[f]] - L[pi(g)[f]]|| / ||L[f]||, restricted to the centered
/// interior region that excludes crop_margin voxels per side (pass -1 for the
/// default ceil(k/2)). Zero-norm references are reported as undefined.
ErrorReport layer_equivariance_error(const EquivConvLayer& layer,
                                     const std::vector<VoxelRotation>& rotations,
                                     const std::vector<FieldTensor>& inputs,
                                     int crop_margin = -1);

/// Whole-model invariance statistic per (rotation, input) pair:
/// ||Phi[pi(g)[I]] - Phi[I]|| / ||Phi[I]||. Requires an invariant head
/// (trivial fields into the global pool).
ErrorReport model_equivariance_error(Model& model,
                                     const std::vector<VoxelRotation>& rotations,
                                     const std::vector<FieldTensor>& inputs);

/// White noise convolved with a sampled Gaussian: the smooth random test
/// signal for rotation-error sweeps.
FieldTensor smooth_noise(const FieldType& field, int n, double smooth_sigma,
                         std::mt19937_64& rng);

}  // namespace steer3d
