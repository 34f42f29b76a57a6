#pragma once

#include "steer3d/field.hpp"

namespace steer3d {

enum class RotateMode {
  ExactCubic,  // index permutation about the grid center, no arithmetic error
  Trilinear,   // resampling with trilinear interpolation, zero outside
};

struct VoxelRotation {
  Rotation3 g = Rotation3::identity();
  RotateMode mode = RotateMode::ExactCubic;
};

/// The field group action on voxel data: rotate the sampling grid by g and
/// mix channels with rho(g). Exact mode requires a signed permutation matrix
/// and cubic spatial dims.
FieldTensor rotate_voxels(const FieldTensor& input, const VoxelRotation& rot);

}  // namespace steer3d
