#pragma once

#include <array>

#include "steer3d/train.hpp"

namespace steer3d {

/// Cell coordinates of the eight canonical four-cell shapes, including the
/// chiral pair (indices 0 and 1).
const std::array<std::array<std::array<int, 3>, 4>, 8>& tetris_coordinates();
const std::array<const char*, 8>& tetris_names();

/// The eight shapes voxelized into a grid^3 scalar field, centered, one cell
/// mapped to a block^3 cube of ones (block <= grid/4 so the line fits;
/// pass 0 for the default grid/4). Labels are the shape indices.
/// Deterministic.
LabeledDataset tetris_dataset(int grid, const GroupSpec& spec,
                              std::shared_ptr<const FiniteRotationGroup> group,
                              int block = 0);

/// Every exact cubic rotation of every shape (24 * 8 samples, labels kept).
LabeledDataset tetris_rotated_test_set(const LabeledDataset& canonical,
                                       const FiniteRotationGroup& cubic_group);

}  // namespace steer3d
