#include "steer3d/tetris.hpp"

#include <stdexcept>

#include "steer3d/voxel_rotate.hpp"

namespace steer3d {

const std::array<std::array<std::array<int, 3>, 4>, 8>& tetris_coordinates() {
  // The eight four-cell polycubes that are pairwise distinct under proper
  // rotations: the two screws form the chiral pair, the rest are achiral.
  static const std::array<std::array<std::array<int, 3>, 4>, 8> coords{{
      {{{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 1, 0}}},   // right screw
      {{{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, -1, 0}}},  // left screw
      {{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}},   // square
      {{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 0, 3}}},   // line
      {{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}}},   // corner tripod
      {{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 0}}},   // ell
      {{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 1}}},   // tee
      {{{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {1, 0, 2}}},   // planar skew
  }};
  return coords;
}

const std::array<const char*, 8>& tetris_names() {
  static const std::array<const char*, 8> names{"screw_right", "screw_left", "square",
                                                "line",        "corner",     "ell",
                                                "tee",         "skew"};
  return names;
}

LabeledDataset tetris_dataset(int grid, const GroupSpec& spec,
                              std::shared_ptr<const FiniteRotationGroup> group,
                              int block) {
  if (grid < 8) throw std::invalid_argument("tetris_dataset: grid must be >= 8");
  if (block <= 0) block = std::max(1, grid / 4);
  if (4 * block > grid) {
    throw std::invalid_argument("tetris_dataset: block too large for the grid");
  }

  LabeledDataset data;
  const FieldType scalar = FieldType::scalar(spec, std::move(group));
  for (int shape = 0; shape < 8; ++shape) {
    const auto& cells = tetris_coordinates()[shape];
    int lo[3] = {cells[0][0], cells[0][1], cells[0][2]};
    int hi[3] = {cells[0][0], cells[0][1], cells[0][2]};
    for (const auto& c : cells) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], c[a]);
        hi[a] = std::max(hi[a], c[a]);
      }
    }

    FieldTensor t(scalar, grid, grid, grid);
    for (const auto& c : cells) {
      // center the occupied bounding box on the grid
      int base[3];
      for (int a = 0; a < 3; ++a) {
        const int extent = (hi[a] - lo[a] + 1) * block;
        base[a] = (grid - extent) / 2 + (c[a] - lo[a]) * block;
      }
      for (int i = 0; i < block; ++i)
        for (int j = 0; j < block; ++j)
          for (int k = 0; k < block; ++k)
            t.at(0, base[0] + i, base[1] + j, base[2] + k) = 1.0;
    }
    data.emplace_back(std::move(t), shape);
  }
  return data;
}

LabeledDataset tetris_rotated_test_set(const LabeledDataset& canonical,
                                       const FiniteRotationGroup& cubic_group) {
  LabeledDataset out;
  for (const auto& element : cubic_group.elements) {
    const VoxelRotation rot{element, RotateMode::ExactCubic};
    for (const auto& [tensor, label] : canonical) {
      out.emplace_back(rotate_voxels(tensor, rot), label);
    }
  }
  return out;
}

}  // namespace steer3d
