#pragma once

#include <string>
#include <utility>
#include <vector>

#include "steer3d/representation.hpp"

namespace steer3d {

/// A feature-field type: an ordered list of (representation kind,
/// multiplicity) factors over one group, with the assembled direct-sum
/// representation materialized once at construction.
struct FieldType {
  std::vector<std::pair<RepKind, int>> factors;
  Representation rep;  // block-diagonal sum over all factor instances

  struct Instance {
    RepKind kind;
    int dim;
    int offset;  // first channel of this instance
  };
  std::vector<Instance> instances;

  static FieldType make(const GroupSpec& spec,
                        std::shared_ptr<const FiniteRotationGroup> group,
                        std::vector<std::pair<RepKind, int>> factors);
  static FieldType scalar(const GroupSpec& spec,
                          std::shared_ptr<const FiniteRotationGroup> group) {
    return make(spec, std::move(group), {{RepKind::trivial(), 1}});
  }

  int channels() const { return rep.dim(); }
  bool permutation_like() const { return rep.permutation_like(); }
  GroupSpec group_spec() const { return rep.group_spec(); }
  std::string name() const { return rep.kind().name(); }

  bool operator==(const FieldType& rhs) const { return name() == rhs.name(); }
};

/// A dense channels x n1 x n2 x n3 voxel tensor carrying its field type.
/// Spatial axes follow the coordinate axes x1, x2, x3.
struct FieldTensor {
  FieldType field;
  int n1 = 0, n2 = 0, n3 = 0;
  std::vector<double> data;  // [c][i1][i2][i3]

  FieldTensor() = default;
  FieldTensor(FieldType f, int d1, int d2, int d3)
      : field(std::move(f)),
        n1(d1),
        n2(d2),
        n3(d3),
        data(static_cast<size_t>(field.channels()) * d1 * d2 * d3, 0.0) {}

  int channels() const { return field.channels(); }
  size_t voxels() const { return static_cast<size_t>(n1) * n2 * n3; }

  double& at(int c, int i, int j, int k) {
    return data[((static_cast<size_t>(c) * n1 + i) * n2 + j) * n3 + k];
  }
  double at(int c, int i, int j, int k) const {
    return data[((static_cast<size_t>(c) * n1 + i) * n2 + j) * n3 + k];
  }
  double* channel(int c) { return data.data() + static_cast<size_t>(c) * voxels(); }
  const double* channel(int c) const {
    return data.data() + static_cast<size_t>(c) * voxels();
  }

  double norm() const;
  FieldTensor& operator+=(const FieldTensor& rhs);
  FieldTensor& operator*=(double s);
};

}  // namespace steer3d
