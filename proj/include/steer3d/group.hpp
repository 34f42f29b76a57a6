#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "steer3d/rotation.hpp"

namespace steer3d {

enum class GroupKind { V, T, O, I, CN, DN, SO3 };

/// Names one of the supported 3D rotation groups. CN/DN carry the order
/// parameter n >= 1.
struct GroupSpec {
  GroupKind kind = GroupKind::O;
  int n = 0;

  static GroupSpec V() { return {GroupKind::V, 0}; }
  static GroupSpec T() { return {GroupKind::T, 0}; }
  static GroupSpec O() { return {GroupKind::O, 0}; }
  static GroupSpec I() { return {GroupKind::I, 0}; }
  static GroupSpec CN(int n) { return {GroupKind::CN, n}; }
  static GroupSpec DN(int n) { return {GroupKind::DN, n}; }
  static GroupSpec SO3() { return {GroupKind::SO3, 0}; }

  bool finite() const { return kind != GroupKind::SO3; }
  std::string name() const;

  /// Parses names like "O", "I", "CN-4", "DN-6", "SO3".
  static GroupSpec parse(const std::string& text);

  bool operator==(const GroupSpec& rhs) const {
    return kind == rhs.kind && (kind != GroupKind::CN && kind != GroupKind::DN
                                    ? true
                                    : n == rhs.n);
  }
};

/// A finite rotation group materialized as an element list plus its Cayley
/// table. Element 0 is always the identity; the rest follow breadth-first
/// discovery order from the generators, so the layout is reproducible.
struct FiniteRotationGroup {
  GroupSpec spec;
  std::vector<Rotation3> elements;
  Eigen::MatrixXi cayley;          // cayley(i, j) = index of elements[i] * elements[j]
  std::vector<int> generator_ids;  // indices into elements
  int identity_id = 0;

  int size() const { return static_cast<int>(elements.size()); }
  int mul(int i, int j) const { return cayley(i, j); }
  int inverse(int i) const;

  /// Index of the element closest to g; throws if the distance exceeds tol.
  int find(const Rotation3& g, double tol = 1e-9) const;

  nlohmann::json to_json() const;
};

/// The canonical generator matrices of each finite group kind:
/// exact signed permutations for V, T, O; the golden-ratio pair for I;
/// { Z(2pi/n) } for CN and { Z(2pi/n), diag(1,-1,-1) } for DN.
/// Rejects SO3 (infinite; use rot_z / rot_y directly).
std::vector<Rotation3> generators_of(const GroupSpec& spec);

/// Breadth-first closure of a generating set. Two elements are identified
/// when their Frobenius distance is below dedup_tol. Throws if the closure
/// exceeds max_size, which signals a non-finite generating set or a
/// tolerance failure.
FiniteRotationGroup generate_closure(const GroupSpec& spec,
                                     const std::vector<Rotation3>& generators,
                                     double dedup_tol = 1e-9,
                                     int max_size = 360);

/// Convenience: generators_of + generate_closure.
FiniteRotationGroup make_group(const GroupSpec& spec);
std::shared_ptr<const FiniteRotationGroup> make_group_shared(const GroupSpec& spec);

/// Partition of the element indices into left cosets g*H. The subgroup is
/// validated for closure first; the violating product pair is reported
/// otherwise. Cosets are ordered by their smallest member index (so the
/// first coset is H itself) and sorted internally.
std::vector<std::vector<int>> left_cosets(const FiniteRotationGroup& group,
                                          const std::vector<int>& subgroup_ids);

/// Locates the canonical copy of sub inside group: matches the generators of
/// sub among the group elements and closes them over the Cayley table.
/// Throws (naming the unmatched generator) if sub does not embed.
std::vector<int> embed_subgroup(const FiniteRotationGroup& group,
                                const GroupSpec& sub);

}  // namespace steer3d
