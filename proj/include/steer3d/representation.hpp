#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "steer3d/group.hpp"

namespace steer3d {

using Eigen::MatrixXd;

enum class RepClass { Trivial, Regular, Quotient, Irrep, Sum };

/// Names a representation: trivial, regular, H-quotient, order-l irrep, or a
/// direct sum of those with multiplicities.
struct RepKind {
  RepClass cls = RepClass::Trivial;
  GroupSpec sub{};  // for Quotient: the subgroup H
  int l = 0;        // for Irrep
  std::vector<std::pair<RepKind, int>> terms;  // for Sum

  static RepKind trivial() { return {}; }
  static RepKind regular() { return {RepClass::Regular, {}, 0, {}}; }
  static RepKind quotient(GroupSpec h) { return {RepClass::Quotient, h, 0, {}}; }
  static RepKind irrep(int l) { return {RepClass::Irrep, {}, l, {}}; }
  static RepKind sum(std::vector<std::pair<RepKind, int>> terms) {
    return {RepClass::Sum, {}, 0, std::move(terms)};
  }

  /// Grammar: trivial | regular | quotient:<V|T|CN-n|DN-n> | irrep:<l>
  ///        | sum:<kind>x<mult>[+<kind>x<mult>...]
  static RepKind parse(const std::string& text);
  std::string name() const;

  bool basic() const { return cls != RepClass::Sum; }
  /// Expands nested sums into an ordered list of basic factors.
  std::vector<RepKind> factors() const;

  bool operator==(const RepKind& rhs) const { return name() == rhs.name(); }
};

/// A concrete group representation. Finite groups store one matrix per
/// element; SO(3) keeps a pure evaluator closure instead.
class Representation {
 public:
  Representation() = default;

  static Representation finite(RepKind kind,
                               std::shared_ptr<const FiniteRotationGroup> group,
                               std::vector<MatrixXd> matrices,
                               bool permutation_like);
  static Representation so3(RepKind kind, int dim,
                            std::function<MatrixXd(const Rotation3&)> eval);

  bool valid() const { return dim_ > 0; }
  bool is_finite() const { return group_ != nullptr; }
  int dim() const { return dim_; }
  const RepKind& kind() const { return kind_; }
  GroupSpec group_spec() const;
  const FiniteRotationGroup& group() const;
  const std::shared_ptr<const FiniteRotationGroup>& group_ptr() const { return group_; }

  /// Does the representation act by permutation matrices (so pointwise
  /// nonlinearities and per-feature batch statistics commute with it)?
  bool permutation_like() const { return permutation_like_; }

  /// Finite groups: matrix of the element with the given index.
  const MatrixXd& at(int element_id) const;

  /// Evaluate at an arbitrary rotation. Finite groups look the element up in
  /// the table; SO(3) calls the evaluator.
  MatrixXd operator()(const Rotation3& g) const;

  nlohmann::json to_json() const;

 private:
  RepKind kind_{};
  int dim_ = 0;
  bool permutation_like_ = false;
  std::shared_ptr<const FiniteRotationGroup> group_;
  std::vector<MatrixXd> matrices_;
  std::function<MatrixXd(const Rotation3&)> eval_;
};

Representation trivial_rep(std::shared_ptr<const FiniteRotationGroup> group);
Representation trivial_rep_so3();
Representation regular_rep(std::shared_ptr<const FiniteRotationGroup> group);
Representation quotient_rep(std::shared_ptr<const FiniteRotationGroup> group,
                            const std::vector<int>& subgroup_ids,
                            RepKind kind = RepKind::quotient(GroupSpec::CN(1)));

/// Real Wigner-D matrix of order l in the real-spherical-harmonic basis
/// (Condon-Shortley phase, components ordered m = -l..l, so l = 1 transforms
/// like (y, z, x)). Evaluated via the ZYZ Euler decomposition of g.
MatrixXd wigner_d_real(int l, const Rotation3& g);

/// The fixed 3x3 permutation relating the order-1 real harmonics to
/// coordinates: wigner_d_real(1, g) == axis_permutation() * g * axis_permutation()^T.
Mat3 wigner_axis_permutation();

Representation irrep_rep(int l);

/// Block-diagonal direct sum. All inputs must live over the same group.
Representation direct_sum(const std::vector<Representation>& reps);

/// Builds the representation named by kind over the given group handle
/// (pass nullptr group for SO(3) specs).
Representation make_representation(const GroupSpec& spec,
                                   std::shared_ptr<const FiniteRotationGroup> group,
                                   const RepKind& kind);

/// Max homomorphism residual ||rho(g) rho(h) - rho(gh)||_F. Finite groups
/// check every pair; SO(3) samples n_samples random pairs.
double check_homomorphism(const Representation& rep, int n_samples = 100,
                          unsigned seed = 0);

}  // namespace steer3d
