#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "steer3d/representation.hpp"

namespace steer3d {

/// Coefficients of a filter built from the identity plus all first- and
/// second-order partial derivatives, grouped by differential order:
///   b0 = A0                                   (K' x K)
///   b1 = [A1, A2, A3]                         (K' x 3K)
///   b2 = [A11, A12, A13, A22, A23, A33]       (K' x 6K)
struct PdoCoefficients {
  Eigen::MatrixXd b0, b1, b2;

  static PdoCoefficients zero(int out_dim, int in_dim);
  int out_dim() const { return static_cast<int>(b0.rows()); }
  int in_dim() const { return static_cast<int>(b0.cols()); }
};

/// The fixed 6x9 matrix mapping the Kronecker square of a vector to the six
/// independent symmetric coordinates (11, 12, 13, 22, 23, 33), and its
/// Moore-Penrose inverse.
Eigen::MatrixXd p_matrix();
Eigen::MatrixXd p_dagger();

/// Left-hand sides of the homogeneous constraint systems for one rotation g:
///   m0 vec(B0) = 0,  m1 vec(B1) = 0,  m2 vec(B2) = 0,
/// with
///   m0 = I_K  (x) rho'(g) - rho(g)^T (x) I_K'
///   m1 = I_3K (x) rho'(g) - (g (x) rho(g))^T (x) I_K'
///   m2 = I_6K (x) rho'(g) - (P (g (x) g) P+ (x) rho(g))^T (x) I_K'
struct ConstraintBlocks {
  Eigen::MatrixXd m0, m1, m2;
};

ConstraintBlocks constraint_blocks(const Mat3& g, const Eigen::MatrixXd& rho_in_g,
                                   const Eigen::MatrixXd& rho_out_g);

/// Right-hand-side action matrices of the unvectorized constraints
/// rho'(g) B = B * rhs(g), one per differential order.
struct ConstraintRhs {
  Eigen::MatrixXd r0, r1, r2;
};

ConstraintRhs constraint_rhs(const Mat3& g, const Eigen::MatrixXd& rho_in_g);

/// An orthonormal basis of the equivariant coefficient space between two
/// feature fields, one list per differential order.
struct KernelBasis {
  Representation rho_in;
  Representation rho_out;
  std::vector<Eigen::MatrixXd> basis0;  // each K' x K
  std::vector<Eigen::MatrixXd> basis1;  // each K' x 3K
  std::vector<Eigen::MatrixXd> basis2;  // each K' x 6K

  std::array<int, 3> dims() const {
    return {static_cast<int>(basis0.size()), static_cast<int>(basis1.size()),
            static_cast<int>(basis2.size())};
  }
  int total() const { return dims()[0] + dims()[1] + dims()[2]; }

  /// Linear combination of all basis elements; coefficient layout is
  /// [basis0..., basis1..., basis2...].
  PdoCoefficients combine(const Eigen::VectorXd& coefficients) const;

  /// Adjoint of combine: inner products of a coefficient-space gradient with
  /// every basis element, in the same layout.
  Eigen::VectorXd coefficient_gradients(const PdoCoefficients& grad) const;

  nlohmann::json to_json() const;
};

/// The rotations the solver stacks constraints over: the canonical generators
/// for finite groups, { Z(1), Y(1) } for SO(3).
std::vector<Rotation3> solver_generators(const GroupSpec& spec,
                                         const FiniteRotationGroup* group);

/// Solves the three constraint systems stacked over the solver generators by
/// SVD null-space extraction; singular values below rel_tol times the largest
/// are treated as zero. An empty basis is a valid result.
KernelBasis solve_basis(const Representation& rho_in, const Representation& rho_out,
                        double rel_tol = 1e-8);

/// Solves a pair of direct-sum fields factor pair by factor pair and embeds
/// each per-pair solution into its block position. Equals solve_basis on the
/// assembled representations, at a fraction of the cost.
KernelBasis solve_basis_blockwise(const Representation& rho_in,
                                  const Representation& rho_out,
                                  double rel_tol = 1e-8);

/// Max residual of rho'(g) B = B * rhs(g) over every basis element and every
/// group element (finite) or n_samples random rotations (SO(3)). This is the
/// full-group check that generator-only solving must survive.
double verify_basis(const KernelBasis& basis, int n_samples = 200, unsigned seed = 0);

/// All-pairs solution-space dimensions for a list of field kinds.
struct DimensionTable {
  std::vector<RepKind> kinds;
  std::vector<std::vector<std::array<int, 3>>> dims;  // [out? no: [in][out]]
};

DimensionTable dimension_table(const GroupSpec& spec,
                               std::shared_ptr<const FiniteRotationGroup> group,
                               const std::vector<RepKind>& kinds,
                               double rel_tol = 1e-8);

/// Serialization round-trip for basis dumps (the CLI format).
KernelBasis basis_from_json(const nlohmann::json& j);

}  // namespace steer3d
