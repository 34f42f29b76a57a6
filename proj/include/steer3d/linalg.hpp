#pragma once

#include <Eigen/Dense>

namespace steer3d {

/// Kronecker product A (x) B.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Orthonormal basis of the null space of A, as columns, from the SVD of A:
/// right singular vectors whose singular value falls below rel_tol times the
/// largest one. Tall systems are first reduced by a Householder QR (which
/// leaves singular values and right singular vectors unchanged). Each basis
/// vector is sign-fixed so its largest-magnitude entry is positive.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rel_tol = 1e-8);

/// Dimension of the null space of the vertically stacked system
/// [blocks[0]; blocks[1]; ...], computed through the accumulated Gram matrix
/// sum_i B_i^T B_i. Eigenvalues of the Gram are the squared singular values
/// of the stack, so the count below (rel_tol * s_max)^2 equals the stacked
/// null dimension without forming the tall matrix.
int null_space_dim_stacked(const std::vector<Eigen::MatrixXd>& blocks,
                           double rel_tol = 1e-8);

}  // namespace steer3d
