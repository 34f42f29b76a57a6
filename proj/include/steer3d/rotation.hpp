#pragma once

#include <Eigen/Dense>
#include <random>

namespace steer3d {

using Mat3 = Eigen::Matrix3d;

/// A validated element of SO(3). Construction checks orthogonality and
/// det = +1 to 1e-12 (Frobenius), so downstream code can rely on g^-1 = g^T.
class Rotation3 {
 public:
  static constexpr double kValidationTol = 1e-12;

  explicit Rotation3(const Mat3& m);

  static Rotation3 identity() { return Rotation3(Mat3::Identity()); }

  const Mat3& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  Rotation3 inverse() const;
  Rotation3 operator*(const Rotation3& rhs) const;

  /// Frobenius distance to another rotation.
  double distance(const Rotation3& rhs) const {
    return (m_ - rhs.m_).norm();
  }

  bool is_identity(double tol = 1e-9) const {
    return (m_ - Mat3::Identity()).norm() < tol;
  }

  /// True when every entry is in {-1, 0, 1} with a single nonzero per
  /// row/column, i.e. the rotation maps the voxel grid onto itself.
  bool is_signed_permutation(double tol = 1e-9) const;

 private:
  Mat3 m_;
};

/// Rotation by alpha about the z-axis.
Rotation3 rot_z(double alpha);

/// Rotation by beta about the y-axis.
Rotation3 rot_y(double beta);

struct ZyzAngles {
  double alpha;  // in [-pi, pi]
  double beta;   // in [0, pi]
  double gamma;  // in [-pi, pi]
};

/// ZYZ Euler decomposition: g = Z(alpha) Y(beta) Z(gamma).
/// Gimbal cases (|sin beta| < 1e-9) resolve deterministically with gamma = 0
/// and the full z-rotation folded into alpha.
ZyzAngles euler_zyz(const Mat3& g);

/// Haar-uniform random rotation, sampled via ZYZ angles with
/// beta = acos(1 - 2u).
Rotation3 random_rotation(std::mt19937_64& rng);

}  // namespace steer3d
