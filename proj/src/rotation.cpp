#include "steer3d/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace steer3d {

Rotation3::Rotation3(const Mat3& m) : m_(m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("Rotation3: non-finite entries");
  }
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  if (ortho > kValidationTol) {
    throw std::invalid_argument("Rotation3: not orthogonal (residual " +
                                std::to_string(ortho) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > kValidationTol) {
    throw std::invalid_argument("Rotation3: determinant != +1");
  }
}

Rotation3 Rotation3::inverse() const { return Rotation3(m_.transpose()); }

Rotation3 Rotation3::operator*(const Rotation3& rhs) const {
  // Plain product, no re-orthonormalization: products of signed permutation
  // matrices stay bit-exact, and generator chains for the irrational groups
  // accumulate well under the 1e-12 validation tolerance.
  return Rotation3(m_ * rhs.m_);
}

bool Rotation3::is_signed_permutation(double tol) const {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double a = std::abs(m_(i, j));
      if (a > tol && std::abs(a - 1.0) > tol) return false;
    }
  }
  return true;
}

Rotation3 rot_z(double alpha) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("rot_z: non-finite angle");
  Mat3 m;
  m << std::cos(alpha), -std::sin(alpha), 0.0,
       std::sin(alpha),  std::cos(alpha), 0.0,
       0.0,              0.0,             1.0;
  return Rotation3(m);
}

Rotation3 rot_y(double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("rot_y: non-finite angle");
  Mat3 m;
  m <<  std::cos(beta), 0.0, std::sin(beta),
        0.0,            1.0, 0.0,
       -std::sin(beta), 0.0, std::cos(beta);
  return Rotation3(m);
}

ZyzAngles euler_zyz(const Mat3& g) {
  ZyzAngles e{};
  const double c = std::clamp(g(2, 2), -1.0, 1.0);
  e.beta = std::acos(c);
  if (std::abs(std::sin(e.beta)) < 1e-9) {
    e.gamma = 0.0;
    if (c > 0.0) {
      // g = Z(alpha + gamma)
      e.beta = 0.0;
      e.alpha = std::atan2(g(1, 0), g(0, 0));
    } else {
      // g = Z(alpha) Y(pi): first column is (-cos a, -sin a, 0)
      e.beta = M_PI;
      e.alpha = std::atan2(-g(1, 0), -g(0, 0));
    }
  } else {
    e.alpha = std::atan2(g(1, 2), g(0, 2));
    e.gamma = std::atan2(g(2, 1), -g(2, 0));
  }
  return e;
}

Rotation3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double alpha = 2.0 * M_PI * u01(rng);
  const double gamma = 2.0 * M_PI * u01(rng);
  const double beta = std::acos(std::clamp(1.0 - 2.0 * u01(rng), -1.0, 1.0));
  return rot_z(alpha) * rot_y(beta) * rot_z(gamma);
}

}  // namespace steer3d
