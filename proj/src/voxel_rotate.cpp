#include "steer3d/voxel_rotate.hpp"

#include <cmath>
#include <stdexcept>

namespace steer3d {

using Eigen::MatrixXd;

namespace {

void mix_channels(FieldTensor& t, const MatrixXd& rho) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMat> m(t.data.data(), t.channels(), static_cast<Eigen::Index>(t.voxels()));
  m = (rho * m).eval();
}

}  // namespace

FieldTensor rotate_voxels(const FieldTensor& input, const VoxelRotation& rot) {
  FieldTensor out(input.field, input.n1, input.n2, input.n3);

  if (rot.mode == RotateMode::ExactCubic) {
    if (!rot.g.is_signed_permutation()) {
      throw std::invalid_argument(
          "rotate_voxels: exact mode needs a signed permutation rotation");
    }
    if (input.n1 != input.n2 || input.n2 != input.n3) {
      throw std::invalid_argument("rotate_voxels: exact mode needs cubic dims");
    }
    const int d = input.n1;
    // Doubled integer coordinates about the grid center keep everything exact
    // for both parities of d.
    Eigen::Matrix3i gt;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) gt(r, c) = static_cast<int>(std::lround(rot.g(c, r)));

    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          const Eigen::Vector3i u(2 * i - (d - 1), 2 * j - (d - 1), 2 * k - (d - 1));
          const Eigen::Vector3i v = gt * u;
          const int si = (v(0) + (d - 1)) / 2;
          const int sj = (v(1) + (d - 1)) / 2;
          const int sk = (v(2) + (d - 1)) / 2;
          for (int c = 0; c < input.channels(); ++c) {
            out.at(c, i, j, k) = input.at(c, si, sj, sk);
          }
        }
      }
    }
  } else {
    const Mat3 gt = rot.g.matrix().transpose();
    const Eigen::Vector3d center(0.5 * (input.n1 - 1), 0.5 * (input.n2 - 1),
                                 0.5 * (input.n3 - 1));
    for (int i = 0; i < out.n1; ++i) {
      for (int j = 0; j < out.n2; ++j) {
        for (int k = 0; k < out.n3; ++k) {
          const Eigen::Vector3d p =
              gt * (Eigen::Vector3d(i, j, k) - center) + center;
          const int i0 = static_cast<int>(std::floor(p(0)));
          const int j0 = static_cast<int>(std::floor(p(1)));
          const int k0 = static_cast<int>(std::floor(p(2)));
          const double fi = p(0) - i0, fj = p(1) - j0, fk = p(2) - k0;
          for (int c = 0; c < input.channels(); ++c) {
            double acc = 0.0;
            for (int a = 0; a <= 1; ++a) {
              for (int b = 0; b <= 1; ++b) {
                for (int e = 0; e <= 1; ++e) {
                  const int ii = i0 + a, jj = j0 + b, kk = k0 + e;
                  if (ii < 0 || ii >= input.n1 || jj < 0 || jj >= input.n2 || kk < 0 ||
                      kk >= input.n3) {
                    continue;  // zero outside
                  }
                  const double w = (a ? fi : 1.0 - fi) * (b ? fj : 1.0 - fj) *
                                   (e ? fk : 1.0 - fk);
                  acc += w * input.at(c, ii, jj, kk);
                }
              }
            }
            out.at(c, i, j, k) = acc;
          }
        }
      }
    }
  }

  mix_channels(out, input.field.rep(rot.g));
  return out;
}

}  // namespace steer3d
