#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "steer3d/basis.hpp"

namespace steer3d {

/// The ten differential operators of the filter model, in coefficient order:
/// identity, the three first derivatives, then the six second derivatives
/// (11, 12, 13, 22, 23, 33).
enum class PdoIndex : int {
  Identity = 0,
  X1, X2, X3,
  X11, X12, X13, X22, X23, X33,
};
inline constexpr int kNumPdos = 10;

const char* pdo_name(PdoIndex p);

/// A k x k x k tap pattern applied by cross-correlation:
/// (s * f)(x) = sum_n w(n) f(x + n), offsets n in [-k/2, k/2]^3.
struct Stencil3 {
  int k = 3;
  Eigen::Vector3d spacing{1.0, 1.0, 1.0};
  std::vector<double> w;  // size k^3, index ((n1+r)*k + (n2+r))*k + (n3+r)

  explicit Stencil3(int k_ = 3) : k(k_), w(static_cast<size_t>(k_) * k_ * k_, 0.0) {}

  int radius() const { return k / 2; }
  double& at(int n1, int n2, int n3) {
    const int r = radius();
    return w[(static_cast<size_t>(n1 + r) * k + (n2 + r)) * k + (n3 + r)];
  }
  double at(int n1, int n2, int n3) const {
    const int r = radius();
    return w[(static_cast<size_t>(n1 + r) * k + (n2 + r)) * k + (n3 + r)];
  }

  /// Moment sum_n w(n) n1^e1 n2^e2 n3^e3 (in grid units).
  double moment(int e1, int e2, int e3) const;
};

/// One stencil per differential operator, sharing the kernel size.
struct DiscretizationScheme {
  std::string name;
  int k = 3;
  std::array<Stencil3, kNumPdos> stencils{
      Stencil3{}, Stencil3{}, Stencil3{}, Stencil3{}, Stencil3{},
      Stencil3{}, Stencil3{}, Stencil3{}, Stencil3{}, Stencil3{}};

  const Stencil3& operator[](PdoIndex p) const { return stencils[static_cast<int>(p)]; }
  Stencil3& operator[](PdoIndex p) { return stencils[static_cast<int>(p)]; }

  nlohmann::json to_json() const;
};

/// Central-difference 3x3x3 stencils, exact on polynomials of total degree
/// <= 2. Anisotropic spacings are supported; equality h1 = h2 = h3 is what
/// makes the cubic-rotation exactness argument go through.
DiscretizationScheme fd_stencils(double h1 = 1.0, double h2 = 1.0, double h3 = 1.0);

/// Stencils sampled from the analytic partial derivatives of an isotropic
/// Gaussian of width sigma. With moment_correct (default) each derivative
/// stencil receives the minimal-norm adjustment that makes it exact on
/// polynomials of total degree <= 2, compensating the truncation bias of the
/// sampled Gaussian; the identity stencil is only normalized to unit sum.
DiscretizationScheme gaussian_stencils(int k, double sigma, bool moment_correct = true);

/// A dense stencil bank: weights[o][i][n] for out channel o, in channel i.
struct DiscreteFilter {
  int out_channels = 0;
  int in_channels = 0;
  int k = 3;
  std::string provenance;  // scheme name
  std::vector<double> w;   // [o][i][n1][n2][n3], offsets stored ascending

  DiscreteFilter() = default;
  DiscreteFilter(int out_ch, int in_ch, int k_);

  double& at(int o, int i, int n1, int n2, int n3);
  double at(int o, int i, int n1, int n2, int n3) const;
  size_t taps() const { return static_cast<size_t>(k) * k * k; }
  double* block(int o, int i) { return w.data() + (static_cast<size_t>(o) * in_channels + i) * taps(); }
  const double* block(int o, int i) const {
    return w.data() + (static_cast<size_t>(o) * in_channels + i) * taps();
  }
};

/// Combines coefficient matrices with the scheme's stencils:
/// weights[o][i] = sum_p A_p[o][i] * stencil_p.
DiscreteFilter discretize(const PdoCoefficients& coeffs,
                          const DiscretizationScheme& scheme);

}  // namespace steer3d
