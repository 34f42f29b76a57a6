#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "steer3d/group.hpp"
#include "steer3d/stencil.hpp"

using namespace steer3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

/// Cross-correlate a stencil with samples of f (physical coordinates given by
/// the stencil spacing) at grid point x0.
double apply_stencil(const Stencil3& st, const std::function<double(Vector3d)>& f,
                     const Eigen::Vector3i& x0) {
  const int r = st.radius();
  double sum = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = -r; c <= r; ++c) {
        const Vector3d x((x0(0) + a) * st.spacing(0), (x0(1) + b) * st.spacing(1),
                         (x0(2) + c) * st.spacing(2));
        sum += st.at(a, b, c) * f(x);
      }
  return sum;
}

}  // namespace

TEST_CASE("fd stencil taps") {
  const auto s = fd_stencils(2.0, 1.0, 1.0);

  CHECK(s[PdoIndex::X1].at(1, 0, 0) == 0.25);
  CHECK(s[PdoIndex::X1].at(-1, 0, 0) == -0.25);
  CHECK(s[PdoIndex::X1].at(0, 0, 0) == 0.0);
  CHECK(s[PdoIndex::X1].at(0, 1, 0) == 0.0);

  CHECK(s[PdoIndex::X11].at(0, 0, 0) == -0.5);
  CHECK(s[PdoIndex::X11].at(1, 0, 0) == 0.25);
  CHECK(s[PdoIndex::X11].at(-1, 0, 0) == 0.25);

  // mixed: corner signs follow n1 * n2
  CHECK(s[PdoIndex::X12].at(1, 1, 0) == 0.125);
  CHECK(s[PdoIndex::X12].at(-1, -1, 0) == 0.125);
  CHECK(s[PdoIndex::X12].at(1, -1, 0) == -0.125);
  CHECK(s[PdoIndex::X12].at(-1, 1, 0) == -0.125);

  CHECK(s[PdoIndex::Identity].at(0, 0, 0) == 1.0);
  CHECK(s[PdoIndex::Identity].moment(0, 0, 0) == 1.0);
}

TEST_CASE("fd stencils reproduce derivatives of quadratics exactly") {
  const Vector3d h(0.5, 1.0, 2.0);
  const auto s = fd_stencils(h(0), h(1), h(2));

  // f(x) = 1 + 2 x1 - x2 + 0.5 x3 + 3 x1^2 - x1 x2 + 2 x1 x3 + x2^2 - 4 x2 x3 + 1.5 x3^2
  const auto f = [](Vector3d x) {
    return 1.0 + 2.0 * x(0) - x(1) + 0.5 * x(2) + 3.0 * x(0) * x(0) -
           x(0) * x(1) + 2.0 * x(0) * x(2) + x(1) * x(1) - 4.0 * x(1) * x(2) +
           1.5 * x(2) * x(2);
  };
  const Eigen::Vector3i x0(2, -1, 3);
  const Vector3d xp(x0(0) * h(0), x0(1) * h(1), x0(2) * h(2));

  const double d1 = 2.0 + 6.0 * xp(0) - xp(1) + 2.0 * xp(2);
  const double d2 = -1.0 - xp(0) + 2.0 * xp(1) - 4.0 * xp(2);
  const double d3 = 0.5 + 2.0 * xp(0) - 4.0 * xp(1) + 3.0 * xp(2);

  CHECK(apply_stencil(s[PdoIndex::Identity], f, x0) == doctest::Approx(f(xp)).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X1], f, x0) == doctest::Approx(d1).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X2], f, x0) == doctest::Approx(d2).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X3], f, x0) == doctest::Approx(d3).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X11], f, x0) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X12], f, x0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X13], f, x0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X22], f, x0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X23], f, x0) == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(apply_stencil(s[PdoIndex::X33], f, x0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gaussian stencil symmetry") {
  for (bool corrected : {false, true}) {
    const auto s = gaussian_stencils(5, 1.0, corrected);
    const int r = 2;
    for (int a = -r; a <= r; ++a) {
      for (int b = -r; b <= r; ++b) {
        for (int c = -r; c <= r; ++c) {
          // first order: antisymmetric along the axis
          CHECK(s[PdoIndex::X1].at(a, b, c) == doctest::Approx(-s[PdoIndex::X1].at(-a, b, c)).epsilon(1e-13));
          // pure second order: even in every axis
          CHECK(s[PdoIndex::X22].at(a, b, c) == doctest::Approx(s[PdoIndex::X22].at(-a, -b, -c)).epsilon(1e-13));
          // mixed: odd in each involved axis, even in the third
          CHECK(s[PdoIndex::X12].at(a, b, c) == doctest::Approx(-s[PdoIndex::X12].at(-a, b, c)).epsilon(1e-13));
          CHECK(s[PdoIndex::X12].at(a, b, c) == doctest::Approx(-s[PdoIndex::X12].at(a, -b, c)).epsilon(1e-13));
          CHECK(s[PdoIndex::X12].at(a, b, c) == doctest::Approx(s[PdoIndex::X12].at(a, b, -c)).epsilon(1e-13));
        }
      }
    }
    CHECK(s[PdoIndex::X1].moment(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(s[PdoIndex::Identity].moment(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("gaussian ramp response, raw vs corrected") {
  const auto ramp = [](Vector3d x) { return x(0); };
  const Eigen::Vector3i origin(0, 0, 0);

  const auto raw = gaussian_stencils(5, 1.0, false);
  const double raw_resp = apply_stencil(raw[PdoIndex::X1], ramp, origin);
  // truncation bias of the uncorrected k=5, sigma=1 stencil, frozen from
  // direct evaluation
  CHECK(std::abs(raw_resp - 1.0) == doctest::Approx(0.100786).epsilon(1e-4));

  const auto corr = gaussian_stencils(5, 1.0, true);
  CHECK(apply_stencil(corr[PdoIndex::X1], ramp, origin) == doctest::Approx(1.0).epsilon(1e-10));

  // corrected stencils are exact on a full quadratic
  const auto f = [](Vector3d x) {
    return 0.3 - x(0) + 2.0 * x(1) * x(1) + x(0) * x(2) - 0.7 * x(1) * x(2);
  };
  CHECK(apply_stencil(corr[PdoIndex::X1], f, origin) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(apply_stencil(corr[PdoIndex::X22], f, origin) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(apply_stencil(corr[PdoIndex::X13], f, origin) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(apply_stencil(corr[PdoIndex::X23], f, origin) == doctest::Approx(-0.7).epsilon(1e-10));
}

TEST_CASE("stencil family commutes with cubic rotations") {
  // Rotating a stencil (as a function of its offset) must land on the stencil
  // of the rotated operator: first derivatives transform as a vector, second
  // derivatives as a symmetric 2-tensor.
  const auto o = make_group(GroupSpec::O());
  const std::array<std::pair<int, int>, 6> sym_pairs{
      {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  auto sym_slot = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    for (int s = 0; s < 6; ++s) {
      if (sym_pairs[s] == std::make_pair(a, b)) return s;
    }
    return -1;
  };

  for (const auto& [name, scheme] :
       {std::make_pair("fd", fd_stencils()),
        std::make_pair("gauss", gaussian_stencils(5, 1.0, true))}) {
    (void)name;
    const int r = scheme.k / 2;
    double worst = 0.0;
    for (const auto& rot : o.elements) {
      const Mat3 g = rot.matrix();
      const Mat3 ginv = g.transpose();
      for (int a = -r; a <= r; ++a) {
        for (int b = -r; b <= r; ++b) {
          for (int c = -r; c <= r; ++c) {
            const Eigen::Vector3i n(a, b, c);
            const Eigen::Vector3i gn = (ginv * n.cast<double>()).array().round().cast<int>();
            // first order
            for (int ax = 0; ax < 3; ++ax) {
              double expect = 0.0;
              for (int bx = 0; bx < 3; ++bx) {
                expect += g(bx, ax) * scheme.stencils[1 + bx].at(n(0), n(1), n(2));
              }
              worst = std::max(worst, std::abs(scheme.stencils[1 + ax].at(gn(0), gn(1), gn(2)) - expect));
            }
            // second order
            for (int s = 0; s < 6; ++s) {
              const auto [p, q] = sym_pairs[s];
              double expect = 0.0;
              for (int u = 0; u < 3; ++u) {
                for (int v = 0; v < 3; ++v) {
                  const double coef = g(u, p) * g(v, q);
                  if (coef == 0.0) continue;
                  const int slot = sym_slot(u, v);
                  expect += coef * scheme.stencils[4 + slot].at(n(0), n(1), n(2));
                }
              }
              worst = std::max(worst, std::abs(scheme.stencils[4 + s].at(gn(0), gn(1), gn(2)) - expect));
            }
          }
        }
      }
    }
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("discretize: delta filter, Laplacian, linearity") {
  const auto scheme = fd_stencils();

  // A0 = I -> identity convolution
  PdoCoefficients ident = PdoCoefficients::zero(2, 2);
  ident.b0 = MatrixXd::Identity(2, 2);
  const auto delta = discretize(ident, scheme);
  for (int o = 0; o < 2; ++o) {
    for (int i = 0; i < 2; ++i) {
      CHECK(delta.at(o, i, 0, 0, 0) == (o == i ? 1.0 : 0.0));
      CHECK(delta.at(o, i, 1, 0, 0) == 0.0);
    }
  }

  // Laplacian coefficients -> the classic 7-point stencil
  PdoCoefficients lap = PdoCoefficients::zero(1, 1);
  lap.b2(0, 0) = lap.b2(0, 3) = lap.b2(0, 5) = 1.0;
  const auto f = discretize(lap, scheme);
  CHECK(f.at(0, 0, 0, 0, 0) == -6.0);
  CHECK(f.at(0, 0, 1, 0, 0) == 1.0);
  CHECK(f.at(0, 0, -1, 0, 0) == 1.0);
  CHECK(f.at(0, 0, 0, 1, 0) == 1.0);
  CHECK(f.at(0, 0, 0, -1, 0) == 1.0);
  CHECK(f.at(0, 0, 0, 0, 1) == 1.0);
  CHECK(f.at(0, 0, 0, 0, -1) == 1.0);
  CHECK(f.at(0, 0, 1, 1, 0) == 0.0);

  // linearity in the coefficients
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_coeffs = [&](int kp, int kin) {
    PdoCoefficients c = PdoCoefficients::zero(kp, kin);
    const auto fill = [&](MatrixXd& m) {
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = gauss(rng);
    };
    fill(c.b0); fill(c.b1); fill(c.b2);
    return c;
  };
  const auto c1 = random_coeffs(2, 3);
  const auto c2 = random_coeffs(2, 3);
  const double alpha = 1.7, beta = -0.4;
  PdoCoefficients mix = PdoCoefficients::zero(2, 3);
  mix.b0 = alpha * c1.b0 + beta * c2.b0;
  mix.b1 = alpha * c1.b1 + beta * c2.b1;
  mix.b2 = alpha * c1.b2 + beta * c2.b2;
  const auto fm = discretize(mix, scheme);
  const auto f1 = discretize(c1, scheme);
  const auto f2 = discretize(c2, scheme);
  double worst = 0.0;
  for (size_t t = 0; t < fm.w.size(); ++t) {
    worst = std::max(worst, std::abs(fm.w[t] - alpha * f1.w[t] - beta * f2.w[t]));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("scheme json dump") {
  const auto j = fd_stencils().to_json();
  CHECK(j["name"] == "fd");
  CHECK(j["stencils"].contains("x1x2"));
  CHECK(j["stencils"]["x1"]["weights"].size() == 27);
}
