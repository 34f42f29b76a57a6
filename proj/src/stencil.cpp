#include "steer3d/stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace steer3d {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* pdo_name(PdoIndex p) {
  switch (p) {
    case PdoIndex::Identity: return "identity";
    case PdoIndex::X1: return "x1";
    case PdoIndex::X2: return "x2";
    case PdoIndex::X3: return "x3";
    case PdoIndex::X11: return "x1x1";
    case PdoIndex::X12: return "x1x2";
    case PdoIndex::X13: return "x1x3";
    case PdoIndex::X22: return "x2x2";
    case PdoIndex::X23: return "x2x3";
    case PdoIndex::X33: return "x3x3";
  }
  return "?";
}

double Stencil3::moment(int e1, int e2, int e3) const {
  const int r = radius();
  double sum = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = -r; c <= r; ++c)
        sum += at(a, b, c) * std::pow(a, e1) * std::pow(b, e2) * std::pow(c, e3);
  return sum;
}

nlohmann::json DiscretizationScheme::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["k"] = k;
  for (int p = 0; p < kNumPdos; ++p) {
    nlohmann::json js;
    js["k"] = stencils[p].k;
    js["weights"] = stencils[p].w;
    j["stencils"][pdo_name(static_cast<PdoIndex>(p))] = js;
  }
  return j;
}

DiscretizationScheme fd_stencils(double h1, double h2, double h3) {
  if (h1 <= 0.0 || h2 <= 0.0 || h3 <= 0.0) {
    throw std::invalid_argument("fd_stencils: spacings must be positive");
  }
  DiscretizationScheme s;
  s.name = "fd";
  s.k = 3;
  const Eigen::Vector3d h(h1, h2, h3);
  for (auto& st : s.stencils) st.spacing = h;

  s[PdoIndex::Identity].at(0, 0, 0) = 1.0;

  // first order: +-1/(2h) taps along the axis
  const std::array<std::array<int, 3>, 3> axes{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int a = 0; a < 3; ++a) {
    Stencil3& st = s.stencils[1 + a];
    st.at(axes[a][0], axes[a][1], axes[a][2]) = 0.5 / h(a);
    st.at(-axes[a][0], -axes[a][1], -axes[a][2]) = -0.5 / h(a);
  }

  // pure second order: (1, -2, 1)/h^2
  const std::array<std::pair<PdoIndex, int>, 3> pures{
      {{PdoIndex::X11, 0}, {PdoIndex::X22, 1}, {PdoIndex::X33, 2}}};
  for (const auto& [p, a] : pures) {
    Stencil3& st = s[p];
    st.at(0, 0, 0) = -2.0 / (h(a) * h(a));
    st.at(axes[a][0], axes[a][1], axes[a][2]) = 1.0 / (h(a) * h(a));
    st.at(-axes[a][0], -axes[a][1], -axes[a][2]) = 1.0 / (h(a) * h(a));
  }

  // mixed: n_a n_b / (4 h_a h_b) on the four corners of the (a, b) plane
  const std::array<std::tuple<PdoIndex, int, int>, 3> mixed{
      {{PdoIndex::X12, 0, 1}, {PdoIndex::X13, 0, 2}, {PdoIndex::X23, 1, 2}}};
  for (const auto& [p, a, b] : mixed) {
    Stencil3& st = s[p];
    for (int sa : {-1, 1}) {
      for (int sb : {-1, 1}) {
        int n[3] = {0, 0, 0};
        n[a] = sa;
        n[b] = sb;
        st.at(n[0], n[1], n[2]) = sa * sb / (4.0 * h(a) * h(b));
      }
    }
  }
  return s;
}

namespace {

/// Exact degree-<=2 moments of each differential operator applied to the
/// monomial basis (1, x1, x2, x3, x1^2, x1x2, x1x3, x2^2, x2x3, x3^3),
/// i.e. the values a consistent stencil must reproduce.
VectorXd moment_targets(PdoIndex p) {
  VectorXd t = VectorXd::Zero(10);
  switch (p) {
    case PdoIndex::Identity: t(0) = 1.0; break;
    case PdoIndex::X1: t(1) = 1.0; break;
    case PdoIndex::X2: t(2) = 1.0; break;
    case PdoIndex::X3: t(3) = 1.0; break;
    case PdoIndex::X11: t(4) = 2.0; break;
    case PdoIndex::X12: t(5) = 1.0; break;
    case PdoIndex::X13: t(6) = 1.0; break;
    case PdoIndex::X22: t(7) = 2.0; break;
    case PdoIndex::X23: t(8) = 1.0; break;
    case PdoIndex::X33: t(9) = 2.0; break;
  }
  return t;
}

/// Minimal-norm correction moving the stencil onto the affine subspace of
/// weights whose degree-<=2 moments are exact.
void project_to_moments(Stencil3& st, const VectorXd& targets) {
  const int r = st.radius();
  const int taps = st.k * st.k * st.k;
  MatrixXd m(10, taps);
  int col = 0;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      for (int c = -r; c <= r; ++c, ++col) {
        m(0, col) = 1.0;
        m(1, col) = a;
        m(2, col) = b;
        m(3, col) = c;
        m(4, col) = a * a;
        m(5, col) = a * b;
        m(6, col) = a * c;
        m(7, col) = b * b;
        m(8, col) = b * c;
        m(9, col) = c * c;
      }
    }
  }
  const Eigen::Map<VectorXd> w(st.w.data(), taps);
  const VectorXd residual = targets - m * w;
  const VectorXd correction =
      m.transpose() * (m * m.transpose()).ldlt().solve(residual);
  for (int i = 0; i < taps; ++i) st.w[i] += correction(i);
}

}  // namespace

DiscretizationScheme gaussian_stencils(int k, double sigma, bool moment_correct) {
  if (k < 3 || k % 2 == 0) {
    throw std::invalid_argument("gaussian_stencils: k must be odd and >= 3");
  }
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_stencils: sigma must be positive");

  DiscretizationScheme s;
  s.name = "gaussian:k=" + std::to_string(k) + ",sigma=" + std::to_string(sigma);
  s.k = k;
  for (auto& st : s.stencils) st = Stencil3(k);

  const int r = k / 2;
  const double s2 = sigma * sigma;
  const double norm = std::pow(2.0 * M_PI * s2, -1.5);
  const auto gauss = [&](int a, int b, int c) {
    return norm * std::exp(-0.5 * (a * a + b * b + c * c) / s2);
  };

  // Weight at offset n is the analytic derivative evaluated at -n, so that
  // the cross-correlation sum_n w(n) f(x + n) estimates the derivative at x.
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      for (int c = -r; c <= r; ++c) {
        const double g = gauss(a, b, c);
        const double x1 = -a, x2 = -b, x3 = -c;
        s[PdoIndex::Identity].at(a, b, c) = g;
        s[PdoIndex::X1].at(a, b, c) = -x1 / s2 * g;
        s[PdoIndex::X2].at(a, b, c) = -x2 / s2 * g;
        s[PdoIndex::X3].at(a, b, c) = -x3 / s2 * g;
        s[PdoIndex::X11].at(a, b, c) = (x1 * x1 / s2 - 1.0) / s2 * g;
        s[PdoIndex::X22].at(a, b, c) = (x2 * x2 / s2 - 1.0) / s2 * g;
        s[PdoIndex::X33].at(a, b, c) = (x3 * x3 / s2 - 1.0) / s2 * g;
        s[PdoIndex::X12].at(a, b, c) = x1 * x2 / (s2 * s2) * g;
        s[PdoIndex::X13].at(a, b, c) = x1 * x3 / (s2 * s2) * g;
        s[PdoIndex::X23].at(a, b, c) = x2 * x3 / (s2 * s2) * g;
      }
    }
  }

  // The smoothing kernel itself only gets unit mass.
  const double mass = s[PdoIndex::Identity].moment(0, 0, 0);
  for (auto& v : s[PdoIndex::Identity].w) v /= mass;

  if (moment_correct) {
    for (int p = 1; p < kNumPdos; ++p) {
      project_to_moments(s.stencils[p], moment_targets(static_cast<PdoIndex>(p)));
    }
    s.name += ",corrected";
  }
  return s;
}

DiscreteFilter::DiscreteFilter(int out_ch, int in_ch, int k_)
    : out_channels(out_ch),
      in_channels(in_ch),
      k(k_),
      w(static_cast<size_t>(out_ch) * in_ch * k_ * k_ * k_, 0.0) {}

double& DiscreteFilter::at(int o, int i, int n1, int n2, int n3) {
  const int r = k / 2;
  return w[((static_cast<size_t>(o) * in_channels + i) * k + (n1 + r)) * k * k +
           static_cast<size_t>(n2 + r) * k + (n3 + r)];
}

double DiscreteFilter::at(int o, int i, int n1, int n2, int n3) const {
  return const_cast<DiscreteFilter*>(this)->at(o, i, n1, n2, n3);
}

DiscreteFilter discretize(const PdoCoefficients& coeffs,
                          const DiscretizationScheme& scheme) {
  const int kp = coeffs.out_dim();
  const int kin = coeffs.in_dim();
  if (coeffs.b1.cols() != 3 * kin || coeffs.b2.cols() != 6 * kin) {
    throw std::invalid_argument("discretize: coefficient block shapes disagree");
  }
  DiscreteFilter f(kp, kin, scheme.k);
  f.provenance = scheme.name;
  const size_t taps = f.taps();

  auto accumulate = [&](const MatrixXd& a, const Stencil3& st) {
    for (int o = 0; o < kp; ++o) {
      for (int i = 0; i < kin; ++i) {
        const double c = a(o, i);
        if (c == 0.0) continue;
        double* dst = f.block(o, i);
        for (size_t t = 0; t < taps; ++t) dst[t] += c * st.w[t];
      }
    }
  };

  accumulate(coeffs.b0, scheme[PdoIndex::Identity]);
  for (int a = 0; a < 3; ++a) {
    accumulate(coeffs.b1.middleCols(a * kin, kin), scheme.stencils[1 + a]);
  }
  for (int s6 = 0; s6 < 6; ++s6) {
    accumulate(coeffs.b2.middleCols(s6 * kin, kin), scheme.stencils[4 + s6]);
  }
  return f;
}

}  // namespace steer3d
