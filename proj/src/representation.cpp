#include "steer3d/representation.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace steer3d {

namespace {

std::string basic_kind_name(const RepKind& k) {
  switch (k.cls) {
    case RepClass::Trivial: return "trivial";
    case RepClass::Regular: return "regular";
    case RepClass::Quotient: return "quotient:" + k.sub.name();
    case RepClass::Irrep: return "irrep:" + std::to_string(k.l);
    case RepClass::Sum: break;
  }
  throw std::logic_error("basic_kind_name: not a basic kind");
}

}  // namespace

std::string RepKind::name() const {
  if (cls != RepClass::Sum) return basic_kind_name(*this);
  std::string out = "sum:";
  bool first = true;
  for (const auto& [kind, mult] : terms) {
    if (!first) out += "+";
    first = false;
    out += kind.name() + "x" + std::to_string(mult);
  }
  return out;
}

RepKind RepKind::parse(const std::string& text) {
  if (text == "trivial") return trivial();
  if (text == "regular") return regular();
  if (text.rfind("quotient:", 0) == 0) {
    return quotient(GroupSpec::parse(text.substr(9)));
  }
  if (text.rfind("irrep:", 0) == 0) {
    const int l = std::stoi(text.substr(6));
    if (l < 0) throw std::invalid_argument("RepKind: irrep order must be >= 0");
    return irrep(l);
  }
  if (text.rfind("sum:", 0) == 0) {
    std::vector<std::pair<RepKind, int>> terms;
    std::string rest = text.substr(4);
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t end = rest.find('+', pos);
      if (end == std::string::npos) end = rest.size();
      const std::string term = rest.substr(pos, end - pos);
      const size_t x = term.rfind('x');
      if (x == std::string::npos) {
        throw std::invalid_argument("RepKind: sum term '" + term +
                                    "' must look like <kind>x<mult>");
      }
      const int mult = std::stoi(term.substr(x + 1));
      if (mult < 1) throw std::invalid_argument("RepKind: multiplicity must be >= 1");
      terms.emplace_back(parse(term.substr(0, x)), mult);
      pos = end + 1;
    }
    if (terms.empty()) throw std::invalid_argument("RepKind: empty sum");
    return sum(std::move(terms));
  }
  throw std::invalid_argument("RepKind: cannot parse '" + text + "'");
}

std::vector<RepKind> RepKind::factors() const {
  if (cls != RepClass::Sum) return {*this};
  std::vector<RepKind> out;
  for (const auto& [kind, mult] : terms) {
    const auto inner = kind.factors();
    for (int i = 0; i < mult; ++i) out.insert(out.end(), inner.begin(), inner.end());
  }
  return out;
}

Representation Representation::finite(
    RepKind kind, std::shared_ptr<const FiniteRotationGroup> group,
    std::vector<MatrixXd> matrices, bool permutation_like) {
  Representation r;
  r.kind_ = std::move(kind);
  r.group_ = std::move(group);
  r.matrices_ = std::move(matrices);
  r.permutation_like_ = permutation_like;
  if (r.matrices_.empty() || static_cast<int>(r.matrices_.size()) != r.group_->size()) {
    throw std::invalid_argument("Representation: need one matrix per group element");
  }
  r.dim_ = static_cast<int>(r.matrices_[0].rows());
  return r;
}

Representation Representation::so3(RepKind kind, int dim,
                                   std::function<MatrixXd(const Rotation3&)> eval) {
  Representation r;
  r.kind_ = std::move(kind);
  r.dim_ = dim;
  r.eval_ = std::move(eval);
  r.permutation_like_ = (r.kind_.cls == RepClass::Trivial);
  return r;
}

GroupSpec Representation::group_spec() const {
  return group_ ? group_->spec : GroupSpec::SO3();
}

const FiniteRotationGroup& Representation::group() const {
  if (!group_) throw std::logic_error("Representation: no finite group attached");
  return *group_;
}

const MatrixXd& Representation::at(int element_id) const {
  if (!group_) throw std::logic_error("Representation::at: SO(3) representation");
  return matrices_.at(element_id);
}

MatrixXd Representation::operator()(const Rotation3& g) const {
  if (group_) return matrices_.at(group_->find(g));
  return eval_(g);
}

nlohmann::json Representation::to_json() const {
  nlohmann::json j;
  j["group"] = group_spec().name();
  j["kind"] = kind_.name();
  j["dim"] = dim_;
  if (group_) {
    auto mats = nlohmann::json::array();
    for (const auto& m : matrices_) {
      std::vector<double> flat(m.size());
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) flat[r * m.cols() + c] = m(r, c);
      mats.push_back(flat);
    }
    j["matrices"] = mats;
  }
  return j;
}

Representation trivial_rep(std::shared_ptr<const FiniteRotationGroup> group) {
  std::vector<MatrixXd> mats(group->size(), MatrixXd::Ones(1, 1));
  return Representation::finite(RepKind::trivial(), std::move(group), std::move(mats), true);
}

Representation trivial_rep_so3() {
  return Representation::so3(RepKind::trivial(), 1,
                             [](const Rotation3&) { return MatrixXd::Ones(1, 1); });
}

Representation regular_rep(std::shared_ptr<const FiniteRotationGroup> group) {
  const int n = group->size();
  std::vector<MatrixXd> mats(n, MatrixXd::Zero(n, n));
  for (int g = 0; g < n; ++g) {
    for (int h = 0; h < n; ++h) {
      mats[g](group->mul(g, h), h) = 1.0;  // permutes e_h to e_{g h}
    }
  }
  return Representation::finite(RepKind::regular(), std::move(group), std::move(mats), true);
}

Representation quotient_rep(std::shared_ptr<const FiniteRotationGroup> group,
                            const std::vector<int>& subgroup_ids,
                            RepKind kind) {
  const auto cosets = left_cosets(*group, subgroup_ids);
  const int n = group->size();
  const int q = static_cast<int>(cosets.size());
  std::vector<int> coset_of(n, -1);
  for (int c = 0; c < q; ++c) {
    for (int e : cosets[c]) coset_of[e] = c;
  }
  std::vector<MatrixXd> mats(n, MatrixXd::Zero(q, q));
  for (int g = 0; g < n; ++g) {
    for (int c = 0; c < q; ++c) {
      // g maps the coset of representative r to the coset of g*r.
      mats[g](coset_of[group->mul(g, cosets[c][0])], c) = 1.0;
    }
  }
  return Representation::finite(std::move(kind), std::move(group), std::move(mats), true);
}

// ---------------------------------------------------------------------------
// Wigner-D
// ---------------------------------------------------------------------------

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Wigner's small-d matrix entry d^l_{mp,m}(beta).
double small_d(int l, int mp, int m, double beta) {
  const double cb = std::cos(beta / 2.0);
  const double sb = std::sin(beta / 2.0);
  const double pref = std::sqrt(factorial(l + mp) * factorial(l - mp) *
                                factorial(l + m) * factorial(l - m));
  double sum = 0.0;
  const int k_lo = std::max(0, m - mp);
  const int k_hi = std::min(l - mp, l + m);
  for (int k = k_lo; k <= k_hi; ++k) {
    const double sign = ((mp - m + k) % 2 == 0) ? 1.0 : -1.0;
    const double den = factorial(l + m - k) * factorial(k) *
                       factorial(mp - m + k) * factorial(l - mp - k);
    sum += sign / den * std::pow(cb, 2 * l + m - mp - 2 * k) *
           std::pow(sb, mp - m + 2 * k);
  }
  return pref * sum;
}

using MatrixXcd = Eigen::MatrixXcd;

/// Complex-to-real change of basis for spherical harmonics of order l
/// (rows: real index mu = -l..l; columns: complex m = -l..l).
MatrixXcd complex_to_real(int l) {
  const int d = 2 * l + 1;
  MatrixXcd u = MatrixXcd::Zero(d, d);
  const std::complex<double> I(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  u(l, l) = 1.0;
  for (int m = 1; m <= l; ++m) {
    const double cs = (m % 2 == 0) ? 1.0 : -1.0;  // Condon-Shortley (-1)^m
    u(l + m, l + m) = cs * s;
    u(l + m, l - m) = s;
    u(l - m, l + m) = -I * cs * s;
    u(l - m, l - m) = I * s;
  }
  return u;
}

}  // namespace

MatrixXd wigner_d_real(int l, const Rotation3& g) {
  if (l < 0) throw std::invalid_argument("wigner_d_real: l must be >= 0");
  if (l == 0) return MatrixXd::Ones(1, 1);
  const int d = 2 * l + 1;
  const ZyzAngles e = euler_zyz(g.matrix());

  MatrixXcd dc(d, d);
  const std::complex<double> I(0.0, 1.0);
  for (int mp = -l; mp <= l; ++mp) {
    for (int m = -l; m <= l; ++m) {
      dc(mp + l, m + l) = std::exp(I * (mp * e.alpha)) * small_d(l, mp, m, e.beta) *
                          std::exp(I * (m * e.gamma));
    }
  }
  const MatrixXcd u = complex_to_real(l);
  const MatrixXcd dr = u * dc * u.adjoint();
  if (dr.imag().cwiseAbs().maxCoeff() > 1e-12) {
    throw std::logic_error("wigner_d_real: matrix is not real");
  }
  return dr.real();
}

Mat3 wigner_axis_permutation() {
  Mat3 p = Mat3::Zero();
  p(0, 1) = 1.0;  // mu = -1 component is y
  p(1, 2) = 1.0;  // mu =  0 component is z
  p(2, 0) = 1.0;  // mu = +1 component is x
  return p;
}

Representation irrep_rep(int l) {
  return Representation::so3(RepKind::irrep(l), 2 * l + 1,
                             [l](const Rotation3& g) { return wigner_d_real(l, g); });
}

Representation direct_sum(const std::vector<Representation>& reps) {
  if (reps.empty()) throw std::invalid_argument("direct_sum: no factors");
  const GroupSpec spec = reps[0].group_spec();
  int dim = 0;
  bool perm = true;
  for (const auto& r : reps) {
    if (!(r.group_spec() == spec)) {
      throw std::invalid_argument("direct_sum: group mismatch between factors");
    }
    dim += r.dim();
    perm = perm && r.permutation_like();
  }
  std::vector<std::pair<RepKind, int>> terms;
  for (const auto& r : reps) terms.emplace_back(r.kind(), 1);
  RepKind kind = RepKind::sum(std::move(terms));

  if (reps[0].is_finite()) {
    auto group = reps[0].group_ptr();
    std::vector<MatrixXd> mats;
    mats.reserve(group->size());
    for (int g = 0; g < group->size(); ++g) {
      MatrixXd m = MatrixXd::Zero(dim, dim);
      int off = 0;
      for (const auto& r : reps) {
        m.block(off, off, r.dim(), r.dim()) = r.at(g);
        off += r.dim();
      }
      mats.push_back(std::move(m));
    }
    return Representation::finite(std::move(kind), std::move(group), std::move(mats), perm);
  }

  std::vector<Representation> factors = reps;
  return Representation::so3(std::move(kind), dim, [factors, dim](const Rotation3& g) {
    MatrixXd m = MatrixXd::Zero(dim, dim);
    int off = 0;
    for (const auto& r : factors) {
      m.block(off, off, r.dim(), r.dim()) = r(g);
      off += r.dim();
    }
    return m;
  });
}

Representation make_representation(const GroupSpec& spec,
                                   std::shared_ptr<const FiniteRotationGroup> group,
                                   const RepKind& kind) {
  if (spec.finite() && !group) {
    throw std::invalid_argument("make_representation: finite spec needs a group");
  }
  switch (kind.cls) {
    case RepClass::Trivial:
      return spec.finite() ? trivial_rep(group) : trivial_rep_so3();
    case RepClass::Regular:
      if (!spec.finite()) {
        throw std::invalid_argument("make_representation: SO3 has no regular representation");
      }
      return regular_rep(group);
    case RepClass::Quotient:
      if (!spec.finite()) {
        throw std::invalid_argument("make_representation: SO3 has no quotient representation");
      }
      return quotient_rep(group, embed_subgroup(*group, kind.sub), kind);
    case RepClass::Irrep:
      if (spec.finite()) {
        throw std::invalid_argument(
            "make_representation: irreps are only built for SO3; supply finite-group "
            "irrep matrices explicitly if needed");
      }
      return irrep_rep(kind.l);
    case RepClass::Sum: {
      std::vector<Representation> parts;
      for (const auto& [k, mult] : kind.terms) {
        Representation r = make_representation(spec, group, k);
        for (int i = 0; i < mult; ++i) parts.push_back(r);
      }
      Representation s = direct_sum(parts);
      if (s.is_finite()) {
        std::vector<MatrixXd> mats;
        mats.reserve(group->size());
        for (int g = 0; g < group->size(); ++g) mats.push_back(s.at(g));
        return Representation::finite(kind, group, std::move(mats), s.permutation_like());
      }
      const int dim = s.dim();
      auto eval = [s](const Rotation3& g) { return s(g); };
      Representation out = Representation::so3(kind, dim, eval);
      return out;
    }
  }
  throw std::logic_error("make_representation: unreachable");
}

double check_homomorphism(const Representation& rep, int n_samples, unsigned seed) {
  double worst = 0.0;
  if (rep.is_finite()) {
    const auto& group = rep.group();
    for (int g = 0; g < group.size(); ++g) {
      for (int h = 0; h < group.size(); ++h) {
        const double r = (rep.at(g) * rep.at(h) - rep.at(group.mul(g, h))).norm();
        worst = std::max(worst, r);
      }
    }
  } else {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_samples; ++i) {
      const Rotation3 g = random_rotation(rng);
      const Rotation3 h = random_rotation(rng);
      worst = std::max(worst, (rep(g) * rep(h) - rep(g * h)).norm());
    }
  }
  return worst;
}

}  // namespace steer3d
