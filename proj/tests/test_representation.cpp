#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "steer3d/representation.hpp"

using namespace steer3d;
using Eigen::MatrixXd;

namespace {

bool is_permutation_matrix(const MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r) {
    int ones = 0;
    for (int c = 0; c < m.cols(); ++c) {
      if (m(r, c) == 1.0) ++ones;
      else if (m(r, c) != 0.0) return false;
    }
    if (ones != 1) return false;
  }
  for (int c = 0; c < m.cols(); ++c) {
    if (m.col(c).sum() != 1.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("trivial representation") {
  auto o = make_group_shared(GroupSpec::O());
  const auto rep = trivial_rep(o);
  CHECK(rep.dim() == 1);
  for (int g = 0; g < o->size(); ++g) CHECK(rep.at(g)(0, 0) == 1.0);
  CHECK(check_homomorphism(rep) == 0.0);

  std::vector<Representation> five(5, rep);
  const auto sum = direct_sum(five);
  CHECK(sum.dim() == 5);
  CHECK((sum.at(3) - MatrixXd::Identity(5, 5)).norm() == 0.0);
}

TEST_CASE("regular representation of O") {
  auto o = make_group_shared(GroupSpec::O());
  const auto rep = regular_rep(o);
  CHECK(rep.dim() == 24);
  CHECK((rep.at(o->identity_id) - MatrixXd::Identity(24, 24)).norm() == 0.0);
  CHECK(check_homomorphism(rep) == 0.0);
  for (int g = 0; g < o->size(); ++g) CHECK(is_permutation_matrix(rep.at(g)));
}

TEST_CASE("regular representation of V squares to identity") {
  auto v = make_group_shared(GroupSpec::V());
  const auto rep = regular_rep(v);
  for (int g = 0; g < v->size(); ++g) {
    CHECK((rep.at(g) * rep.at(g) - MatrixXd::Identity(4, 4)).norm() == 0.0);
  }
}

TEST_CASE("quotient representations of O") {
  auto o = make_group_shared(GroupSpec::O());
  const auto v_ids = embed_subgroup(*o, GroupSpec::V());
  const auto t_ids = embed_subgroup(*o, GroupSpec::T());

  const auto qv = quotient_rep(o, v_ids);
  CHECK(qv.dim() == 6);
  CHECK(check_homomorphism(qv) == 0.0);

  const auto qt = quotient_rep(o, t_ids);
  CHECK(qt.dim() == 2);
  CHECK(check_homomorphism(qt) == 0.0);

  // H = {e} reproduces the regular representation entrywise.
  const auto qe = quotient_rep(o, {o->identity_id});
  const auto reg = regular_rep(o);
  CHECK(qe.dim() == 24);
  for (int g = 0; g < o->size(); ++g) {
    CHECK((qe.at(g) - reg.at(g)).norm() == 0.0);
  }
}

TEST_CASE("corrupted representation is detected") {
  auto v = make_group_shared(GroupSpec::V());
  auto rep = regular_rep(v);
  std::vector<MatrixXd> mats;
  for (int g = 0; g < v->size(); ++g) mats.push_back(rep.at(g));
  mats[1](0, 0) += 0.5;  // break the homomorphism on purpose
  const auto bad = Representation::finite(RepKind::regular(), v, mats, false);
  CHECK(check_homomorphism(bad) > 0.1);
}

TEST_CASE("wigner_d_real basics") {
  CHECK(wigner_d_real(0, rot_z(0.3))(0, 0) == 1.0);
  for (int l = 0; l <= 3; ++l) {
    const MatrixXd d = wigner_d_real(l, Rotation3::identity());
    CHECK((d - MatrixXd::Identity(2 * l + 1, 2 * l + 1)).norm() < 1e-14);
  }
}

TEST_CASE("wigner_d_real l=1 is the rotation in (y,z,x) order") {
  std::mt19937_64 rng(11);
  const Mat3 p = wigner_axis_permutation();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Rotation3 g = random_rotation(rng);
    const MatrixXd d1 = wigner_d_real(1, g);
    worst = std::max(worst, (d1 - p * g.matrix() * p.transpose()).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("wigner_d_real homomorphism and orthogonality") {
  std::mt19937_64 rng(3);
  for (int l = 1; l <= 3; ++l) {
    double worst_hom = 0.0, worst_orth = 0.0, worst_inv = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Rotation3 g = random_rotation(rng);
      const Rotation3 h = random_rotation(rng);
      const MatrixXd dg = wigner_d_real(l, g);
      worst_hom = std::max(worst_hom, (dg * wigner_d_real(l, h) - wigner_d_real(l, g * h)).norm());
      worst_orth = std::max(
          worst_orth,
          (dg.transpose() * dg - MatrixXd::Identity(2 * l + 1, 2 * l + 1)).norm());
      worst_inv = std::max(worst_inv, (wigner_d_real(l, g.inverse()) - dg.transpose()).norm());
    }
    CHECK(worst_hom < 1e-10);
    CHECK(worst_orth < 1e-10);
    CHECK(worst_inv < 1e-10);
  }
}

TEST_CASE("so3 irrep representation through the evaluator") {
  const auto rep = irrep_rep(2);
  CHECK(rep.dim() == 5);
  CHECK(!rep.is_finite());
  CHECK(check_homomorphism(rep, 100, 5) < 1e-10);
}

TEST_CASE("direct sums") {
  auto o = make_group_shared(GroupSpec::O());
  const auto reg = regular_rep(o);
  const auto qv = make_representation(GroupSpec::O(), o, RepKind::quotient(GroupSpec::V()));
  const auto sum = direct_sum({reg, qv});
  CHECK(sum.dim() == 30);
  for (int g = 0; g < o->size(); ++g) {
    CHECK(sum.at(g).block(0, 24, 24, 6).norm() == 0.0);
    CHECK(sum.at(g).block(24, 0, 6, 24).norm() == 0.0);
  }
  CHECK(check_homomorphism(sum) == 0.0);

  // D0 + D1 + D2 over SO(3)
  const auto dsum = direct_sum({irrep_rep(0), irrep_rep(1), irrep_rep(2)});
  CHECK(dsum.dim() == 9);
  CHECK(check_homomorphism(dsum, 50, 9) < 1e-10);

  auto v = make_group_shared(GroupSpec::V());
  CHECK_THROWS_AS(direct_sum({regular_rep(v), reg}), std::invalid_argument);
}

TEST_CASE("rep kind grammar") {
  CHECK(RepKind::parse("trivial").name() == "trivial");
  CHECK(RepKind::parse("regular").name() == "regular");
  CHECK(RepKind::parse("quotient:V").name() == "quotient:V");
  CHECK(RepKind::parse("irrep:2").name() == "irrep:2");
  const auto s = RepKind::parse("sum:irrep:0x1+irrep:1x2");
  CHECK(s.factors().size() == 3);
  CHECK_THROWS_AS(RepKind::parse("nonsense"), std::invalid_argument);

  auto o = make_group_shared(GroupSpec::O());
  const auto mixed =
      make_representation(GroupSpec::O(), o, RepKind::parse("sum:regularx1+quotient:Vx2"));
  CHECK(mixed.dim() == 36);
  CHECK(mixed.permutation_like());
  CHECK(check_homomorphism(mixed) == 0.0);
}

TEST_CASE("representation json dump") {
  auto v = make_group_shared(GroupSpec::V());
  const auto j = regular_rep(v).to_json();
  CHECK(j["group"] == "V");
  CHECK(j["dim"] == 4);
  CHECK(j["matrices"].size() == 4);
  const auto js = irrep_rep(1).to_json();
  CHECK(!js.contains("matrices"));
}
