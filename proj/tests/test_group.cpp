#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "steer3d/group.hpp"

using namespace steer3d;

TEST_CASE("rot_z basics") {
  CHECK(rot_z(0.0).is_identity(1e-15));

  const Rotation3 q = rot_z(M_PI / 2.0);
  Mat3 expect;
  expect << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((q.matrix() - expect).norm() < 1e-15);

  CHECK((rot_z(1.0) * rot_z(-1.0)).is_identity(1e-15));
}

TEST_CASE("rot_y basics") {
  CHECK(rot_y(0.0).is_identity(1e-15));

  const Rotation3 q = rot_y(M_PI / 2.0);
  Mat3 expect;
  expect << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  CHECK((q.matrix() - expect).norm() < 1e-15);

  const Mat3 m = rot_y(0.37).matrix();
  CHECK((m.transpose() * m - Mat3::Identity()).norm() < 1e-15);
}

TEST_CASE("Rotation3 validation rejects non-rotations") {
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(Rotation3{bad}, std::invalid_argument);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;  // det = -1
  CHECK_THROWS_AS(Rotation3{reflect}, std::invalid_argument);
}

TEST_CASE("euler_zyz round trip incl. gimbal cases") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Rotation3 g = random_rotation(rng);
    const ZyzAngles e = euler_zyz(g.matrix());
    const Rotation3 back = rot_z(e.alpha) * rot_y(e.beta) * rot_z(e.gamma);
    CHECK(g.distance(back) < 1e-12);
  }
  for (const Rotation3& g :
       {Rotation3::identity(), rot_z(0.7), rot_z(0.7) * rot_y(M_PI), rot_y(M_PI),
        rot_z(-0.3), rot_z(2.0) * rot_y(M_PI)}) {
    const ZyzAngles e = euler_zyz(g.matrix());
    CHECK((rot_z(e.alpha) * rot_y(e.beta) * rot_z(e.gamma)).distance(g) < 1e-12);
    if (std::abs(std::sin(e.beta)) < 1e-9) CHECK(e.gamma == 0.0);
  }
}

TEST_CASE("generators_of matches the canonical matrices") {
  const auto v = generators_of(GroupSpec::V());
  REQUIRE(v.size() == 2);
  CHECK((v[0].matrix() - Eigen::Vector3d(-1, -1, 1).asDiagonal().toDenseMatrix()).norm() == 0.0);
  CHECK((v[1].matrix() - Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix()).norm() == 0.0);

  const auto c1 = generators_of(GroupSpec::CN(1));
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].is_identity(1e-15));

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const auto i_gens = generators_of(GroupSpec::I());
  REQUIRE(i_gens.size() == 2);
  const Mat3& m = i_gens[1].matrix();
  CHECK(m(0, 1) == doctest::Approx(phi / 2).epsilon(1e-15));
  CHECK(m(0, 0) == doctest::Approx((1 - phi) / 2).epsilon(1e-15));
  CHECK(std::abs(m(0, 2)) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(generators_of(GroupSpec::SO3()), std::invalid_argument);
}

TEST_CASE("closure sizes match the classification") {
  CHECK(make_group(GroupSpec::V()).size() == 4);
  CHECK(make_group(GroupSpec::T()).size() == 12);
  CHECK(make_group(GroupSpec::O()).size() == 24);
  CHECK(make_group(GroupSpec::I()).size() == 60);
  CHECK(make_group(GroupSpec::CN(1)).size() == 1);
  CHECK(make_group(GroupSpec::CN(5)).size() == 5);
  CHECK(make_group(GroupSpec::DN(4)).size() == 8);
  CHECK(make_group(GroupSpec::DN(2)).size() == 4);  // DN(2) is V in another guise
}

TEST_CASE("closure cap rejects non-finite generating sets") {
  CHECK_THROWS_AS(generate_closure(GroupSpec::CN(7), {rot_z(1.0)}, 1e-9, 360),
                  std::runtime_error);
}

TEST_CASE("cayley table is a group table") {
  for (const auto spec : {GroupSpec::V(), GroupSpec::T(), GroupSpec::O(),
                          GroupSpec::I(), GroupSpec::DN(3)}) {
    const auto g = make_group(spec);
    const int n = g.size();
    CHECK(g.elements[0].is_identity(1e-12));

    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        worst = std::max(worst,
                         g.elements[g.cayley(i, j)].distance(g.elements[i] * g.elements[j]));
      }
    }
    CHECK(worst < 1e-10);

    // associativity on the table
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          REQUIRE(g.cayley(g.cayley(i, j), k) == g.cayley(i, g.cayley(j, k)));

    for (int i = 0; i < n; ++i) CHECK(g.cayley(i, g.inverse(i)) == g.identity_id);
  }
}

TEST_CASE("left cosets partition the group") {
  const auto o = make_group(GroupSpec::O());

  const auto v_ids = embed_subgroup(o, GroupSpec::V());
  CHECK(v_ids.size() == 4);
  // V inside O consists of the diagonal sign matrices with det +1.
  for (int id : v_ids) {
    const Mat3& m = o.elements[id].matrix();
    CHECK((m.cwiseAbs() - Mat3::Identity()).norm() == 0.0);
  }

  const auto cosets_v = left_cosets(o, v_ids);
  CHECK(cosets_v.size() == 6);
  for (const auto& c : cosets_v) CHECK(c.size() == 4);
  CHECK(cosets_v[0] == v_ids);

  const auto t_ids = embed_subgroup(o, GroupSpec::T());
  CHECK(t_ids.size() == 12);
  const auto cosets_t = left_cosets(o, t_ids);
  CHECK(cosets_t.size() == 2);
  for (const auto& c : cosets_t) CHECK(c.size() == 12);

  // H = {e} gives singleton cosets
  const auto singles = left_cosets(o, {o.identity_id});
  CHECK(singles.size() == 24);

  // partition: every index appears exactly once
  std::vector<int> seen(o.size(), 0);
  for (const auto& c : cosets_v)
    for (int e : c) seen[e]++;
  for (int s : seen) CHECK(s == 1);

  // non-subgroup input is rejected with a diagnostic
  CHECK_THROWS_AS(left_cosets(o, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST_CASE("embed_subgroup handles trivial and failing cases") {
  const auto o = make_group(GroupSpec::O());
  const auto e = embed_subgroup(o, GroupSpec::CN(1));
  CHECK(e == std::vector<int>{o.identity_id});
  CHECK_THROWS_AS(embed_subgroup(o, GroupSpec::I()), std::invalid_argument);

  const auto t = make_group(GroupSpec::T());
  CHECK(embed_subgroup(t, GroupSpec::V()).size() == 4);
}

TEST_CASE("group json dump") {
  const auto v = make_group(GroupSpec::V());
  const auto j = v.to_json();
  CHECK(j["kind"] == "V");
  CHECK(j["size"] == 4);
  CHECK(j["elements"].size() == 4);
  CHECK(j["cayley"].size() == 4);
  CHECK(j["generators"].size() == 2);
}
