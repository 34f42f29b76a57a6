#include "steer3d/group.hpp"

#include <cmath>
#include <stdexcept>

namespace steer3d {

std::string GroupSpec::name() const {
  switch (kind) {
    case GroupKind::V: return "V";
    case GroupKind::T: return "T";
    case GroupKind::O: return "O";
    case GroupKind::I: return "I";
    case GroupKind::CN: return "CN-" + std::to_string(n);
    case GroupKind::DN: return "DN-" + std::to_string(n);
    case GroupKind::SO3: return "SO3";
  }
  return "?";
}

GroupSpec GroupSpec::parse(const std::string& text) {
  if (text == "V") return V();
  if (text == "T") return T();
  if (text == "O") return O();
  if (text == "I") return I();
  if (text == "SO3" || text == "so3") return SO3();
  auto parse_n = [&](size_t prefix_len) {
    int n = std::stoi(text.substr(prefix_len));
    if (n < 1) throw std::invalid_argument("GroupSpec: n must be >= 1 in '" + text + "'");
    return n;
  };
  if (text.rfind("CN-", 0) == 0 || text.rfind("CN", 0) == 0) {
    return CN(parse_n(text.rfind("CN-", 0) == 0 ? 3 : 2));
  }
  if (text.rfind("DN-", 0) == 0 || text.rfind("DN", 0) == 0) {
    return DN(parse_n(text.rfind("DN-", 0) == 0 ? 3 : 2));
  }
  throw std::invalid_argument("GroupSpec: unknown group '" + text + "'");
}

int FiniteRotationGroup::inverse(int i) const {
  for (int j = 0; j < size(); ++j) {
    if (cayley(i, j) == identity_id) return j;
  }
  throw std::logic_error("FiniteRotationGroup: element has no inverse in table");
}

int FiniteRotationGroup::find(const Rotation3& g, double tol) const {
  int best = -1;
  double best_d = tol;
  for (int i = 0; i < size(); ++i) {
    const double d = elements[i].distance(g);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best < 0) {
    throw std::invalid_argument("FiniteRotationGroup: rotation not found within tolerance");
  }
  return best;
}

nlohmann::json FiniteRotationGroup::to_json() const {
  nlohmann::json j;
  j["kind"] = spec.name();
  j["size"] = size();
  auto els = nlohmann::json::array();
  for (const auto& e : elements) {
    std::vector<double> row(9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) row[3 * r + c] = e(r, c);
    els.push_back(row);
  }
  j["elements"] = els;
  auto tab = nlohmann::json::array();
  for (int i = 0; i < size(); ++i) {
    std::vector<int> row(size());
    for (int k = 0; k < size(); ++k) row[k] = cayley(i, k);
    tab.push_back(row);
  }
  j["cayley"] = tab;
  j["generators"] = generator_ids;
  return j;
}

std::vector<Rotation3> generators_of(const GroupSpec& spec) {
  auto from = [](std::initializer_list<double> v) {
    Mat3 m;
    auto it = v.begin();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = *it++;
    return Rotation3(m);
  };
  switch (spec.kind) {
    case GroupKind::V:
      return {from({-1, 0, 0, 0, -1, 0, 0, 0, 1}),
              from({1, 0, 0, 0, -1, 0, 0, 0, -1})};
    case GroupKind::T:
      return {from({0, 0, 1, 1, 0, 0, 0, 1, 0}),
              from({-1, 0, 0, 0, -1, 0, 0, 0, 1})};
    case GroupKind::O:
      return {from({0, -1, 0, 1, 0, 0, 0, 0, 1}),
              from({0, 0, 1, 0, 1, 0, -1, 0, 0})};
    case GroupKind::I: {
      const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
      return {from({-1, 0, 0, 0, -1, 0, 0, 0, 1}),
              from({(1 - phi) / 2, phi / 2, -0.5,
                    -phi / 2, -0.5, (1 - phi) / 2,
                    -0.5, (phi - 1) / 2, phi / 2})};
    }
    case GroupKind::CN: {
      if (spec.n < 1) throw std::invalid_argument("generators_of: CN needs n >= 1");
      return {rot_z(2.0 * M_PI / spec.n)};
    }
    case GroupKind::DN: {
      if (spec.n < 1) throw std::invalid_argument("generators_of: DN needs n >= 1");
      return {rot_z(2.0 * M_PI / spec.n),
              from({1, 0, 0, 0, -1, 0, 0, 0, -1})};
    }
    case GroupKind::SO3:
      throw std::invalid_argument(
          "generators_of: SO3 is infinite; use rot_z/rot_y directly");
  }
  throw std::logic_error("generators_of: unreachable");
}

FiniteRotationGroup generate_closure(const GroupSpec& spec,
                                     const std::vector<Rotation3>& generators,
                                     double dedup_tol, int max_size) {
  if (generators.empty()) {
    throw std::invalid_argument("generate_closure: empty generating set");
  }
  std::vector<Rotation3> elements;
  elements.push_back(Rotation3::identity());

  auto find_near = [&](const Rotation3& g) -> int {
    for (int i = 0; i < static_cast<int>(elements.size()); ++i) {
      if (elements[i].distance(g) < dedup_tol) return i;
    }
    return -1;
  };

  // Breadth-first closure under right multiplication by the generators.
  for (size_t head = 0; head < elements.size(); ++head) {
    for (const auto& gen : generators) {
      const Rotation3 p = elements[head] * gen;
      if (find_near(p) < 0) {
        if (static_cast<int>(elements.size()) >= max_size) {
          throw std::runtime_error(
              "generate_closure: exceeded " + std::to_string(max_size) +
              " elements; generating set is not finite at tolerance " +
              std::to_string(dedup_tol));
        }
        elements.push_back(p);
      }
    }
  }

  FiniteRotationGroup group;
  group.spec = spec;
  group.elements = std::move(elements);
  const int n = group.size();

  group.cayley.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Rotation3 p = group.elements[i] * group.elements[j];
      int idx = -1;
      double best = dedup_tol;
      for (int k = 0; k < n; ++k) {
        const double d = group.elements[k].distance(p);
        if (d < best) {
          best = d;
          idx = k;
        }
      }
      if (idx < 0) {
        throw std::runtime_error("generate_closure: closure violated at (" +
                                 std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      group.cayley(i, j) = idx;
    }
  }

  for (const auto& gen : generators) {
    int idx = -1;
    for (int k = 0; k < n; ++k) {
      if (group.elements[k].distance(gen) < dedup_tol) {
        idx = k;
        break;
      }
    }
    if (idx < 0) throw std::logic_error("generate_closure: generator lost");
    group.generator_ids.push_back(idx);
  }
  group.identity_id = 0;

  // Every element must have an inverse for the table to describe a group.
  for (int i = 0; i < n; ++i) group.inverse(i);
  return group;
}

FiniteRotationGroup make_group(const GroupSpec& spec) {
  return generate_closure(spec, generators_of(spec));
}

std::shared_ptr<const FiniteRotationGroup> make_group_shared(const GroupSpec& spec) {
  return std::make_shared<const FiniteRotationGroup>(make_group(spec));
}

std::vector<std::vector<int>> left_cosets(const FiniteRotationGroup& group,
                                          const std::vector<int>& subgroup_ids) {
  if (subgroup_ids.empty()) {
    throw std::invalid_argument("left_cosets: empty subgroup");
  }
  std::vector<char> in_sub(group.size(), 0);
  for (int s : subgroup_ids) {
    if (s < 0 || s >= group.size()) {
      throw std::invalid_argument("left_cosets: subgroup index out of range");
    }
    in_sub[s] = 1;
  }
  if (!in_sub[group.identity_id]) {
    throw std::invalid_argument("left_cosets: subgroup does not contain the identity");
  }
  for (int a : subgroup_ids) {
    for (int b : subgroup_ids) {
      if (!in_sub[group.mul(a, b)]) {
        throw std::invalid_argument(
            "left_cosets: not a subgroup; product of elements " +
            std::to_string(a) + " and " + std::to_string(b) + " escapes");
      }
    }
  }

  std::vector<int> assigned(group.size(), -1);
  std::vector<std::vector<int>> cosets;
  for (int g = 0; g < group.size(); ++g) {
    if (assigned[g] >= 0) continue;
    std::vector<int> coset;
    coset.reserve(subgroup_ids.size());
    for (int h : subgroup_ids) {
      const int gh = group.mul(g, h);
      if (assigned[gh] >= 0) {
        throw std::logic_error("left_cosets: cosets are not disjoint");
      }
      assigned[gh] = static_cast<int>(cosets.size());
      coset.push_back(gh);
    }
    std::sort(coset.begin(), coset.end());
    cosets.push_back(std::move(coset));
  }
  return cosets;
}

std::vector<int> embed_subgroup(const FiniteRotationGroup& group,
                                const GroupSpec& sub) {
  const auto gens = generators_of(sub);
  std::vector<int> gen_ids;
  for (size_t k = 0; k < gens.size(); ++k) {
    int idx = -1;
    for (int i = 0; i < group.size(); ++i) {
      if (group.elements[i].distance(gens[k]) < 1e-9) {
        idx = i;
        break;
      }
    }
    if (idx < 0) {
      throw std::invalid_argument("embed_subgroup: generator " +
                                  std::to_string(k) + " of " + sub.name() +
                                  " is not an element of " + group.spec.name());
    }
    gen_ids.push_back(idx);
  }

  // Close the matched generators inside the parent via the Cayley table.
  std::vector<char> seen(group.size(), 0);
  std::vector<int> members{group.identity_id};
  seen[group.identity_id] = 1;
  for (size_t head = 0; head < members.size(); ++head) {
    for (int g : gen_ids) {
      const int p = group.mul(members[head], g);
      if (!seen[p]) {
        seen[p] = 1;
        members.push_back(p);
      }
    }
  }
  std::sort(members.begin(), members.end());
  return members;
}

}  // namespace steer3d
