#include "steer3d/basis.hpp"

#include <map>
#include <stdexcept>

#include "steer3d/linalg.hpp"

namespace steer3d {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PdoCoefficients PdoCoefficients::zero(int out_dim, int in_dim) {
  return {MatrixXd::Zero(out_dim, in_dim), MatrixXd::Zero(out_dim, 3 * in_dim),
          MatrixXd::Zero(out_dim, 6 * in_dim)};
}

MatrixXd p_matrix() {
  MatrixXd p = MatrixXd::Zero(6, 9);
  p(0, 0) = 1.0;
  p(1, 1) = 0.5; p(1, 3) = 0.5;
  p(2, 2) = 0.5; p(2, 6) = 0.5;
  p(3, 4) = 1.0;
  p(4, 5) = 0.5; p(4, 7) = 0.5;
  p(5, 8) = 1.0;
  return p;
}

MatrixXd p_dagger() {
  MatrixXd pd = MatrixXd::Zero(9, 6);
  pd(0, 0) = 1.0;
  pd(1, 1) = 1.0;
  pd(2, 2) = 1.0;
  pd(3, 1) = 1.0;
  pd(4, 3) = 1.0;
  pd(5, 4) = 1.0;
  pd(6, 2) = 1.0;
  pd(7, 4) = 1.0;
  pd(8, 5) = 1.0;
  return pd;
}

ConstraintRhs constraint_rhs(const Mat3& g, const MatrixXd& rho_in_g) {
  ConstraintRhs rhs;
  rhs.r0 = rho_in_g;
  rhs.r1 = kron(g, rho_in_g);
  const MatrixXd sym = p_matrix() * kron(g, g) * p_dagger();
  rhs.r2 = kron(sym, rho_in_g);
  return rhs;
}

ConstraintBlocks constraint_blocks(const Mat3& g, const MatrixXd& rho_in_g,
                                   const MatrixXd& rho_out_g) {
  const int k = static_cast<int>(rho_in_g.rows());
  const int kp = static_cast<int>(rho_out_g.rows());
  if (rho_in_g.cols() != k || rho_out_g.cols() != kp) {
    throw std::invalid_argument("constraint_blocks: representations must be square");
  }
  const ConstraintRhs rhs = constraint_rhs(g, rho_in_g);
  ConstraintBlocks b;
  b.m0 = kron(MatrixXd::Identity(k, k), rho_out_g) -
         kron(rhs.r0.transpose(), MatrixXd::Identity(kp, kp));
  b.m1 = kron(MatrixXd::Identity(3 * k, 3 * k), rho_out_g) -
         kron(rhs.r1.transpose(), MatrixXd::Identity(kp, kp));
  b.m2 = kron(MatrixXd::Identity(6 * k, 6 * k), rho_out_g) -
         kron(rhs.r2.transpose(), MatrixXd::Identity(kp, kp));
  return b;
}

std::vector<Rotation3> solver_generators(const GroupSpec& spec,
                                         const FiniteRotationGroup* group) {
  if (!spec.finite()) return {rot_z(1.0), rot_y(1.0)};
  if (group) {
    std::vector<Rotation3> gens;
    for (int id : group->generator_ids) gens.push_back(group->elements[id]);
    return gens;
  }
  return generators_of(spec);
}

namespace {

/// Reshape an orthonormal null-space column into the K' x cols coefficient
/// matrix it vectorizes (column-major, matching vec()).
std::vector<MatrixXd> unvectorize(const MatrixXd& null_basis, int kp, int cols) {
  std::vector<MatrixXd> out;
  out.reserve(null_basis.cols());
  for (int c = 0; c < null_basis.cols(); ++c) {
    out.push_back(Eigen::Map<const MatrixXd>(null_basis.col(c).data(), kp, cols));
  }
  return out;
}

}  // namespace

KernelBasis solve_basis(const Representation& rho_in, const Representation& rho_out,
                        double rel_tol) {
  if (!(rho_in.group_spec() == rho_out.group_spec())) {
    throw std::invalid_argument("solve_basis: field group mismatch");
  }
  const GroupSpec spec = rho_in.group_spec();
  const FiniteRotationGroup* group = rho_in.is_finite() ? &rho_in.group() : nullptr;
  const auto gens = solver_generators(spec, group);

  const int k = rho_in.dim();
  const int kp = rho_out.dim();
  const int n_gens = static_cast<int>(gens.size());

  MatrixXd stack0(n_gens * k * kp, k * kp);
  MatrixXd stack1(n_gens * 3 * k * kp, 3 * k * kp);
  MatrixXd stack2(n_gens * 6 * k * kp, 6 * k * kp);
  for (int i = 0; i < n_gens; ++i) {
    const ConstraintBlocks blocks =
        constraint_blocks(gens[i].matrix(), rho_in(gens[i]), rho_out(gens[i]));
    stack0.middleRows(i * k * kp, k * kp) = blocks.m0;
    stack1.middleRows(i * 3 * k * kp, 3 * k * kp) = blocks.m1;
    stack2.middleRows(i * 6 * k * kp, 6 * k * kp) = blocks.m2;
  }

  KernelBasis basis;
  basis.rho_in = rho_in;
  basis.rho_out = rho_out;
  basis.basis0 = unvectorize(null_space(stack0, rel_tol), kp, k);
  basis.basis1 = unvectorize(null_space(stack1, rel_tol), kp, 3 * k);
  basis.basis2 = unvectorize(null_space(stack2, rel_tol), kp, 6 * k);
  return basis;
}

KernelBasis solve_basis_blockwise(const Representation& rho_in,
                                  const Representation& rho_out, double rel_tol) {
  if (!(rho_in.group_spec() == rho_out.group_spec())) {
    throw std::invalid_argument("solve_basis_blockwise: field group mismatch");
  }
  const GroupSpec spec = rho_in.group_spec();
  const auto group = rho_in.is_finite() ? rho_in.group_ptr() : nullptr;

  const std::vector<RepKind> in_factors = rho_in.kind().factors();
  const std::vector<RepKind> out_factors = rho_out.kind().factors();

  std::vector<Representation> in_reps, out_reps;
  std::vector<int> in_off{0}, out_off{0};
  for (const auto& kf : in_factors) {
    in_reps.push_back(make_representation(spec, group, kf));
    in_off.push_back(in_off.back() + in_reps.back().dim());
  }
  for (const auto& kf : out_factors) {
    out_reps.push_back(make_representation(spec, group, kf));
    out_off.push_back(out_off.back() + out_reps.back().dim());
  }
  const int k = in_off.back();
  const int kp = out_off.back();
  if (k != rho_in.dim() || kp != rho_out.dim()) {
    throw std::logic_error("solve_basis_blockwise: factor dims do not add up");
  }

  KernelBasis full;
  full.rho_in = rho_in;
  full.rho_out = rho_out;

  std::map<std::pair<std::string, std::string>, KernelBasis> cache;
  for (size_t i = 0; i < out_factors.size(); ++i) {
    for (size_t j = 0; j < in_factors.size(); ++j) {
      const auto key = std::make_pair(in_factors[j].name(), out_factors[i].name());
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, solve_basis(in_reps[j], out_reps[i], rel_tol)).first;
      }
      const KernelBasis& pair_basis = it->second;
      const int di = out_reps[i].dim();
      const int dj = in_reps[j].dim();

      for (const auto& c0 : pair_basis.basis0) {
        MatrixXd b = MatrixXd::Zero(kp, k);
        b.block(out_off[i], in_off[j], di, dj) = c0;
        full.basis0.push_back(std::move(b));
      }
      for (const auto& c1 : pair_basis.basis1) {
        MatrixXd b = MatrixXd::Zero(kp, 3 * k);
        for (int a = 0; a < 3; ++a) {
          b.block(out_off[i], a * k + in_off[j], di, dj) = c1.middleCols(a * dj, dj);
        }
        full.basis1.push_back(std::move(b));
      }
      for (const auto& c2 : pair_basis.basis2) {
        MatrixXd b = MatrixXd::Zero(kp, 6 * k);
        for (int a = 0; a < 6; ++a) {
          b.block(out_off[i], a * k + in_off[j], di, dj) = c2.middleCols(a * dj, dj);
        }
        full.basis2.push_back(std::move(b));
      }
    }
  }
  return full;
}

double verify_basis(const KernelBasis& basis, int n_samples, unsigned seed) {
  const Representation& rho_in = basis.rho_in;
  const Representation& rho_out = basis.rho_out;

  auto residual_at = [&](const Rotation3& g, const MatrixXd& in_g,
                         const MatrixXd& out_g) {
    const ConstraintRhs rhs = constraint_rhs(g.matrix(), in_g);
    double worst = 0.0;
    for (const auto& b : basis.basis0) {
      worst = std::max(worst, (out_g * b - b * rhs.r0).norm());
    }
    for (const auto& b : basis.basis1) {
      worst = std::max(worst, (out_g * b - b * rhs.r1).norm());
    }
    for (const auto& b : basis.basis2) {
      worst = std::max(worst, (out_g * b - b * rhs.r2).norm());
    }
    return worst;
  };

  double worst = 0.0;
  if (rho_in.is_finite()) {
    const auto& group = rho_in.group();
    for (int g = 0; g < group.size(); ++g) {
      worst = std::max(worst, residual_at(group.elements[g], rho_in.at(g), rho_out.at(g)));
    }
  } else {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_samples; ++i) {
      const Rotation3 g = random_rotation(rng);
      worst = std::max(worst, residual_at(g, rho_in(g), rho_out(g)));
    }
  }
  return worst;
}

PdoCoefficients KernelBasis::combine(const VectorXd& coefficients) const {
  const auto d = dims();
  if (coefficients.size() != total()) {
    throw std::invalid_argument("KernelBasis::combine: expected " +
                                std::to_string(total()) + " coefficients");
  }
  PdoCoefficients c = PdoCoefficients::zero(rho_out.dim(), rho_in.dim());
  int idx = 0;
  for (int i = 0; i < d[0]; ++i) c.b0 += coefficients(idx++) * basis0[i];
  for (int i = 0; i < d[1]; ++i) c.b1 += coefficients(idx++) * basis1[i];
  for (int i = 0; i < d[2]; ++i) c.b2 += coefficients(idx++) * basis2[i];
  return c;
}

VectorXd KernelBasis::coefficient_gradients(const PdoCoefficients& grad) const {
  VectorXd out(total());
  int idx = 0;
  for (const auto& b : basis0) out(idx++) = (grad.b0.array() * b.array()).sum();
  for (const auto& b : basis1) out(idx++) = (grad.b1.array() * b.array()).sum();
  for (const auto& b : basis2) out(idx++) = (grad.b2.array() * b.array()).sum();
  return out;
}

DimensionTable dimension_table(const GroupSpec& spec,
                               std::shared_ptr<const FiniteRotationGroup> group,
                               const std::vector<RepKind>& kinds, double rel_tol) {
  DimensionTable table;
  table.kinds = kinds;
  std::vector<Representation> reps;
  for (const auto& kind : kinds) {
    reps.push_back(make_representation(spec, group, kind));
  }
  table.dims.resize(kinds.size());
  for (size_t i = 0; i < kinds.size(); ++i) {
    table.dims[i].resize(kinds.size());
    for (size_t j = 0; j < kinds.size(); ++j) {
      table.dims[i][j] = solve_basis(reps[i], reps[j], rel_tol).dims();
    }
  }
  return table;
}

namespace {

nlohmann::json matrices_to_json(const std::vector<MatrixXd>& ms) {
  auto arr = nlohmann::json::array();
  for (const auto& m : ms) {
    nlohmann::json jm;
    jm["rows"] = m.rows();
    jm["cols"] = m.cols();
    std::vector<double> flat(m.size());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) flat[r * m.cols() + c] = m(r, c);
    jm["data"] = flat;
    arr.push_back(jm);
  }
  return arr;
}

std::vector<MatrixXd> matrices_from_json(const nlohmann::json& arr) {
  std::vector<MatrixXd> out;
  for (const auto& jm : arr) {
    const int rows = jm.at("rows").get<int>();
    const int cols = jm.at("cols").get<int>();
    const auto flat = jm.at("data").get<std::vector<double>>();
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

nlohmann::json KernelBasis::to_json() const {
  nlohmann::json j;
  j["group"] = rho_in.group_spec().name();
  j["rho_in"] = rho_in.kind().name();
  j["rho_out"] = rho_out.kind().name();
  j["dims"] = dims();
  j["basis0"] = matrices_to_json(basis0);
  j["basis1"] = matrices_to_json(basis1);
  j["basis2"] = matrices_to_json(basis2);
  return j;
}

KernelBasis basis_from_json(const nlohmann::json& j) {
  const GroupSpec spec = GroupSpec::parse(j.at("group").get<std::string>());
  std::shared_ptr<const FiniteRotationGroup> group;
  if (spec.finite()) group = make_group_shared(spec);
  KernelBasis basis;
  basis.rho_in = make_representation(spec, group, RepKind::parse(j.at("rho_in").get<std::string>()));
  basis.rho_out = make_representation(spec, group, RepKind::parse(j.at("rho_out").get<std::string>()));
  basis.basis0 = matrices_from_json(j.at("basis0"));
  basis.basis1 = matrices_from_json(j.at("basis1"));
  basis.basis2 = matrices_from_json(j.at("basis2"));
  return basis;
}

}  // namespace steer3d
