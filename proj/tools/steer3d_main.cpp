#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "steer3d/equivariance.hpp"
#include "steer3d/tetris.hpp"

using namespace steer3d;

namespace {

std::vector<RepKind> default_table_fields(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::O:
      return {RepKind::trivial(), RepKind::quotient(GroupSpec::T()),
              RepKind::quotient(GroupSpec::V()), RepKind::regular()};
    case GroupKind::T:
      return {RepKind::trivial(), RepKind::quotient(GroupSpec::V()), RepKind::regular()};
    case GroupKind::I:
      // the regular field of I is solvable pair-by-pair but too large for an
      // all-pairs sweep; keep the default table light
      return {RepKind::trivial(), RepKind::quotient(GroupSpec::T())};
    case GroupKind::SO3:
      return {RepKind::irrep(0), RepKind::irrep(1), RepKind::irrep(2)};
    default:
      return {RepKind::trivial(), RepKind::regular()};
  }
}

void write_or_print(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open output file " + out_path);
    os << text << "\n";
  }
}

ModelSpec equiv_model_spec(const GroupSpec& group, const std::string& scheme, int k,
                           double sigma) {
  ModelSpec spec;
  spec.group = group;
  spec.scheme = scheme;
  spec.k = k;
  spec.sigma = sigma;
  if (group.finite()) {
    spec.layers = {
        LayerSpec::conv({{RepKind::regular(), 1}}),
        LayerSpec::relu(),
        LayerSpec::conv({{RepKind::regular(), 1}}),
        LayerSpec::relu(),
        LayerSpec::conv({{RepKind::trivial(), 4}}),
        LayerSpec::global_pool(),
    };
  } else {
    const std::vector<std::pair<RepKind, int>> irreps{
        {RepKind::irrep(0), 1}, {RepKind::irrep(1), 1}, {RepKind::irrep(2), 1}};
    spec.layers = {
        LayerSpec::conv(irreps),
        LayerSpec::conv(irreps),
        LayerSpec::conv({{RepKind::trivial(), 4}}),
        LayerSpec::global_pool(),
    };
  }
  return spec;
}

ModelSpec tetris_model_spec(const GroupSpec& group, const RepKind& feature) {
  // hidden width ~24 channels regardless of the feature field
  int copies = 1;
  if (feature.cls == RepClass::Quotient) {
    copies = feature.sub.kind == GroupKind::V ? 4 : 12;
  }
  ModelSpec spec;
  spec.group = group;
  spec.scheme = "fd";
  spec.layers = {
      LayerSpec::conv({{feature, copies}}),
      LayerSpec::relu(),
      LayerSpec::avg_pool(2),
      LayerSpec::conv({{feature, copies}}),
      LayerSpec::relu(),
      LayerSpec::conv({{RepKind::trivial(), 16}}),
      LayerSpec::relu(),
      LayerSpec::global_pool(),
      LayerSpec::dense(8),
  };
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotation-steerable 3D convolution toolkit"};
  app.require_subcommand(1);

  unsigned seed = 0;
  double tol = 1e-8;
  std::string out_path;
  std::string format = "json";
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--tol", tol, "relative singular value cutoff")->capture_default_str();
  app.add_option("--out", out_path, "output file (stdout when empty)");
  app.add_option("--format", format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // group
  auto* cmd_group = app.add_subcommand("group", "dump a finite rotation group");
  std::string group_kind = "O";
  int group_n = 1;
  cmd_group->add_option("--kind", group_kind, "V|T|O|I|CN|DN")->required();
  cmd_group->add_option("--n", group_n, "order parameter for CN/DN");

  // basis
  auto* cmd_basis = app.add_subcommand("basis", "solve an equivariant coefficient basis");
  std::string basis_group = "O", basis_in = "trivial", basis_out = "trivial", basis_save;
  cmd_basis->add_option("--group", basis_group)->required();
  cmd_basis->add_option("--in", basis_in, "input field kind")->required();
  cmd_basis->add_option("--out", basis_out, "output field kind")->required();
  cmd_basis->add_option("--save", basis_save, "write the basis dump to this file");

  // table
  auto* cmd_table = app.add_subcommand("table", "solution-space dimension table");
  std::string table_group = "O";
  std::string table_fields;
  cmd_table->add_option("--group", table_group)->required();
  cmd_table->add_option("--fields", table_fields,
                        "comma-separated field kinds (defaults per group)");

  // equiv
  auto* cmd_equiv = app.add_subcommand("equiv", "equivariance error sweep");
  std::string equiv_group = "O", equiv_scheme = "fd", equiv_mode = "cubic";
  int equiv_k = 3, equiv_n = 100, equiv_grid = 16, equiv_inputs = 2;
  double equiv_sigma = 0.5;
  cmd_equiv->add_option("--group", equiv_group, "O or SO3 style group");
  cmd_equiv->add_option("--scheme", equiv_scheme)->check(CLI::IsMember({"fd", "gaussian"}));
  cmd_equiv->add_option("--k", equiv_k, "kernel size for gaussian scheme");
  cmd_equiv->add_option("--sigma", equiv_sigma, "gaussian width");
  cmd_equiv->add_option("--mode", equiv_mode)->check(CLI::IsMember({"cubic", "trilinear"}));
  cmd_equiv->add_option("--n", equiv_n, "number of sampled rotations");
  cmd_equiv->add_option("--grid", equiv_grid, "input grid size");
  cmd_equiv->add_option("--inputs", equiv_inputs, "random inputs per rotation");

  // tetris
  auto* cmd_tetris = app.add_subcommand("tetris", "train and test on the 8 shapes");
  std::string tetris_group = "O", tetris_features = "regular";
  int tetris_grid = 12, tetris_epochs = 200;
  double tetris_lr = 0.01;
  cmd_tetris->add_option("--group", tetris_group);
  cmd_tetris->add_option("--features", tetris_features,
                         "regular | quotient:V | quotient:T");
  cmd_tetris->add_option("--grid", tetris_grid)->check(CLI::PositiveNumber);
  cmd_tetris->add_option("--epochs", tetris_epochs);
  cmd_tetris->add_option("--lr", tetris_lr);

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "re-verify a basis over the full group");
  std::string verify_file, verify_group = "O", verify_in = "trivial", verify_out = "trivial";
  int verify_n = 200;
  cmd_verify->add_option("--file", verify_file, "basis dump to load (solves fresh otherwise)");
  cmd_verify->add_option("--group", verify_group);
  cmd_verify->add_option("--in", verify_in);
  cmd_verify->add_option("--out", verify_out);
  cmd_verify->add_option("--n", verify_n, "rotation samples for SO3");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_group) {
      GroupSpec spec = GroupSpec::parse(
          group_kind + ((group_kind == "CN" || group_kind == "DN")
                            ? "-" + std::to_string(group_n)
                            : ""));
      const auto group = make_group(spec);
      write_or_print(out_path, group.to_json().dump(2));
      std::cerr << "group " << spec.name() << " size " << group.size() << "\n";
    } else if (*cmd_basis) {
      const GroupSpec spec = GroupSpec::parse(basis_group);
      std::shared_ptr<const FiniteRotationGroup> group;
      if (spec.finite()) group = make_group_shared(spec);
      const auto rin = make_representation(spec, group, RepKind::parse(basis_in));
      const auto rout = make_representation(spec, group, RepKind::parse(basis_out));
      const KernelBasis basis =
          (rin.kind().cls == RepClass::Sum || rout.kind().cls == RepClass::Sum)
              ? solve_basis_blockwise(rin, rout, tol)
              : solve_basis(rin, rout, tol);
      const auto d = basis.dims();
      std::cout << d[0] << " " << d[1] << " " << d[2] << "\n";
      if (!basis_save.empty()) {
        std::ofstream os(basis_save);
        if (!os) throw std::runtime_error("cannot open " + basis_save);
        os << basis.to_json().dump() << "\n";
      }
    } else if (*cmd_table) {
      const GroupSpec spec = GroupSpec::parse(table_group);
      std::shared_ptr<const FiniteRotationGroup> group;
      if (spec.finite()) group = make_group_shared(spec);
      std::vector<RepKind> kinds;
      if (table_fields.empty()) {
        kinds = default_table_fields(spec);
      } else {
        size_t pos = 0;
        while (pos < table_fields.size()) {
          size_t end = table_fields.find(',', pos);
          if (end == std::string::npos) end = table_fields.size();
          kinds.push_back(RepKind::parse(table_fields.substr(pos, end - pos)));
          pos = end + 1;
        }
      }
      const auto table = dimension_table(spec, group, kinds, tol);
      nlohmann::json j;
      j["group"] = spec.name();
      for (size_t i = 0; i < kinds.size(); ++i) {
        for (size_t jdx = 0; jdx < kinds.size(); ++jdx) {
          j["entries"].push_back({{"in", kinds[i].name()},
                                  {"out", kinds[jdx].name()},
                                  {"dims", table.dims[i][jdx]}});
        }
      }
      write_or_print(out_path, j.dump(2));
      for (size_t i = 0; i < kinds.size(); ++i) {
        for (size_t jdx = 0; jdx < kinds.size(); ++jdx) {
          const auto& d = table.dims[i][jdx];
          std::cerr << kinds[i].name() << " -> " << kinds[jdx].name() << ": (" << d[0]
                    << "," << d[1] << "," << d[2] << ")\n";
        }
      }
    } else if (*cmd_equiv) {
      const GroupSpec spec = GroupSpec::parse(equiv_group);
      std::shared_ptr<const FiniteRotationGroup> group;
      if (spec.finite()) group = make_group_shared(spec);

      ErrorReport report;
      if (equiv_n > 0) {
        Model model(equiv_model_spec(spec, equiv_scheme, equiv_k, equiv_sigma), group);
        model.init_params(seed);

        std::mt19937_64 rng(seed + 1);
        std::vector<VoxelRotation> rotations;
        if (equiv_mode == "cubic") {
          const auto cubic = spec.finite() ? group : make_group_shared(GroupSpec::O());
          for (const auto& element : cubic->elements) {
            rotations.push_back({element, RotateMode::ExactCubic});
          }
        } else {
          for (int i = 0; i < equiv_n; ++i) {
            rotations.push_back({random_rotation(rng), RotateMode::Trilinear});
          }
        }
        std::vector<FieldTensor> inputs;
        for (int i = 0; i < equiv_inputs; ++i) {
          inputs.push_back(smooth_noise(model.input_field(), equiv_grid, 2.0, rng));
        }
        report = model_equivariance_error(model, rotations, inputs);
      }

      if (format == "csv") {
        std::ostringstream os;
        report.write_csv(os);
        write_or_print(out_path, os.str());
      } else {
        write_or_print(out_path, report.summary_json().dump(2));
      }
      std::cerr << "equiv mean " << report.mean() << " over " << report.defined()
                << " pairs\n";
    } else if (*cmd_tetris) {
      const GroupSpec spec = GroupSpec::parse(tetris_group);
      auto group = make_group_shared(spec);
      const RepKind feature = RepKind::parse(tetris_features);

      Model model(tetris_model_spec(spec, feature), group);
      model.init_params(seed);

      const auto data = tetris_dataset(tetris_grid, spec, group);
      TrainConfig cfg;
      cfg.epochs = tetris_epochs;
      cfg.lr = tetris_lr;
      cfg.seed = seed;
      const auto result = train(model, data, cfg);

      const auto cubic =
          spec.kind == GroupKind::O ? group : make_group_shared(GroupSpec::O());
      const auto test_set = tetris_rotated_test_set(data, *cubic);
      const double train_acc = evaluate(model, data);
      const double test_acc = evaluate(model, test_set);

      nlohmann::json j;
      j["group"] = spec.name();
      j["features"] = feature.name();
      j["grid"] = tetris_grid;
      j["epochs"] = tetris_epochs;
      j["seed"] = seed;
      j["train_accuracy"] = train_acc;
      j["test_accuracy"] = test_acc;
      j["final_loss"] = result.loss.empty() ? -1.0 : result.loss.back();
      write_or_print(out_path, j.dump(2));
      std::cerr << "tetris " << feature.name() << " train " << train_acc << " test "
                << test_acc << "\n";
    } else if (*cmd_verify) {
      KernelBasis basis;
      if (!verify_file.empty()) {
        std::ifstream is(verify_file);
        if (!is) throw std::runtime_error("cannot open " + verify_file);
        nlohmann::json j;
        is >> j;
        basis = basis_from_json(j);
      } else {
        const GroupSpec spec = GroupSpec::parse(verify_group);
        std::shared_ptr<const FiniteRotationGroup> group;
        if (spec.finite()) group = make_group_shared(spec);
        const auto rin = make_representation(spec, group, RepKind::parse(verify_in));
        const auto rout = make_representation(spec, group, RepKind::parse(verify_out));
        basis = solve_basis(rin, rout, tol);
      }
      const double residual = verify_basis(basis, verify_n, seed);
      nlohmann::json j;
      j["group"] = basis.rho_in.group_spec().name();
      j["rho_in"] = basis.rho_in.kind().name();
      j["rho_out"] = basis.rho_out.kind().name();
      j["dims"] = basis.dims();
      j["max_residual"] = residual;
      write_or_print(out_path, j.dump(2));
      std::cerr << "verify residual " << residual << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
