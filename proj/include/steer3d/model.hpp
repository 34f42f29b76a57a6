#pragma once

#include <string>
#include <variant>
#include <vector>

#include "steer3d/layers.hpp"

namespace steer3d {

/// One layer description. Conv layers name their output field; the
/// discretization scheme is shared model-wide.
struct LayerSpec {
  enum class Kind { Conv, Relu, BatchNorm, AvgPool, GlobalPool, Dense };
  Kind kind = Kind::Conv;
  std::vector<std::pair<RepKind, int>> out_factors;  // Conv
  int factor = 2;                                    // AvgPool
  int out_dim = 0;                                   // Dense

  static LayerSpec conv(std::vector<std::pair<RepKind, int>> factors) {
    LayerSpec s; s.kind = Kind::Conv; s.out_factors = std::move(factors); return s;
  }
  static LayerSpec relu() { LayerSpec s; s.kind = Kind::Relu; return s; }
  static LayerSpec batch_norm() { LayerSpec s; s.kind = Kind::BatchNorm; return s; }
  static LayerSpec avg_pool(int f) { LayerSpec s; s.kind = Kind::AvgPool; s.factor = f; return s; }
  static LayerSpec global_pool() { LayerSpec s; s.kind = Kind::GlobalPool; return s; }
  static LayerSpec dense(int out) { LayerSpec s; s.kind = Kind::Dense; s.out_dim = out; return s; }
};

struct ModelSpec {
  GroupSpec group;
  std::vector<std::pair<RepKind, int>> input_factors{{RepKind::trivial(), 1}};
  std::string scheme = "fd";  // "fd" or "gaussian"
  int k = 3;
  double sigma = 0.5;
  std::vector<LayerSpec> layers;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
};

/// A network assembled from a ModelSpec: equivariant convolutions whose
/// bases are solved at construction, plus the admissible pointwise layers.
/// Forward/backward run on whole batches so batch statistics are exact.
class Model {
 public:
  Model(const ModelSpec& spec, std::shared_ptr<const FiniteRotationGroup> group);

  const ModelSpec& spec() const { return spec_; }
  const FieldType& input_field() const { return input_field_; }
  int n_classes() const;
  int n_params() const;

  /// True when every factor feeding the global pool is trivial, so the pooled
  /// output is invariant (not merely equivariant) under input rotation.
  bool invariant_head() const;

  void init_params(unsigned seed);
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& params);

  /// Logits per sample. Uses running statistics for any BatchNorm layer when
  /// training = false; batch statistics otherwise.
  std::vector<Eigen::VectorXd> forward(const std::vector<FieldTensor>& batch,
                                       bool training = false);

  /// Parameter gradient for the given upstream logit gradients. Runs its own
  /// training-mode forward to populate the caches.
  Eigen::VectorXd gradient(const std::vector<FieldTensor>& batch,
                           const std::vector<Eigen::VectorXd>& dlogits);

  void save(const std::string& path) const;
  static Model load(const std::string& path,
                    std::shared_ptr<const FiniteRotationGroup> group);

 private:
  struct ConvNode { EquivConvLayer layer; };
  struct ReluNode { FieldType field; };
  struct BnNode { FieldBatchNorm bn; };
  struct PoolNode { int factor = 2; FieldType field; };
  struct GlobalPoolNode { FieldType field; };
  struct DenseNode { DenseLayer dense; };
  using Node = std::variant<ConvNode, ReluNode, BnNode, PoolNode, GlobalPoolNode, DenseNode>;

  ModelSpec spec_;
  std::shared_ptr<const FiniteRotationGroup> group_;
  FieldType input_field_;
  std::vector<Node> nodes_;

  struct Trace;
  std::vector<Eigen::VectorXd> run(const std::vector<FieldTensor>& batch, bool training,
                                   Trace* trace);
};

/// Softmax cross-entropy over a batch; also writes the logit gradients
/// (softmax - onehot) / batch_size when dlogits is non-null.
double cross_entropy(const std::vector<Eigen::VectorXd>& logits,
                     const std::vector<int>& labels,
                     std::vector<Eigen::VectorXd>* dlogits = nullptr);

/// Binary tensor + JSON sidecar dataset entry (little-endian float32,
/// row-major C x D x H x W).
void save_labeled_tensor(const std::string& path_base, const FieldTensor& tensor,
                         int label);
std::pair<FieldTensor, int> load_labeled_tensor(
    const std::string& path_base, const GroupSpec& spec,
    std::shared_ptr<const FiniteRotationGroup> group);

}  // namespace steer3d
