#include "steer3d/model.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace steer3d {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<std::pair<RepKind, int>> factors_from_name(const std::string& name) {
  const RepKind kind = RepKind::parse(name);
  if (kind.cls == RepClass::Sum) return kind.terms;
  return {{kind, 1}};
}

std::string factors_name(const std::vector<std::pair<RepKind, int>>& factors) {
  return RepKind::sum(factors).name();
}

}  // namespace

nlohmann::json ModelSpec::to_json() const {
  nlohmann::json j;
  j["group"] = group.name();
  j["input"] = factors_name(input_factors);
  j["scheme"] = scheme;
  j["k"] = k;
  j["sigma"] = sigma;
  auto arr = nlohmann::json::array();
  for (const auto& l : layers) {
    nlohmann::json jl;
    switch (l.kind) {
      case LayerSpec::Kind::Conv:
        jl["kind"] = "conv";
        jl["out"] = factors_name(l.out_factors);
        break;
      case LayerSpec::Kind::Relu: jl["kind"] = "relu"; break;
      case LayerSpec::Kind::BatchNorm: jl["kind"] = "batch_norm"; break;
      case LayerSpec::Kind::AvgPool:
        jl["kind"] = "avg_pool";
        jl["factor"] = l.factor;
        break;
      case LayerSpec::Kind::GlobalPool: jl["kind"] = "global_pool"; break;
      case LayerSpec::Kind::Dense:
        jl["kind"] = "dense";
        jl["out_dim"] = l.out_dim;
        break;
    }
    arr.push_back(jl);
  }
  j["layers"] = arr;
  return j;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.group = GroupSpec::parse(j.at("group").get<std::string>());
  spec.input_factors = factors_from_name(j.at("input").get<std::string>());
  spec.scheme = j.at("scheme").get<std::string>();
  spec.k = j.at("k").get<int>();
  spec.sigma = j.at("sigma").get<double>();
  for (const auto& jl : j.at("layers")) {
    const std::string kind = jl.at("kind").get<std::string>();
    if (kind == "conv") {
      spec.layers.push_back(LayerSpec::conv(factors_from_name(jl.at("out").get<std::string>())));
    } else if (kind == "relu") {
      spec.layers.push_back(LayerSpec::relu());
    } else if (kind == "batch_norm") {
      spec.layers.push_back(LayerSpec::batch_norm());
    } else if (kind == "avg_pool") {
      spec.layers.push_back(LayerSpec::avg_pool(jl.at("factor").get<int>()));
    } else if (kind == "global_pool") {
      spec.layers.push_back(LayerSpec::global_pool());
    } else if (kind == "dense") {
      spec.layers.push_back(LayerSpec::dense(jl.at("out_dim").get<int>()));
    } else {
      throw std::invalid_argument("ModelSpec: unknown layer kind '" + kind + "'");
    }
  }
  return spec;
}

Model::Model(const ModelSpec& spec, std::shared_ptr<const FiniteRotationGroup> group)
    : spec_(spec), group_(std::move(group)) {
  if (spec.group.finite() && !group_) {
    throw std::invalid_argument("Model: finite group spec requires a group instance");
  }
  const DiscretizationScheme scheme =
      spec.scheme == "fd" ? fd_stencils()
      : spec.scheme == "gaussian"
          ? gaussian_stencils(spec.k, spec.sigma)
          : throw std::invalid_argument("Model: unknown scheme '" + spec.scheme + "'");

  input_field_ = FieldType::make(spec.group, group_, spec.input_factors);
  FieldType current = input_field_;
  bool pooled = false;
  int vector_dim = 0;

  for (const auto& l : spec.layers) {
    if (pooled && l.kind != LayerSpec::Kind::Dense) {
      throw std::invalid_argument("Model: only dense layers may follow the global pool");
    }
    switch (l.kind) {
      case LayerSpec::Kind::Conv: {
        FieldType out = FieldType::make(spec.group, group_, l.out_factors);
        nodes_.push_back(ConvNode{EquivConvLayer::create(current, out, scheme)});
        current = out;
        break;
      }
      case LayerSpec::Kind::Relu:
        if (!current.permutation_like()) {
          throw std::invalid_argument("Model: relu on a non-permutation field");
        }
        nodes_.push_back(ReluNode{current});
        break;
      case LayerSpec::Kind::BatchNorm:
        nodes_.push_back(BnNode{FieldBatchNorm(current)});
        break;
      case LayerSpec::Kind::AvgPool:
        nodes_.push_back(PoolNode{l.factor, current});
        break;
      case LayerSpec::Kind::GlobalPool:
        nodes_.push_back(GlobalPoolNode{current});
        pooled = true;
        vector_dim = current.channels();
        break;
      case LayerSpec::Kind::Dense:
        if (!pooled) throw std::invalid_argument("Model: dense layer before global pool");
        nodes_.push_back(DenseNode{DenseLayer(vector_dim, l.out_dim)});
        vector_dim = l.out_dim;
        break;
    }
  }
  if (!pooled) {
    throw std::invalid_argument("Model: a global pool layer is required");
  }
}

int Model::n_classes() const {
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (const auto* d = std::get_if<DenseNode>(&*it)) {
      return static_cast<int>(d->dense.weight.rows());
    }
    if (const auto* g = std::get_if<GlobalPoolNode>(&*it)) {
      return g->field.channels();
    }
  }
  throw std::logic_error("Model: no output head");
}

bool Model::invariant_head() const {
  for (const auto& node : nodes_) {
    if (const auto* g = std::get_if<GlobalPoolNode>(&node)) {
      for (const auto& inst : g->field.instances) {
        if (inst.kind.cls != RepClass::Trivial) return false;
      }
      return true;
    }
  }
  return false;
}

int Model::n_params() const {
  int n = 0;
  for (const auto& node : nodes_) {
    if (const auto* c = std::get_if<ConvNode>(&node)) {
      n += c->layer.n_params();
    } else if (const auto* b = std::get_if<BnNode>(&node)) {
      n += 2 * static_cast<int>(b->bn.gamma.size());
    } else if (const auto* d = std::get_if<DenseNode>(&node)) {
      n += static_cast<int>(d->dense.weight.size() + d->dense.bias.size());
    }
  }
  return n;
}

void Model::init_params(unsigned seed) {
  std::mt19937_64 rng(seed);
  for (auto& node : nodes_) {
    if (auto* c = std::get_if<ConvNode>(&node)) {
      c->layer.init_he(rng);
    } else if (auto* d = std::get_if<DenseNode>(&node)) {
      d->dense.init_xavier(rng);
    }
  }
}

VectorXd Model::parameters() const {
  VectorXd p(n_params());
  int off = 0;
  for (const auto& node : nodes_) {
    if (const auto* c = std::get_if<ConvNode>(&node)) {
      p.segment(off, c->layer.n_params()) = c->layer.coeffs;
      off += c->layer.n_params();
    } else if (const auto* b = std::get_if<BnNode>(&node)) {
      const int n = static_cast<int>(b->bn.gamma.size());
      p.segment(off, n) = b->bn.gamma;
      p.segment(off + n, n) = b->bn.beta;
      off += 2 * n;
    } else if (const auto* d = std::get_if<DenseNode>(&node)) {
      const int nw = static_cast<int>(d->dense.weight.size());
      p.segment(off, nw) = Eigen::Map<const VectorXd>(d->dense.weight.data(), nw);
      off += nw;
      p.segment(off, d->dense.bias.size()) = d->dense.bias;
      off += static_cast<int>(d->dense.bias.size());
    }
  }
  return p;
}

void Model::set_parameters(const VectorXd& params) {
  if (params.size() != n_params()) {
    throw std::invalid_argument("Model::set_parameters: wrong length");
  }
  int off = 0;
  for (auto& node : nodes_) {
    if (auto* c = std::get_if<ConvNode>(&node)) {
      c->layer.coeffs = params.segment(off, c->layer.n_params());
      off += c->layer.n_params();
    } else if (auto* b = std::get_if<BnNode>(&node)) {
      const int n = static_cast<int>(b->bn.gamma.size());
      b->bn.gamma = params.segment(off, n);
      b->bn.beta = params.segment(off + n, n);
      off += 2 * n;
    } else if (auto* d = std::get_if<DenseNode>(&node)) {
      const int nw = static_cast<int>(d->dense.weight.size());
      Eigen::Map<VectorXd>(d->dense.weight.data(), nw) = params.segment(off, nw);
      off += nw;
      d->dense.bias = params.segment(off, d->dense.bias.size());
      off += static_cast<int>(d->dense.bias.size());
    }
  }
}

struct Model::Trace {
  // Input batch of every tensor-domain node, in node order (empty entry for
  // vector-domain nodes), plus the vector activations after the global pool.
  std::vector<std::vector<FieldTensor>> tensor_inputs;
  std::vector<std::vector<VectorXd>> vector_inputs;
};

std::vector<VectorXd> Model::run(const std::vector<FieldTensor>& batch, bool training,
                                 Trace* trace) {
  std::vector<FieldTensor> current = batch;
  std::vector<VectorXd> vectors;
  bool vectorized = false;

  for (auto& node : nodes_) {
    if (trace) {
      trace->tensor_inputs.push_back(vectorized ? std::vector<FieldTensor>{} : current);
      trace->vector_inputs.push_back(vectorized ? vectors : std::vector<VectorXd>{});
    }
    if (auto* c = std::get_if<ConvNode>(&node)) {
      current = c->layer.forward_batch(current);
    } else if (auto* r = std::get_if<ReluNode>(&node)) {
      (void)r;
      for (auto& t : current) t = pointwise_relu(t);
    } else if (auto* b = std::get_if<BnNode>(&node)) {
      current = b->bn.forward(current, training);
    } else if (auto* p = std::get_if<PoolNode>(&node)) {
      for (auto& t : current) t = avg_pool(t, p->factor);
    } else if (std::get_if<GlobalPoolNode>(&node)) {
      vectors.clear();
      for (auto& t : current) vectors.push_back(global_avg_pool(t));
      current.clear();
      vectorized = true;
    } else if (auto* d = std::get_if<DenseNode>(&node)) {
      for (auto& v : vectors) v = d->dense.forward(v);
    }
  }
  return vectors;
}

std::vector<VectorXd> Model::forward(const std::vector<FieldTensor>& batch,
                                     bool training) {
  return run(batch, training, nullptr);
}

VectorXd Model::gradient(const std::vector<FieldTensor>& batch,
                         const std::vector<VectorXd>& dlogits) {
  Trace trace;
  run(batch, true, &trace);

  const size_t n_batch = batch.size();
  std::vector<VectorXd> dvec = dlogits;
  std::vector<FieldTensor> dtensor;
  VectorXd grad = VectorXd::Zero(n_params());

  // Parameter segments appear in node order; walk backwards keeping offsets.
  std::vector<int> offsets(nodes_.size(), 0);
  {
    int off = 0;
    for (size_t i = 0; i < nodes_.size(); ++i) {
      offsets[i] = off;
      if (const auto* c = std::get_if<ConvNode>(&nodes_[i])) off += c->layer.n_params();
      else if (const auto* b = std::get_if<BnNode>(&nodes_[i]))
        off += 2 * static_cast<int>(b->bn.gamma.size());
      else if (const auto* d = std::get_if<DenseNode>(&nodes_[i]))
        off += static_cast<int>(d->dense.weight.size() + d->dense.bias.size());
    }
  }

  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    auto& node = nodes_[i];
    if (auto* d = std::get_if<DenseNode>(&node)) {
      const auto& xs = trace.vector_inputs[i];
      MatrixXd dw = MatrixXd::Zero(d->dense.weight.rows(), d->dense.weight.cols());
      VectorXd db = VectorXd::Zero(d->dense.bias.size());
      std::vector<VectorXd> dx(n_batch);
      for (size_t s = 0; s < n_batch; ++s) {
        dw += dvec[s] * xs[s].transpose();
        db += dvec[s];
        dx[s] = d->dense.weight.transpose() * dvec[s];
      }
      grad.segment(offsets[i], dw.size()) = Eigen::Map<VectorXd>(dw.data(), dw.size());
      grad.segment(offsets[i] + dw.size(), db.size()) = db;
      dvec = std::move(dx);
    } else if (auto* g = std::get_if<GlobalPoolNode>(&node)) {
      const auto& xs = trace.tensor_inputs[i];
      dtensor.clear();
      for (size_t s = 0; s < n_batch; ++s) {
        dtensor.push_back(global_avg_pool_backward(dvec[s], g->field, xs[s].n1,
                                                   xs[s].n2, xs[s].n3));
      }
    } else if (auto* p = std::get_if<PoolNode>(&node)) {
      const auto& xs = trace.tensor_inputs[i];
      for (size_t s = 0; s < n_batch; ++s) {
        dtensor[s] = avg_pool_backward(dtensor[s], p->factor, p->field, xs[s].n1,
                                       xs[s].n2, xs[s].n3);
      }
    } else if (auto* b = std::get_if<BnNode>(&node)) {
      const auto bg = b->bn.backward(trace.tensor_inputs[i], dtensor);
      dtensor = bg.input_grads;
      const int n = static_cast<int>(b->bn.gamma.size());
      grad.segment(offsets[i], n) = bg.dgamma;
      grad.segment(offsets[i] + n, n) = bg.dbeta;
    } else if (std::get_if<ReluNode>(&node)) {
      const auto& xs = trace.tensor_inputs[i];
      for (size_t s = 0; s < n_batch; ++s) {
        dtensor[s] = pointwise_relu_backward(xs[s], dtensor[s]);
      }
    } else if (auto* c = std::get_if<ConvNode>(&node)) {
      auto gr = c->layer.backward_batch(trace.tensor_inputs[i], dtensor);
      grad.segment(offsets[i], gr.coeff_grads.size()) = gr.coeff_grads;
      dtensor = std::move(gr.input_grads);
    }
  }
  return grad;
}

double cross_entropy(const std::vector<VectorXd>& logits, const std::vector<int>& labels,
                     std::vector<VectorXd>* dlogits) {
  if (logits.size() != labels.size() || logits.empty()) {
    throw std::invalid_argument("cross_entropy: batch mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(logits.size());
  double loss = 0.0;
  if (dlogits) dlogits->resize(logits.size());
  for (size_t s = 0; s < logits.size(); ++s) {
    const VectorXd& z = logits[s];
    const double zmax = z.maxCoeff();
    const VectorXd e = (z.array() - zmax).exp();
    const double sum = e.sum();
    loss -= inv_n * (z(labels[s]) - zmax - std::log(sum));
    if (dlogits) {
      VectorXd p = e / sum;
      p(labels[s]) -= 1.0;
      (*dlogits)[s] = inv_n * p;
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'S', '3', 'D', 'M', 'O', 'D', 'L', '\n'};
}

void Model::save(const std::string& path) const {
  nlohmann::json header;
  header["spec"] = spec_.to_json();
  header["n_params"] = n_params();
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Model::save: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  const VectorXd p = parameters();
  out.write(reinterpret_cast<const char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
}

Model Model::load(const std::string& path,
                  std::shared_ptr<const FiniteRotationGroup> group) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Model::load: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("Model::load: bad magic in " + path);
  }
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  const auto header = nlohmann::json::parse(htext);

  Model model(ModelSpec::from_json(header.at("spec")), std::move(group));
  const int n = header.at("n_params").get<int>();
  if (n != model.n_params()) throw std::runtime_error("Model::load: parameter count mismatch");
  VectorXd p(n);
  in.read(reinterpret_cast<char*>(p.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("Model::load: truncated parameter blob");
  model.set_parameters(p);
  return model;
}

void save_labeled_tensor(const std::string& path_base, const FieldTensor& tensor,
                         int label) {
  nlohmann::json side;
  side["shape"] = {tensor.channels(), tensor.n1, tensor.n2, tensor.n3};
  side["field"] = tensor.field.name();
  side["label"] = label;
  std::ofstream js(path_base + ".json");
  if (!js) throw std::runtime_error("save_labeled_tensor: cannot open sidecar");
  js << side.dump(2) << "\n";

  std::ofstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("save_labeled_tensor: cannot open blob");
  std::vector<float> f32(tensor.data.begin(), tensor.data.end());
  bin.write(reinterpret_cast<const char*>(f32.data()),
            static_cast<std::streamsize>(f32.size() * sizeof(float)));
}

std::pair<FieldTensor, int> load_labeled_tensor(
    const std::string& path_base, const GroupSpec& spec,
    std::shared_ptr<const FiniteRotationGroup> group) {
  std::ifstream js(path_base + ".json");
  if (!js) throw std::runtime_error("load_labeled_tensor: missing sidecar");
  nlohmann::json side;
  js >> side;
  const auto shape = side.at("shape").get<std::vector<int>>();
  const RepKind kind = RepKind::parse(side.at("field").get<std::string>());
  const auto factors = kind.cls == RepClass::Sum
                           ? kind.terms
                           : std::vector<std::pair<RepKind, int>>{{kind, 1}};

  FieldTensor t(FieldType::make(spec, std::move(group), factors), shape[1], shape[2],
                shape[3]);
  if (t.channels() != shape[0]) {
    throw std::runtime_error("load_labeled_tensor: channel mismatch");
  }
  std::ifstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("load_labeled_tensor: missing blob");
  std::vector<float> f32(t.data.size());
  bin.read(reinterpret_cast<char*>(f32.data()),
           static_cast<std::streamsize>(f32.size() * sizeof(float)));
  if (!bin) throw std::runtime_error("load_labeled_tensor: truncated blob");
  for (size_t i = 0; i < f32.size(); ++i) t.data[i] = f32[i];
  return {std::move(t), side.at("label").get<int>()};
}

}  // namespace steer3d
