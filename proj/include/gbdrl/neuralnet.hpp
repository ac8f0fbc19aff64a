// Copyright 2026 The gbdrl Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Edge-conditioned graph network with hand-written reverse mode.
//
// Each ECC layer computes, for node i with neighbors N(i),
//
//   X_out(i) = 1/|N(i)| * sum_{j in N(i)} F(e_ji) X_in(j) + bias
//
// where the filter network F maps the scalar edge feature to a
// d_out x d_in matrix (1 -> hidden tanh -> d_in*d_out). Edges are
// undirected, so each one carries a message both ways with the same
// filter. Layers are followed by ReLU, a global sum pool, dense ReLU
// layers and either m sigmoid heads (actor) or one linear unit (critic).
//
// All parameters live in one flat vector; named blocks index into it.

#ifndef GBDRL_NEURALNET_HPP_
#define GBDRL_NEURALNET_HPP_

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbdrl/core.hpp"
#include "gbdrl/graph_encode.hpp"

namespace gbdrl {

inline constexpr double kProbClamp = 1e-12;
inline constexpr int kWeightsSchema = 1;

enum class HeadKind { kActor, kCritic };

struct Architecture {
  HeadKind head = HeadKind::kActor;
  /// Number of binaries; width of the actor head.
  int m = 5;
  std::vector<int> ecc_widths{32, 32};
  int filter_hidden = 16;
  std::vector<int> dense_widths{64};

  static Architecture actor(int m) {
    Architecture a;
    a.m = m;
    return a;
  }
  static Architecture critic(int m) {
    Architecture a;
    a.head = HeadKind::kCritic;
    a.m = m;
    return a;
  }

  int outputs() const { return head == HeadKind::kActor ? m : 1; }

  std::string descriptor() const {
    std::ostringstream os;
    os << (head == HeadKind::kActor ? "actor" : "critic") << ";m=" << m << ";ecc=";
    for (std::size_t i = 0; i < ecc_widths.size(); ++i) os << (i ? "," : "") << ecc_widths[i];
    os << ";filter=" << filter_hidden << ";dense=";
    for (std::size_t i = 0; i < dense_widths.size(); ++i) os << (i ? "," : "") << dense_widths[i];
    os << ";pool=sum;agg=mean;act=relu";
    return os.str();
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct ParamBlock {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0, cols = 0;
  /// Fan sizes for initialization; zero marks a bias block.
  int fan_in = 0, fan_out = 0;
};

class NetParams {
 public:
  NetParams() = default;

  explicit NetParams(Architecture arch) : arch_(std::move(arch)) {
    validate(arch_.m >= 1, "network needs m >= 1");
    validate(!arch_.ecc_widths.empty(), "network needs at least one ECC layer");
    int din = 1;
    for (std::size_t l = 0; l < arch_.ecc_widths.size(); ++l) {
      const int dout = arch_.ecc_widths[l];
      const std::string p = "ecc" + std::to_string(l) + ".";
      add(p + "filter1.W", arch_.filter_hidden, 1, 1, arch_.filter_hidden);
      add(p + "filter1.b", arch_.filter_hidden, 1, 0, 0);
      add(p + "filter2.W", din * dout, arch_.filter_hidden, arch_.filter_hidden, din * dout);
      add(p + "filter2.b", din * dout, 1, 0, 0);
      add(p + "bias", dout, 1, 0, 0);
      din = dout;
    }
    for (std::size_t l = 0; l < arch_.dense_widths.size(); ++l) {
      const int dout = arch_.dense_widths[l];
      const std::string p = "dense" + std::to_string(l) + ".";
      add(p + "W", dout, din, din, dout);
      add(p + "b", dout, 1, 0, 0);
      din = dout;
    }
    add("head.W", arch_.outputs(), din, din, arch_.outputs());
    add("head.b", arch_.outputs(), 1, 0, 0);
    theta_ = Vector::Zero(size_);
  }

  const Architecture& arch() const { return arch_; }
  Eigen::Index size() const { return size_; }
  Vector& theta() { return theta_; }
  const Vector& theta() const { return theta_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  int block_index(const std::string& name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      if (blocks_[i].name == name) return static_cast<int>(i);
    throw ContractViolation("no parameter block '" + name + "'");
  }

  Eigen::Map<Matrix> block(int i) { return map(theta_, i); }
  Eigen::Map<const Matrix> block(int i) const { return cmap(theta_, i); }
  Eigen::Map<Matrix> map(Vector& flat, int i) const {
    const auto& b = blocks_[static_cast<std::size_t>(i)];
    return {flat.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<const Matrix> cmap(const Vector& flat, int i) const {
    const auto& b = blocks_[static_cast<std::size_t>(i)];
    return {flat.data() + b.offset, b.rows, b.cols};
  }

  /// Glorot-uniform weights, zero biases.
  template <typename Rng>
  void initialize(Rng& rng) {
    for (const auto& b : blocks_) {
      if (b.fan_in == 0) {
        theta_.segment(b.offset, b.rows * b.cols).setZero();
        continue;
      }
      const double r = std::sqrt(6.0 / (b.fan_in + b.fan_out));
      std::uniform_real_distribution<double> u(-r, r);
      for (Eigen::Index k = 0; k < b.rows * b.cols; ++k) theta_[b.offset + k] = u(rng);
    }
  }

 private:
  void add(const std::string& name, Eigen::Index rows, Eigen::Index cols, int fan_in, int fan_out) {
    blocks_.push_back({name, size_, rows, cols, fan_in, fan_out});
    size_ += rows * cols;
  }

  Architecture arch_;
  std::vector<ParamBlock> blocks_;
  Eigen::Index size_ = 0;
  Vector theta_;
};

template <typename Rng>
NetParams make_network(const Architecture& arch, Rng& rng) {
  NetParams p(arch);
  p.initialize(rng);
  return p;
}

/// Values recorded by a forward pass; consumed by exactly one backward.
struct GradientTape {
  struct Ecc {
    Matrix hidden;  // filter_hidden x E, post-tanh
    Matrix theta;   // (d_in*d_out) x E
    Matrix x_in;    // N x d_in
    Matrix pre;     // N x d_out, before ReLU
  };
  const BipartiteGraph* graph = nullptr;
  std::vector<Ecc> ecc;
  std::vector<Vector> dense_in, dense_pre;
  Vector head_in;
  Vector logits;
  bool consumed = false;
};

namespace detail {

inline void check_finite(const Matrix& m, const std::string& where) {
  if (!m.allFinite()) throw NumericalError("non-finite value in " + where);
}

inline Vector sigmoid(const Vector& z) {
  Vector p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    p[i] = z[i] >= 0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
  return p;
}

}  // namespace detail

/// One ECC layer; exposed for layer-level tests. filter1/filter2 are the
/// filter network blocks, x_in is N x d_in.
inline Matrix ecc_forward(const BipartiteGraph& g, const Matrix& x_in, const Matrix& f1w, const Vector& f1b,
                          const Matrix& f2w, const Vector& f2b, const Vector& bias,
                          GradientTape::Ecc* cache = nullptr) {
  const int n = g.num_nodes();
  const Eigen::Index din = x_in.cols();
  const Eigen::Index dout = bias.size();
  require(x_in.rows() == n, "ecc_forward: node feature rows must equal node count");
  require(f2w.rows() == din * dout && f2b.size() == din * dout, "ecc_forward: filter output size mismatch");
  require(f1w.cols() == 1 && f1w.rows() == f1b.size() && f2w.cols() == f1w.rows(),
          "ecc_forward: filter hidden size mismatch");
  const int ne = g.num_edges();
  Matrix hidden = (f1w * g.edge_features.transpose()).colwise() + f1b;
  hidden = hidden.array().tanh().matrix();
  Matrix theta = (f2w * hidden).colwise() + f2b;

  Matrix out = Matrix::Zero(n, dout);
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < ne; ++k) {
    const int a = g.n_var + g.edges[static_cast<std::size_t>(k)].con;
    const int b = g.edges[static_cast<std::size_t>(k)].var;
    Eigen::Map<const Matrix> tk(theta.col(k).data(), dout, din);
    out.row(a).noalias() += (tk * x_in.row(b).transpose()).transpose();
    out.row(b).noalias() += (tk * x_in.row(a).transpose()).transpose();
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  for (int i = 0; i < n; ++i)
    if (deg[static_cast<std::size_t>(i)] > 0) out.row(i) /= deg[static_cast<std::size_t>(i)];
  out.rowwise() += bias.transpose();
  if (cache) {
    cache->hidden = std::move(hidden);
    cache->theta = std::move(theta);
    cache->x_in = x_in;
    cache->pre = out;
  }
  return out;
}

/// Raw head outputs (logits for the actor, the value for the critic).
inline Vector forward_logits(const NetParams& params, const BipartiteGraph& g, GradientTape* tape = nullptr) {
  const Architecture& arch = params.arch();
  require(g.n_var == arch.m, "graph has " + std::to_string(g.n_var) + " variable nodes, network expects " +
                                 std::to_string(arch.m));
  require(g.node_features.size() == g.num_nodes() && g.edge_features.size() == g.num_edges(),
          "graph feature sizes are inconsistent");
  if (tape) {
    *tape = GradientTape{};
    tape->graph = &g;
  }
  Matrix x = g.node_features;  // N x 1
  int bi = 0;
  for (std::size_t l = 0; l < arch.ecc_widths.size(); ++l) {
    GradientTape::Ecc cache;
    const Matrix f1w = params.block(bi);
    const Vector f1b = params.block(bi + 1);
    const Matrix f2w = params.block(bi + 2);
    const Vector f2b = params.block(bi + 3);
    const Vector bias = params.block(bi + 4);
    bi += 5;
    Matrix pre = ecc_forward(g, x, f1w, f1b, f2w, f2b, bias, tape ? &cache : nullptr);
    detail::check_finite(pre, "ECC layer " + std::to_string(l));
    x = pre.cwiseMax(0.0);
    if (tape) tape->ecc.push_back(std::move(cache));
  }
  Vector h = x.colwise().sum().transpose();
  for (std::size_t l = 0; l < arch.dense_widths.size(); ++l) {
    Vector z = params.block(bi) * h + Vector(params.block(bi + 1));
    bi += 2;
    detail::check_finite(z, "dense layer " + std::to_string(l));
    if (tape) {
      tape->dense_in.push_back(h);
      tape->dense_pre.push_back(z);
    }
    h = z.cwiseMax(0.0);
  }
  Vector out = params.block(bi) * h + Vector(params.block(bi + 1));
  detail::check_finite(out, "output head");
  if (tape) {
    tape->head_in = h;
    tape->logits = out;
  }
  return out;
}

inline Vector actor_forward(const NetParams& params, const BipartiteGraph& g, GradientTape* tape = nullptr) {
  require(params.arch().head == HeadKind::kActor, "actor_forward needs actor parameters");
  return detail::sigmoid(forward_logits(params, g, tape));
}

inline double critic_forward(const NetParams& params, const BipartiteGraph& g, GradientTape* tape = nullptr) {
  require(params.arch().head == HeadKind::kCritic, "critic_forward needs critic parameters");
  return forward_logits(params, g, tape)[0];
}

/// Gradient of a scalar loss with respect to all parameters, given the
/// loss gradient with respect to the head outputs (logits / value).
inline Vector backward(const NetParams& params, GradientTape& tape, const Vector& d_out) {
  require(tape.graph != nullptr, "backward without a recorded forward pass");
  require(!tape.consumed, "backward called twice on one tape");
  require(d_out.size() == tape.logits.size(), "upstream gradient has wrong length");
  tape.consumed = true;
  const Architecture& arch = params.arch();
  const BipartiteGraph& g = *tape.graph;
  Vector grad = Vector::Zero(params.size());
  int bi = static_cast<int>(params.blocks().size()) - 2;

  params.map(grad, bi) = d_out * tape.head_in.transpose();
  params.map(grad, bi + 1) = d_out;
  Vector dh = params.block(bi).transpose() * d_out;
  for (int l = static_cast<int>(arch.dense_widths.size()) - 1; l >= 0; --l) {
    bi -= 2;
    const Vector dz = dh.cwiseProduct((tape.dense_pre[static_cast<std::size_t>(l)].array() > 0).cast<double>().matrix());
    params.map(grad, bi) = dz * tape.dense_in[static_cast<std::size_t>(l)].transpose();
    params.map(grad, bi + 1) = dz;
    dh = params.block(bi).transpose() * dz;
  }

  const int n = g.num_nodes();
  const int ne = g.num_edges();
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const auto& e : g.edges) {
    ++deg[static_cast<std::size_t>(g.n_var + e.con)];
    ++deg[static_cast<std::size_t>(e.var)];
  }
  // Sum pool: every node receives the pooled gradient.
  Matrix dx = dh.transpose().replicate(n, 1);
  for (int l = static_cast<int>(arch.ecc_widths.size()) - 1; l >= 0; --l) {
    bi -= 5;
    const GradientTape::Ecc& c = tape.ecc[static_cast<std::size_t>(l)];
    const Eigen::Index din = c.x_in.cols();
    const Eigen::Index dout = c.pre.cols();
    Matrix dpre = dx.cwiseProduct((c.pre.array() > 0).cast<double>().matrix());
    params.map(grad, bi + 4) = dpre.colwise().sum().transpose();
    for (int i = 0; i < n; ++i)
      if (deg[static_cast<std::size_t>(i)] > 0) dpre.row(i) /= deg[static_cast<std::size_t>(i)];
    Matrix dtheta(din * dout, ne);
    Matrix dxin = Matrix::Zero(n, din);
    for (int k = 0; k < ne; ++k) {
      const int a = g.n_var + g.edges[static_cast<std::size_t>(k)].con;
      const int b = g.edges[static_cast<std::size_t>(k)].var;
      Eigen::Map<const Matrix> tk(c.theta.col(k).data(), dout, din);
      Eigen::Map<Matrix> dtk(dtheta.col(k).data(), dout, din);
      dtk.noalias() = dpre.row(a).transpose() * c.x_in.row(b);
      dtk.noalias() += dpre.row(b).transpose() * c.x_in.row(a);
      if (l > 0) {
        dxin.row(b).noalias() += (tk.transpose() * dpre.row(a).transpose()).transpose();
        dxin.row(a).noalias() += (tk.transpose() * dpre.row(b).transpose()).transpose();
      }
    }
    params.map(grad, bi + 2) = dtheta * c.hidden.transpose();
    params.map(grad, bi + 3) = dtheta.rowwise().sum();
    const Matrix dhid = (params.block(bi + 2).transpose() * dtheta).cwiseProduct(
        (1.0 - c.hidden.array().square()).matrix());
    params.map(grad, bi) = dhid * g.edge_features;
    params.map(grad, bi + 1) = dhid.rowwise().sum();
    if (l > 0) dx = std::move(dxin);
  }
  if (!grad.allFinite()) throw NumericalError("non-finite gradient");
  return grad;
}

inline Vector clamp_probabilities(const Vector& p) { return p.cwiseMax(kProbClamp).cwiseMin(1.0 - kProbClamp); }

/// Mean binary cross-entropy over the m heads.
inline double bce_loss(const BinaryVector& y, const Vector& p) {
  require(static_cast<Eigen::Index>(y.size()) == p.size() && !y.empty(), "bce_loss: length mismatch");
  const Vector pc = clamp_probabilities(p);
  double s = 0;
  for (Eigen::Index i = 0; i < pc.size(); ++i)
    s += y[static_cast<std::size_t>(i)] ? -std::log(pc[i]) : -std::log(1.0 - pc[i]);
  return s / static_cast<double>(pc.size());
}

/// d bce / d logits for sigmoid heads.
inline Vector bce_logit_gradient(const BinaryVector& y, const Vector& p) {
  require(static_cast<Eigen::Index>(y.size()) == p.size(), "bce gradient: length mismatch");
  return (p - to_real(y)) / static_cast<double>(p.size());
}

template <typename Rng>
BinaryVector sample_action(const Vector& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BinaryVector a(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) a[static_cast<std::size_t>(i)] = u(rng) < p[i] ? 1 : 0;
  return a;
}

inline double log_prob(const Vector& p, const BinaryVector& a) {
  require(static_cast<Eigen::Index>(a.size()) == p.size(), "log_prob: length mismatch");
  const Vector pc = clamp_probabilities(p);
  double s = 0;
  for (Eigen::Index i = 0; i < pc.size(); ++i) s += std::log(a[static_cast<std::size_t>(i)] ? pc[i] : 1.0 - pc[i]);
  return s;
}

/// d log_prob / d logits.
inline Vector log_prob_logit_gradient(const Vector& p, const BinaryVector& a) { return to_real(a) - p; }

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector m, v;
  long long t = 0;
};

inline void adam_step(Vector& theta, const Vector& grad, AdamState& st, const AdamConfig& cfg = {}) {
  require(grad.size() == theta.size(), "adam_step: gradient length mismatch");
  if (st.m.size() != theta.size()) {
    st.m = Vector::Zero(theta.size());
    st.v = Vector::Zero(theta.size());
    st.t = 0;
  }
  ++st.t;
  st.m = cfg.beta1 * st.m + (1 - cfg.beta1) * grad;
  st.v = cfg.beta2 * st.v + (1 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double c2 = 1 - std::pow(cfg.beta2, static_cast<double>(st.t));
  theta.array() -= cfg.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + cfg.eps);
}

// Weights documents.

inline nlohmann::json network_to_json(const NetParams& p) {
  nlohmann::json doc;
  const Architecture& a = p.arch();
  doc["descriptor"] = a.descriptor();
  doc["architecture"] = {{"head", a.head == HeadKind::kActor ? "actor" : "critic"},
                         {"m", a.m},
                         {"ecc_widths", a.ecc_widths},
                         {"filter_hidden", a.filter_hidden},
                         {"dense_widths", a.dense_widths}};
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t i = 0; i < p.blocks().size(); ++i) {
    const auto& b = p.blocks()[i];
    const Vector flat = p.theta().segment(b.offset, b.rows * b.cols);
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"values", to_std(flat)}});
  }
  doc["blocks"] = std::move(blocks);
  return doc;
}

inline NetParams network_from_json(const nlohmann::json& doc) {
  try {
    const auto& ad = doc.at("architecture");
    Architecture a;
    a.head = ad.at("head").get<std::string>() == "actor" ? HeadKind::kActor : HeadKind::kCritic;
    a.m = ad.at("m").get<int>();
    a.ecc_widths = ad.at("ecc_widths").get<std::vector<int>>();
    a.filter_hidden = ad.at("filter_hidden").get<int>();
    a.dense_widths = ad.at("dense_widths").get<std::vector<int>>();
    if (doc.at("descriptor").get<std::string>() != a.descriptor())
      throw SchemaError("weights descriptor does not match its architecture record");
    NetParams p(a);
    const auto& blocks = doc.at("blocks");
    if (blocks.size() != p.blocks().size()) throw SchemaError("weights block count mismatch");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = p.blocks()[i];
      if (blocks[i].at("name").get<std::string>() != b.name || blocks[i].at("rows").get<Eigen::Index>() != b.rows ||
          blocks[i].at("cols").get<Eigen::Index>() != b.cols)
        throw SchemaError("weights block '" + b.name + "' has unexpected name or shape");
      const std::vector<double> v = blocks[i].at("values").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != b.rows * b.cols) throw SchemaError("weights block size mismatch");
      p.theta().segment(b.offset, b.rows * b.cols) = from_std(v);
    }
    if (!p.theta().allFinite()) throw SchemaError("weights contain non-finite values");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed weights: ") + e.what());
  }
}

/// A weights file holds an actor and optionally a critic.
struct PolicyWeights {
  NetParams actor;
  std::optional<NetParams> critic;
};

inline nlohmann::json weights_to_json(const PolicyWeights& w) {
  nlohmann::json doc;
  doc["schema_version"] = kWeightsSchema;
  doc["kind"] = "gbdrl_weights";
  doc["edge_convention"] = kEdgeConvention;
  doc["actor"] = network_to_json(w.actor);
  if (w.critic) doc["critic"] = network_to_json(*w.critic);
  return doc;
}

inline PolicyWeights weights_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("kind", "") != "gbdrl_weights") throw SchemaError("not a weights document");
  if (doc.value("schema_version", -1) != kWeightsSchema) throw SchemaError("unsupported weights schema_version");
  if (doc.value("edge_convention", "") != kEdgeConvention)
    throw SchemaError("weights were trained under a different edge enumeration convention");
  PolicyWeights w{network_from_json(doc.at("actor")), std::nullopt};
  if (w.actor.arch().head != HeadKind::kActor) throw SchemaError("actor record has a critic head");
  if (doc.contains("critic")) {
    w.critic = network_from_json(doc.at("critic"));
    if (w.critic->arch().head != HeadKind::kCritic) throw SchemaError("critic record has an actor head");
  }
  return w;
}

}  // namespace gbdrl

#endif  // GBDRL_NEURALNET_HPP_
