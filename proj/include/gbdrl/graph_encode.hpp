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

// Bipartite variable/constraint graph of a master problem.
//
// Nodes 0..m-1 are the binaries (feature: previous assignment). Constraint
// nodes follow: optimality cuts in K_O order, feasibility cuts in K_F
// order, then the pure-binary rows. The epigraph variable mu_b gets no node.
// Edges are listed constraint-major with ascending variable index; saved
// weights depend on this order.

#ifndef GBDRL_GRAPH_ENCODE_HPP_
#define GBDRL_GRAPH_ENCODE_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbdrl/core.hpp"
#include "gbdrl/master.hpp"

namespace gbdrl {

inline constexpr double kEdgeTol = 1e-12;
inline constexpr const char* kEdgeConvention = "constraint-major/var-ascending/opt-feas-pure";

enum class ConstraintNodeKind { kOptimalityCut, kFeasibilityCut, kPureBinary };

struct GraphEdge {
  int con = 0;  // constraint index, 0-based among constraint nodes
  int var = 0;
};

struct BipartiteGraph {
  int n_var = 0;
  int n_con = 0;
  /// Length n_var + n_con.
  Vector node_features;
  std::vector<GraphEdge> edges;
  Vector edge_features;
  std::vector<ConstraintNodeKind> con_kind;

  int num_nodes() const { return n_var + n_con; }
  int num_edges() const { return static_cast<int>(edges.size()); }

  /// Dense symmetric 0/1 adjacency over all nodes.
  Matrix adjacency() const {
    Matrix a = Matrix::Zero(num_nodes(), num_nodes());
    for (const auto& e : edges) {
      a(n_var + e.con, e.var) = 1;
      a(e.var, n_var + e.con) = 1;
    }
    return a;
  }
};

namespace detail {

inline void append_row(BipartiteGraph& g, const Vector& coef, double feature, ConstraintNodeKind kind,
                       std::vector<double>& nodes, std::vector<double>& efeat) {
  const int con = g.n_con++;
  nodes.push_back(feature);
  g.con_kind.push_back(kind);
  for (int j = 0; j < g.n_var; ++j) {
    if (std::abs(coef[j]) > kEdgeTol) {
      g.edges.push_back({con, j});
      efeat.push_back(coef[j]);
    }
  }
}

}  // namespace detail

/// Raw (unnormalized) encoding of the master state.
inline BipartiteGraph encode(const MasterState& state) {
  BipartiteGraph g;
  g.n_var = state.m();
  std::vector<double> nodes, efeat;
  for (int j = 0; j < g.n_var; ++j) nodes.push_back(state.y_prev()[static_cast<std::size_t>(j)]);
  for (const auto& c : state.opt_cuts())
    detail::append_row(g, c.w, -c.beta, ConstraintNodeKind::kOptimalityCut, nodes, efeat);
  for (const auto& c : state.feas_cuts())
    detail::append_row(g, c.v, -c.gamma, ConstraintNodeKind::kFeasibilityCut, nodes, efeat);
  for (Eigen::Index t = 0; t < state.K().rows(); ++t)
    detail::append_row(g, state.K().row(t).transpose(), state.b()[t], ConstraintNodeKind::kPureBinary, nodes,
                       efeat);
  g.node_features = from_std(nodes);
  g.edge_features = from_std(efeat);
  for (Eigen::Index i = 0; i < g.node_features.size(); ++i)
    if (!std::isfinite(g.node_features[i])) throw NumericalError("non-finite node feature");
  for (Eigen::Index i = 0; i < g.edge_features.size(); ++i)
    if (!std::isfinite(g.edge_features[i])) throw NumericalError("non-finite edge feature");
  return g;
}

/// Per-graph max-abs scaling of constraint-node features and of edge
/// features, each on its own. Variable features are left alone.
inline BipartiteGraph normalize(BipartiteGraph g) {
  double cmax = 0;
  for (int i = g.n_var; i < g.num_nodes(); ++i) cmax = std::max(cmax, std::abs(g.node_features[i]));
  if (cmax > 0)
    for (int i = g.n_var; i < g.num_nodes(); ++i) g.node_features[i] /= cmax;
  const double emax = g.edge_features.size() ? g.edge_features.cwiseAbs().maxCoeff() : 0.0;
  if (emax > 0) g.edge_features /= emax;
  return g;
}

inline BipartiteGraph encode_normalized(const MasterState& state) { return normalize(encode(state)); }

/// Reorders constraint nodes: new constraint i is old constraint perm[i].
inline BipartiteGraph permute_constraints(const BipartiteGraph& g, const std::vector<int>& perm) {
  require(static_cast<int>(perm.size()) == g.n_con, "permutation length must equal n_con");
  BipartiteGraph out;
  out.n_var = g.n_var;
  out.n_con = g.n_con;
  out.node_features.resize(g.num_nodes());
  out.node_features.head(g.n_var) = g.node_features.head(g.n_var);
  std::vector<std::vector<std::pair<int, double>>> by_con(static_cast<std::size_t>(g.n_con));
  for (int k = 0; k < g.num_edges(); ++k)
    by_con[static_cast<std::size_t>(g.edges[static_cast<std::size_t>(k)].con)].emplace_back(
        g.edges[static_cast<std::size_t>(k)].var, g.edge_features[k]);
  std::vector<double> efeat;
  for (int i = 0; i < g.n_con; ++i) {
    const int old = perm[static_cast<std::size_t>(i)];
    out.node_features[g.n_var + i] = g.node_features[g.n_var + old];
    out.con_kind.push_back(g.con_kind[static_cast<std::size_t>(old)]);
    for (const auto& [var, f] : by_con[static_cast<std::size_t>(old)]) {
      out.edges.push_back({i, var});
      efeat.push_back(f);
    }
  }
  out.edge_features = from_std(efeat);
  return out;
}

inline const char* to_string(ConstraintNodeKind k) {
  switch (k) {
    case ConstraintNodeKind::kOptimalityCut: return "optimality";
    case ConstraintNodeKind::kFeasibilityCut: return "feasibility";
    default: return "pure_binary";
  }
}

inline nlohmann::json graph_to_json(const BipartiteGraph& g) {
  nlohmann::json doc;
  doc["n_var"] = g.n_var;
  doc["n_con"] = g.n_con;
  doc["node_features"] = to_std(g.node_features);
  doc["edge_features"] = to_std(g.edge_features);
  nlohmann::json edges = nlohmann::json::array();
  // Adjacency triplets (constraint node id, variable node id, 1).
  for (const auto& e : g.edges) edges.push_back({g.n_var + e.con, e.var, 1});
  doc["edges"] = std::move(edges);
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : g.con_kind) kinds.push_back(to_string(k));
  doc["con_kind"] = std::move(kinds);
  return doc;
}

inline BipartiteGraph graph_from_json(const nlohmann::json& doc) {
  BipartiteGraph g;
  try {
    g.n_var = doc.at("n_var").get<int>();
    g.n_con = doc.at("n_con").get<int>();
    g.node_features = from_std(doc.at("node_features").get<std::vector<double>>());
    g.edge_features = from_std(doc.at("edge_features").get<std::vector<double>>());
    for (const auto& t : doc.at("edges")) g.edges.push_back({t.at(0).get<int>() - g.n_var, t.at(1).get<int>()});
    for (const auto& k : doc.at("con_kind")) {
      const std::string s = k.get<std::string>();
      g.con_kind.push_back(s == "optimality"    ? ConstraintNodeKind::kOptimalityCut
                           : s == "feasibility" ? ConstraintNodeKind::kFeasibilityCut
                                                : ConstraintNodeKind::kPureBinary);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed graph record: ") + e.what());
  }
  if (g.node_features.size() != g.num_nodes() || g.edge_features.size() != g.num_edges() ||
      static_cast<int>(g.con_kind.size()) != g.n_con)
    throw SchemaError("graph record sizes are inconsistent");
  for (const auto& e : g.edges)
    if (e.con < 0 || e.con >= g.n_con || e.var < 0 || e.var >= g.n_var)
      throw SchemaError("graph edge endpoint out of range");
  return g;
}

}  // namespace gbdrl

#endif  // GBDRL_GRAPH_ENCODE_HPP_
