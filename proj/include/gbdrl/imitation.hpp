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

// Behavioral cloning of the exact master solver.
//
// Each classical run contributes one pair per iteration: the normalized
// master graph after that iteration's cut, labelled with the assignment
// the exact master chose next.

#ifndef GBDRL_IMITATION_HPP_
#define GBDRL_IMITATION_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbdrl/core.hpp"
#include "gbdrl/digest.hpp"
#include "gbdrl/gbd_engine.hpp"
#include "gbdrl/graph_encode.hpp"
#include "gbdrl/neuralnet.hpp"
#include "gbdrl/problem.hpp"

namespace gbdrl {

inline constexpr int kDatasetSchema = 1;

struct ExpertPair {
  BipartiteGraph graph;
  BinaryVector label;
  int instance_id = 0;
  int iteration = 0;
};

struct ExpertDataset {
  int m = 5;
  std::uint64_t seed = 0;
  int instances = 0;
  int failures = 0;
  std::vector<ExpertPair> pairs;
};

struct ExpertOptions {
  GbdLimits limits;
  CaseStudyOptions case_study;
};

/// Pairs from one classical run.
inline std::vector<ExpertPair> expert_pairs_for(const ProblemInstance& inst, int instance_id,
                                                const GbdLimits& limits = {}) {
  std::vector<ExpertPair> out;
  auto observer = [&](const MasterState& state, const TraceRow& row) {
    if (row.mode == AssignmentMode::kMasterInfeasible) return;
    const MasterResult mr = solve_exact(state, limits.master_method);
    out.push_back({encode_normalized(state), mr.y, instance_id, row.iter});
  };
  const GbdResult r = solve_classical(inst, default_initial_assignment(inst), limits, observer);
  if (r.status == GbdStatus::kSolverFailure) throw NumericalError("classical run failed while recording pairs");
  return out;
}

/// Instance i uses the i-th coefficient draw from a generator seeded with `seed`.
inline ExpertDataset generate_expert_dataset(int n_instances, std::uint64_t seed, const ExpertOptions& opt = {}) {
  validate(n_instances >= 1, "expert dataset needs at least one instance");
  ExpertDataset ds;
  ds.seed = seed;
  ds.instances = n_instances;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_instances; ++i) {
    const CaseStudyCoefficients c = sample_coefficients(rng);
    try {
      const ProblemInstance inst = build_case_study1(c, opt.case_study);
      ds.m = inst.m();
      for (auto& p : expert_pairs_for(inst, i, opt.limits)) ds.pairs.push_back(std::move(p));
    } catch (const NumericalError&) {
      ++ds.failures;
    }
  }
  return ds;
}

inline nlohmann::json pair_to_json(const ExpertPair& p) {
  return {{"instance_id", p.instance_id},
          {"iteration", p.iteration},
          {"label", to_string(p.label)},
          {"graph", graph_to_json(p.graph)}};
}

inline ExpertPair pair_from_json(const nlohmann::json& j) {
  ExpertPair p;
  try {
    p.instance_id = j.at("instance_id").get<int>();
    p.iteration = j.at("iteration").get<int>();
    p.label = binary_from_string(j.at("label").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed expert pair: ") + e.what());
  }
  p.graph = graph_from_json(j.at("graph"));
  if (static_cast<int>(p.label.size()) != p.graph.n_var) throw SchemaError("label length differs from n_var");
  return p;
}

inline std::string dataset_digest(const ExpertDataset& ds) {
  std::vector<std::string> recs;
  recs.reserve(ds.pairs.size());
  for (const auto& p : ds.pairs) recs.push_back(pair_to_json(p).dump());
  return unordered_digest(recs);
}

inline nlohmann::json dataset_to_json(const ExpertDataset& ds) {
  nlohmann::json doc;
  doc["schema_version"] = kDatasetSchema;
  doc["kind"] = "expert_dataset";
  doc["edge_convention"] = kEdgeConvention;
  doc["m"] = ds.m;
  doc["seed"] = ds.seed;
  doc["instances"] = ds.instances;
  doc["failures"] = ds.failures;
  doc["digest"] = dataset_digest(ds);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : ds.pairs) pairs.push_back(pair_to_json(p));
  doc["pairs"] = std::move(pairs);
  return doc;
}

inline ExpertDataset dataset_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("kind", "") != "expert_dataset") throw SchemaError("not an expert dataset");
  if (doc.value("schema_version", -1) != kDatasetSchema) throw SchemaError("unsupported dataset schema_version");
  if (doc.value("edge_convention", "") != kEdgeConvention) throw SchemaError("dataset uses another edge convention");
  ExpertDataset ds;
  try {
    ds.m = doc.at("m").get<int>();
    ds.seed = doc.at("seed").get<std::uint64_t>();
    ds.instances = doc.at("instances").get<int>();
    ds.failures = doc.at("failures").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed dataset header: ") + e.what());
  }
  for (const auto& j : doc.at("pairs")) {
    ds.pairs.push_back(pair_from_json(j));
    if (ds.pairs.back().graph.n_var != ds.m) throw SchemaError("pair n_var differs from dataset m");
  }
  return ds;
}

struct BcConfig {
  int epochs = 50;
  int batch_size = 32;
  double val_fraction = 0.1;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct BcReport {
  /// Mean training loss before the first update.
  double initial_loss = 0;
  /// Mean loss over each epoch's mini-batches, measured before each update.
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_bit_accuracy;
  std::vector<int> train_instances, val_instances;
};

/// Instance-level split: whole instances go to validation.
inline void split_by_instance(const std::vector<ExpertPair>& data, double val_fraction, std::mt19937_64& rng,
                              std::vector<int>& train_ids, std::vector<int>& val_ids) {
  std::set<int> ids;
  for (const auto& p : data) ids.insert(p.instance_id);
  std::vector<int> v(ids.begin(), ids.end());
  std::shuffle(v.begin(), v.end(), rng);
  const auto n_val = v.size() >= 2 ? static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(v.size())))
                                   : std::size_t{0};
  val_ids.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_val));
  train_ids.assign(v.begin() + static_cast<std::ptrdiff_t>(n_val), v.end());
  std::sort(val_ids.begin(), val_ids.end());
  std::sort(train_ids.begin(), train_ids.end());
}

inline double mean_bce(const NetParams& actor, const std::vector<const ExpertPair*>& set) {
  if (set.empty()) return 0;
  double s = 0;
  for (const auto* p : set) s += bce_loss(p->label, actor_forward(actor, p->graph));
  return s / static_cast<double>(set.size());
}

inline double bit_accuracy(const NetParams& actor, const std::vector<const ExpertPair*>& set) {
  if (set.empty()) return 0;
  std::size_t hit = 0, total = 0;
  for (const auto* p : set) {
    const Vector pr = actor_forward(actor, p->graph);
    for (Eigen::Index i = 0; i < pr.size(); ++i) {
      hit += (pr[i] >= 0.5 ? 1 : 0) == p->label[static_cast<std::size_t>(i)];
      ++total;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

inline BcReport train_bc(const std::vector<ExpertPair>& data, NetParams& actor, const BcConfig& cfg = {}) {
  validate(!data.empty(), "behavioral cloning needs a nonempty dataset");
  validate(cfg.epochs >= 0 && cfg.batch_size >= 1, "epochs must be >= 0 and batch size >= 1");
  require(actor.arch().head == HeadKind::kActor, "behavioral cloning trains an actor");
  for (const auto& p : data)
    require(p.graph.n_var == actor.arch().m, "dataset m differs from the actor's m");
  std::mt19937_64 rng(cfg.seed);
  BcReport rep;
  split_by_instance(data, cfg.val_fraction, rng, rep.train_instances, rep.val_instances);
  const std::set<int> val(rep.val_instances.begin(), rep.val_instances.end());
  std::vector<const ExpertPair*> train_set, val_set;
  for (const auto& p : data) (val.count(p.instance_id) ? val_set : train_set).push_back(&p);

  AdamState adam;
  rep.initial_loss = mean_bce(actor, train_set);
  double prev = rep.initial_loss;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (int ep = 0; ep < cfg.epochs; ++ep) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Vector grad = Vector::Zero(actor.size());
      for (std::size_t k = start; k < end; ++k) {
        const ExpertPair& p = *train_set[order[k]];
        GradientTape tape;
        const Vector prob = actor_forward(actor, p.graph, &tape);
        sum += bce_loss(p.label, prob);
        grad += backward(actor, tape, bce_logit_gradient(p.label, prob));
      }
      grad /= static_cast<double>(end - start);
      adam_step(actor.theta(), grad, adam, cfg.adam);
    }
    const double epoch_loss = sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss) || epoch_loss > 10 * prev)
      throw NumericalError("behavioral cloning diverged at epoch " + std::to_string(ep));
    prev = epoch_loss;
    rep.train_loss.push_back(epoch_loss);
    rep.val_loss.push_back(mean_bce(actor, val_set));
    rep.val_bit_accuracy.push_back(bit_accuracy(actor, val_set));
  }
  return rep;
}

}  // namespace gbdrl

#endif  // GBDRL_IMITATION_HPP_
