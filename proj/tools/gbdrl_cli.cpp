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

// gbdrl command-line front end.
//
// Exit codes: 0 success, 1 solve failure, 2 usage error, 3 schema mismatch.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gbdrl/gbdrl.hpp"

namespace fs = std::filesystem;
using namespace gbdrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolveFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSchema = 3;

struct UsageError : Error {
  using Error::Error;
};

struct SolveFailure : Error {
  using Error::Error;
};

std::string instance_name(int i) {
  std::ostringstream os;
  os << "instance_" << std::setw(5) << std::setfill('0') << i << ".json";
  return os.str();
}

fs::path manifest_path_for(const fs::path& file) { return fs::path(file.string() + ".manifest.json"); }

PolicyWeights load_weights(const fs::path& p) { return weights_from_json(read_json_file(p)); }

std::string actor_digest(const NetParams& actor) { return sha256_hex(network_to_json(actor).dump()); }

// gen-instances

struct GenInstancesArgs {
  int count = 0;
  std::uint64_t seed = 0;
  std::string out;
  double x9_demand = 0;
};

int cmd_gen_instances(const GenInstancesArgs& a) {
  if (a.count < 0) throw UsageError("--count must be >= 0");
  RunManifest m;
  m.command = "gen-instances";
  m.seed = a.seed;
  m.counts = {{"instances", a.count}};
  m.config = {{"x9_demand", a.x9_demand}};
  const std::string digest = m.digest();
  fs::create_directories(a.out);
  CaseStudyOptions opt;
  opt.x9_demand = a.x9_demand;
  std::mt19937_64 rng(a.seed);
  for (int i = 0; i < a.count; ++i) {
    const CaseStudyCoefficients c = sample_coefficients(rng);
    const fs::path p = fs::path(a.out) / instance_name(i);
    write_json_file(p, instance_to_json(c, opt, digest));
    m.files.push_back(p.filename().string());
  }
  write_manifest(a.out, m);
  std::cout << "wrote " << a.count << " instances to " << a.out << " (manifest " << digest << ")\n";
  return kExitOk;
}

// gen-expert

struct GenExpertArgs {
  int count = 100;
  std::uint64_t seed = 0;
  std::string out;
  double x9_demand = 0;
};

int cmd_gen_expert(const GenExpertArgs& a) {
  if (a.count < 1) throw UsageError("--count must be >= 1");
  RunManifest m;
  m.command = "gen-expert";
  m.seed = a.seed;
  m.counts = {{"instances", a.count}};
  m.config = {{"x9_demand", a.x9_demand}};
  ExpertOptions opt;
  opt.case_study.x9_demand = a.x9_demand;
  const ExpertDataset ds = generate_expert_dataset(a.count, a.seed, opt);
  nlohmann::json doc = dataset_to_json(ds);
  doc["manifest"] = m.digest();
  write_json_file(a.out, doc);
  m.files.push_back(a.out);
  nlohmann::json md = m.to_json();
  md["digest"] = m.digest();
  md["dataset_digest"] = doc["digest"];
  write_json_file(manifest_path_for(a.out), md);
  std::cout << "pairs " << ds.pairs.size() << " from " << a.count << " instances (" << ds.failures
            << " failed); dataset digest " << doc["digest"].get<std::string>() << "\n";
  return kExitOk;
}

// train il

struct TrainIlArgs {
  std::string dataset, out;
  int epochs = 50;
  int batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

int cmd_train_il(const TrainIlArgs& a) {
  const ExpertDataset ds = dataset_from_json(read_json_file(a.dataset));
  if (ds.pairs.empty()) throw UsageError("dataset has no pairs");
  std::mt19937_64 rng(a.seed);
  NetParams actor = make_network(Architecture::actor(ds.m), rng);
  BcConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.adam.lr = a.lr;
  cfg.seed = a.seed;
  const BcReport rep = train_bc(ds.pairs, actor, cfg);

  RunManifest m;
  m.command = "train il";
  m.seed = a.seed;
  m.counts = {{"pairs", ds.pairs.size()}, {"epochs", a.epochs}};
  m.config = {{"dataset", a.dataset}, {"batch", a.batch}, {"lr", a.lr}, {"dataset_digest", dataset_digest(ds)}};
  nlohmann::json w = weights_to_json({actor, std::nullopt});
  w["manifest"] = m.digest();
  write_json_file(a.out, w);
  std::ostringstream csv;
  csv << std::setprecision(10) << "epoch,train_loss,val_loss,val_bit_accuracy\n";
  csv << "0," << rep.initial_loss << ",,\n";
  for (std::size_t e = 0; e < rep.train_loss.size(); ++e)
    csv << e + 1 << ',' << rep.train_loss[e] << ',' << rep.val_loss[e] << ',' << rep.val_bit_accuracy[e] << '\n';
  const std::string loss_path = a.out + ".loss.csv";
  write_text_file(loss_path, csv.str());
  m.files = {a.out, loss_path};
  nlohmann::json md = m.to_json();
  md["digest"] = m.digest();
  md["actor_digest"] = actor_digest(actor);
  write_json_file(manifest_path_for(a.out), md);
  std::cout << "initial loss " << rep.initial_loss;
  if (!rep.train_loss.empty()) std::cout << ", final loss " << rep.train_loss.back();
  if (!rep.val_bit_accuracy.empty() && !rep.val_instances.empty())
    std::cout << ", validation bit accuracy " << rep.val_bit_accuracy.back();
  std::cout << "\n";
  return kExitOk;
}

// train rl

struct TrainRlArgs {
  std::string init, out;
  bool random_init = false;
  bool deterministic_time = false;
  int episodes = 1000;
  int checkpoint_every = 0;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  int m = 5;
  double x9_demand = 0;
};

int cmd_train_rl(const TrainRlArgs& a) {
  if (a.init.empty() == !a.random_init) throw UsageError("train rl needs exactly one of --init or --random-init");
  if (a.episodes < 0) throw UsageError("--episodes must be >= 0");
  std::mt19937_64 rng(a.seed);
  PpoLearner lr;
  if (a.random_init) {
    lr.actor = make_network(Architecture::actor(a.m), rng);
  } else {
    PolicyWeights w = load_weights(a.init);
    lr.actor = std::move(w.actor);
    if (w.critic) lr.critic = std::move(*w.critic);
  }
  if (lr.critic.size() == 0) lr.critic = make_network(Architecture::critic(lr.actor.arch().m), rng);
  if (lr.critic.arch().m != lr.actor.arch().m) throw SchemaError("critic and actor disagree on m");
  CaseStudyOptions copt;
  copt.x9_demand = a.x9_demand;
  if (lr.actor.arch().m != 5) throw SchemaError("weights have m = " + std::to_string(lr.actor.arch().m) +
                                                ", the case-study sampler has m = 5");
  RlConfig cfg;
  cfg.env.deterministic_time = a.deterministic_time;
  cfg.ppo.actor_adam.lr = a.lr;
  cfg.ppo.critic_adam.lr = a.lr;

  RunManifest m;
  m.command = "train rl";
  m.seed = a.seed;
  m.counts = {{"episodes", a.episodes}};
  m.config = {{"init", a.random_init ? std::string("random") : a.init},
              {"deterministic_time", a.deterministic_time},
              {"lr", a.lr},
              {"x9_demand", a.x9_demand}};
  const std::string digest = m.digest();
  const std::string log_path = a.out + ".log.csv";
  std::ostringstream log;
  log << std::setprecision(10)
      << "episode,reward,r_feas,r_gap,r_time,iterations,accepted,converged,aborted,surrogate,value_loss,approx_kl,"
         "rolled_back\n";
  auto save = [&](const fs::path& p) {
    nlohmann::json w = weights_to_json({lr.actor, lr.critic});
    w["manifest"] = digest;
    write_json_file(p, w);
    m.files.push_back(p.string());
  };
  auto on_episode = [&](const EpisodeLog& e, const PpoLearner&) {
    log << e.episode << ',' << e.reward << ',' << e.r_feas << ',' << e.r_gap << ',' << e.r_time << ','
        << e.iterations << ',' << e.accepted << ',' << e.converged << ',' << e.aborted << ',' << e.ppo.surrogate
        << ',' << e.ppo.value_loss << ',' << e.ppo.approx_kl << ',' << e.ppo.rolled_back << '\n';
    if (a.checkpoint_every > 0 && (e.episode + 1) % a.checkpoint_every == 0)
      save(a.out + ".ckpt" + std::to_string(e.episode + 1) + ".json");
  };
  const auto logs = train_rl(case_study_sampler(copt), lr, a.episodes, cfg, a.seed, on_episode);
  save(a.out);
  write_text_file(log_path, log.str());
  m.files.push_back(log_path);
  nlohmann::json md = m.to_json();
  md["digest"] = digest;
  md["actor_digest"] = actor_digest(lr.actor);
  write_json_file(manifest_path_for(a.out), md);
  double total = 0;
  for (const auto& e : logs) total += e.reward;
  std::cout << "episodes " << logs.size() << ", mean reward " << (logs.empty() ? 0.0 : total / logs.size())
            << ", actor digest " << actor_digest(lr.actor) << "\n";
  return kExitOk;
}

// solve

struct SolveArgs {
  std::string mode, instance, weights, out;
  double eps = 1e-4;
  int max_iterations = 100;
  double max_seconds = 300;
  double delta1 = 0.1, delta2 = 0.9;
};

int cmd_solve(const SolveArgs& a) {
  if (a.mode == "hybrid" && a.weights.empty()) throw UsageError("solve hybrid requires --weights");
  const nlohmann::json idoc = read_json_file(a.instance);
  const ProblemInstance inst = instance_from_json(idoc);
  GbdLimits lim;
  lim.eps = a.eps;
  lim.max_iterations = a.max_iterations;
  lim.max_seconds = a.max_seconds;
  ConfidenceConfig cc{a.delta1, a.delta2};
  try {
    cc.check();
    validate(a.eps > 0, "--eps must be > 0");
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  RunManifest m;
  m.command = "solve " + a.mode;
  m.config = {{"instance", a.instance}, {"eps", a.eps}, {"max_iterations", a.max_iterations},
              {"delta1", a.delta1},     {"delta2", a.delta2}, {"weights", a.weights}};
  const BinaryVector y0 = default_initial_assignment(inst);
  GbdResult r;
  if (a.mode == "classical") {
    r = solve_classical(inst, y0, lim);
  } else {
    const PolicyWeights w = load_weights(a.weights);
    if (w.actor.arch().m != inst.m())
      throw SchemaError("weights expect m = " + std::to_string(w.actor.arch().m) + ", instance has m = " +
                        std::to_string(inst.m()));
    r = solve_hybrid(inst, y0, w.actor, cc, lim);
  }
  const std::string digest = m.digest();
  fs::create_directories(a.out);
  std::ostringstream trace;
  write_trace(trace, r.trace, digest);
  write_text_file(fs::path(a.out) / "trace.jsonl", trace.str());
  nlohmann::json res;
  res["schema_version"] = 1;
  res["kind"] = "gbd_result";
  res["manifest"] = digest;
  res["status"] = to_string(r.status);
  res["converged"] = r.trace.converged;
  res["objective"] = std::isfinite(r.objective) ? nlohmann::json(r.objective) : nlohmann::json("+inf");
  res["y"] = to_string(r.y);
  res["x"] = to_std(r.x);
  res["iterations"] = r.trace.iterations;
  res["exact_master_solves"] = r.trace.exact_master_solves();
  res["total_time"] = r.trace.total_time;
  nlohmann::json stable = {{"status", res["status"]}, {"objective", res["objective"]}, {"y", res["y"]},
                           {"iterations", res["iterations"]}};
  res["result_digest"] = sha256_hex(stable.dump());
  write_json_file(fs::path(a.out) / "result.json", res);
  m.files = {"trace.jsonl", "result.json"};
  write_manifest(a.out, m);
  std::cout << to_string(r.status) << " objective " << std::setprecision(10) << r.objective << " y "
            << to_string(r.y) << " iterations " << r.trace.iterations << "\n";
  return r.status == GbdStatus::kConverged ? kExitOk : kExitSolveFailure;
}

// evaluate

struct EvaluateArgs {
  int count = 50;
  std::uint64_t seed = 1;
  std::vector<std::string> weights;  // name=path
  std::string out;
  int jobs = 1;
  double x9_demand = 0;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.count < 1) throw UsageError("--count must be >= 1");
  if (a.jobs < 1) throw UsageError("--jobs must be >= 1");
  std::vector<std::pair<std::string, NetParams>> methods;
  for (const auto& s : a.weights) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw UsageError("--weights expects NAME=PATH, got '" + s + "'");
    const std::string name = s.substr(0, eq);
    if (name == "classical") throw UsageError("method name 'classical' is reserved");
    methods.emplace_back(name, load_weights(s.substr(eq + 1)).actor);
    if (methods.back().second.arch().m != 5) throw SchemaError("weights '" + name + "' do not have m = 5");
  }
  RunManifest m;
  m.command = "evaluate";
  m.seed = a.seed;
  m.counts = {{"instances", a.count}};
  m.config = {{"weights", a.weights}, {"x9_demand", a.x9_demand}};
  const std::string digest = m.digest();

  CaseStudyOptions opt;
  opt.x9_demand = a.x9_demand;
  std::vector<ProblemInstance> insts;
  std::mt19937_64 rng(a.seed);
  for (int i = 0; i < a.count; ++i) insts.push_back(build_case_study1(sample_coefficients(rng), opt));

  std::vector<std::string> names{"classical"};
  for (const auto& [n, _] : methods) names.push_back(n);
  for (const auto& n : names) fs::create_directories(fs::path(a.out) / n);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (int i = next++; i < a.count && !failed; i = next++) {
      try {
        const BinaryVector y0 = default_initial_assignment(insts[static_cast<std::size_t>(i)]);
        for (std::size_t k = 0; k < names.size(); ++k) {
          const GbdResult r =
              k == 0 ? solve_classical(insts[static_cast<std::size_t>(i)], y0)
                     : solve_hybrid(insts[static_cast<std::size_t>(i)], y0, methods[k - 1].second);
          std::ostringstream tr;
          write_trace(tr, r.trace, digest);
          std::ostringstream fn;
          fn << "trace_" << std::setw(5) << std::setfill('0') << i << ".jsonl";
          write_text_file(fs::path(a.out) / names[k] / fn.str(), tr.str());
        }
      } catch (const std::exception& e) {
        std::lock_guard lk(err_mu);
        if (!failed) first_error = e.what();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int j = 0; j < a.jobs; ++j) pool.emplace_back(worker);
  }
  if (failed) throw SolveFailure("evaluation failed: " + first_error);

  // The report is computed from the trace files alone.
  std::map<std::string, std::vector<GbdTrace>> traces;
  for (const auto& n : names)
    for (int i = 0; i < a.count; ++i) {
      std::ostringstream fn;
      fn << "trace_" << std::setw(5) << std::setfill('0') << i << ".jsonl";
      std::ifstream in(fs::path(a.out) / n / fn.str());
      traces[n].push_back(read_trace(in));
      m.files.push_back(n + "/" + fn.str());
    }
  std::vector<MethodSummary> rows;
  std::vector<std::pair<std::string, GapCurve>> curves;
  for (const auto& n : names) {
    rows.push_back(summarize(n, traces[n], traces["classical"]));
    curves.emplace_back(n, median_gap_curve(traces[n]));
  }
  write_text_file(fs::path(a.out) / "summary.csv", summary_csv(rows));
  write_text_file(fs::path(a.out) / "curves.csv", curves_csv(curves));
  m.files.push_back("summary.csv");
  m.files.push_back("curves.csv");
  write_manifest(a.out, m);
  std::cout << std::left << std::setw(14) << "method" << std::setw(11) << "converged" << std::setw(9) << "matched"
            << std::setw(13) << "exact/iters" << std::setw(12) << "full_acc" << "violations\n";
  for (const auto& s : rows)
    std::cout << std::left << std::setw(14) << s.method << std::setw(11)
              << (std::to_string(s.converged) + "/" + std::to_string(s.instances)) << std::setw(9) << s.matched
              << std::setw(13) << std::setprecision(4) << s.exact_solve_ratio << std::setw(12) << s.full_acceptance
              << s.trace_violations << "\n";
  return kExitOk;
}

// replay-trace

struct ReplayArgs {
  std::string trace;
  bool strict = false;
};

int cmd_replay(const ReplayArgs& a) {
  std::ifstream in(a.trace);
  if (!in) throw UsageError("cannot open " + a.trace);
  const GbdTrace t = read_trace(in);
  std::cout << "method " << t.method << ", eps " << t.eps << "\n";
  std::cout << std::left << std::setw(6) << "iter" << std::setw(10) << "y" << std::setw(13) << "cut"
            << std::setw(16) << "UBD" << std::setw(16) << "LBD" << "mode\n";
  for (const auto& r : t.rows)
    std::cout << std::left << std::setw(6) << r.iter << std::setw(10) << to_string(r.y) << std::setw(13)
              << to_string(r.cut) << std::setw(16) << r.ubd.to_string() << std::setw(16) << r.lbd.to_string()
              << to_string(r.mode) << "\n";
  std::cout << to_string(t.status) << " objective " << std::setprecision(10) << t.objective << " y "
            << to_string(t.y_best) << " iterations " << t.iterations << "\n";
  const auto v = trace_violations(t);
  for (const auto& s : v) std::cout << "violation: " << s << "\n";
  return a.strict && !v.empty() ? kExitSolveFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gbdrl: generalized Benders decomposition with a learned master-problem agent"};
  app.require_subcommand(1);

  GenInstancesArgs gi;
  auto* c_gi = app.add_subcommand("gen-instances", "Sample Case Study 1 instances");
  c_gi->add_option("--count", gi.count, "Number of instances")->required();
  c_gi->add_option("--seed", gi.seed, "Random seed");
  c_gi->add_option("--out", gi.out, "Output directory")->required();
  c_gi->add_option("--x9-demand", gi.x9_demand, "Lower bound on x9 (positive values force feasibility cuts)");

  GenExpertArgs ge;
  auto* c_ge = app.add_subcommand("gen-expert", "Record classical GBD runs as imitation pairs");
  c_ge->add_option("--count", ge.count, "Number of instances to solve");
  c_ge->add_option("--seed", ge.seed, "Random seed");
  c_ge->add_option("--out", ge.out, "Dataset file")->required();
  c_ge->add_option("--x9-demand", ge.x9_demand, "Lower bound on x9");

  auto* c_train = app.add_subcommand("train", "Train the agent");
  c_train->require_subcommand(1);
  TrainIlArgs til;
  auto* c_il = c_train->add_subcommand("il", "Behavioral cloning from an expert dataset");
  c_il->add_option("--dataset", til.dataset, "Expert dataset")->required();
  c_il->add_option("--out", til.out, "Weights file")->required();
  c_il->add_option("--epochs", til.epochs, "Epochs");
  c_il->add_option("--batch", til.batch, "Mini-batch size");
  c_il->add_option("--lr", til.lr, "Adam step size");
  c_il->add_option("--seed", til.seed, "Random seed");
  TrainRlArgs trl;
  auto* c_rl = c_train->add_subcommand("rl", "PPO fine-tuning on sampled instances");
  c_rl->add_option("--init", trl.init, "Initial weights (actor, optional critic)");
  c_rl->add_flag("--random-init", trl.random_init, "Start from a randomly initialized actor");
  c_rl->add_option("--out", trl.out, "Weights file")->required();
  c_rl->add_option("--episodes", trl.episodes, "Number of episodes");
  c_rl->add_option("--checkpoint-every", trl.checkpoint_every, "Write weights every N episodes (0: never)");
  c_rl->add_flag("--deterministic-time", trl.deterministic_time,
                 "Charge subproblem time by Newton iterations instead of wall clock");
  c_rl->add_option("--lr", trl.lr, "Adam step size for actor and critic");
  c_rl->add_option("--seed", trl.seed, "Random seed");
  c_rl->add_option("--x9-demand", trl.x9_demand, "Lower bound on x9");

  SolveArgs sv;
  auto* c_solve = app.add_subcommand("solve", "Solve one instance");
  c_solve->add_option("mode", sv.mode, "classical or hybrid")->required()->check(CLI::IsMember({"classical", "hybrid"}));
  c_solve->add_option("--instance", sv.instance, "Instance file")->required();
  c_solve->add_option("--weights", sv.weights, "Weights file (hybrid)");
  c_solve->add_option("--out", sv.out, "Output directory")->required();
  c_solve->add_option("--eps", sv.eps, "Convergence tolerance on UBD - LBD");
  c_solve->add_option("--max-iterations", sv.max_iterations, "Iteration cap");
  c_solve->add_option("--max-seconds", sv.max_seconds, "Wall-clock cap");
  c_solve->add_option("--delta1", sv.delta1, "Probabilities <= delta1 fix a variable to 0");
  c_solve->add_option("--delta2", sv.delta2, "Probabilities >= delta2 fix a variable to 1");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Compare classical and hybrid GBD on fresh instances");
  c_eval->add_option("--count", ev.count, "Number of test instances");
  c_eval->add_option("--seed", ev.seed, "Random seed for the test instances");
  c_eval->add_option("--weights", ev.weights, "Hybrid method as NAME=PATH (repeatable)");
  c_eval->add_option("--out", ev.out, "Output directory")->required();
  c_eval->add_option("--jobs", ev.jobs, "Parallel instance workers");
  c_eval->add_option("--x9-demand", ev.x9_demand, "Lower bound on x9");

  ReplayArgs rp;
  auto* c_replay = app.add_subcommand("replay-trace", "Print a trace and check its bound bookkeeping");
  c_replay->add_option("trace", rp.trace, "Trace file")->required();
  c_replay->add_flag("--strict", rp.strict, "Exit 1 when the trace has violations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_gi) return cmd_gen_instances(gi);
    if (*c_ge) return cmd_gen_expert(ge);
    if (*c_il) return cmd_train_il(til);
    if (*c_rl) return cmd_train_rl(trl);
    if (*c_solve) return cmd_solve(sv);
    if (*c_eval) return cmd_evaluate(ev);
    if (*c_replay) return cmd_replay(rp);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return kExitSchema;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolveFailure;
  }
  return kExitUsage;
}
