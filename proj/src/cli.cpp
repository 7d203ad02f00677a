// Copyright 2026 The snakeopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "snakeopt/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "snakeopt/benchlab.hpp"
#include "snakeopt/estimator.hpp"
#include "snakeopt/genmodel.hpp"
#include "snakeopt/io.hpp"
#include "snakeopt/snake.hpp"
#include "snakeopt/topology.hpp"

namespace snakeopt {

namespace {

namespace fs = std::filesystem;
using io::Json;

std::string basename_of(const std::string& path) {
  const fs::path p(path);
  std::string name = p.filename().string();
  if (name.empty()) name = p.parent_path().filename().string();
  return name;
}

std::string timestamp_utc() {
  std::time_t t = 0;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      t = static_cast<std::time_t>(std::stoll(sde));
    } catch (const std::exception&) {
      throw std::invalid_argument("SOURCE_DATE_EPOCH is not an integer");
    }
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Run manifest. File paths are recorded by basename so that bundles
/// written to different directories stay byte-identical.
struct Manifest {
  std::string command;
  Json args = Json::object();
  Json seeds = Json::object();
  Json inputs = Json::array();
  Json outputs = Json::array();

  void input(const std::string& path, const std::string& content) {
    inputs.push_back({{"file", basename_of(path)}, {"fnv1a64", io::hex64(io::fnv1a64(content))}});
  }
  void output(const std::string& path) { outputs.push_back(basename_of(path)); }

  Json to_json() const {
    return {{"tool", "snakeopt"},   {"version", kToolVersion}, {"command", command},
            {"args", args},         {"seeds", seeds},          {"inputs", inputs},
            {"outputs", outputs},   {"timestamp", timestamp_utc()}};
  }
};

struct Common {
  int jobs = 0;
  bool timing = false;
};

struct Loaded {
  std::shared_ptr<const CharacterizationData> data;
  WeightTable weights;
};

Json load_input(const std::string& path, Manifest& m) {
  const std::string text = io::read_file(path);
  m.input(path, text);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& ex) {
    throw InputError(path + ": " + ex.what());
  }
}

Loaded load_estimator_inputs(const std::string& char_path, const std::string& weights_path,
                             Manifest& m) {
  Loaded l;
  l.data = std::make_shared<const CharacterizationData>(
      io::characterization_from_json(load_input(char_path, m)));
  l.weights = weights_path.empty() ? WeightTable::defaults()
                                   : io::weights_from_json(load_input(weights_path, m));
  return l;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, Manifest& m) {
  std::uint64_t seed = 0;
  if (const char* env = std::getenv("SNAKEOPT_SEED")) {
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("SNAKEOPT_SEED is not an unsigned integer");
    }
  } else if (flag) {
    seed = *flag;
  } else {
    throw std::invalid_argument("--seed is required for this command");
  }
  m.seeds["seed"] = seed;
  return seed;
}

int parse_scope(const std::string& s) {
  if (s == "max") return kGlobalScope;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("scope must be a positive integer or 'max': " + s);
}

int parse_seed_count(const std::string& s) {
  if (s == "all") return 0;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("seeds must be a positive integer or 'all': " + s);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Snake options shared by optimize, heal and stitch.
struct SnakeFlags {
  std::string scope = "2";
  std::string seeds = "1";
  std::string rule = "ARB";
  std::string heuristic = "BFS";
  std::int64_t budget = InnerSolver{}.budget;
  std::int64_t global_budget = 0;

  void add(CLI::App* app) {
    app->add_option("--scope", scope, "Scope S: positive integer or 'max' (variables within "
                                      "incidence distance < S per step)")
        ->capture_default_str();
    app->add_option("--seeds", seeds, "Number of traversal starting variables, or 'all'")
        ->capture_default_str();
    app->add_option("--rule", rule, "Traversal rule: NN, NNN or ARB")->capture_default_str();
    app->add_option("--heuristic", heuristic, "Traversal heuristic: BFS, DFS or RND")
        ->capture_default_str();
    app->add_option("--budget", budget, "Objective evaluations per stochastic inner solve (count)")
        ->capture_default_str();
    app->add_option("--global-budget", global_budget,
                    "Objective evaluations for a global-scope solve (count, 0 = --budget)")
        ->capture_default_str();
  }

  SnakeParams params(std::uint64_t seed) const {
    SnakeParams p;
    p.scope = parse_scope(scope);
    p.seeds = parse_seed_count(seeds);
    p.rule = parse_rule(rule);
    p.heuristic = parse_heuristic(heuristic);
    p.solver.budget = budget;
    p.global_budget = global_budget;
    p.seed = seed;
    p.validate();
    return p;
  }
};

Json prediction_json(const BenchmarkPrediction& pred, const ProcessorGraph& p,
                     const GateVariableGraph& g) {
  Json sq = Json::object(), cyc = Json::object(), cz = Json::object();
  for (std::size_t q = 0; q < p.num_qubits(); ++q) {
    sq[g.name(g.idle_var(static_cast<int>(q)))] = pred.e_sq[q];
  }
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const std::string& name = g.name(g.interaction_var(static_cast<int>(c)));
    cyc[name] = pred.e_cycle[c];
    cz[name] = pred.e_cz[c];
  }
  return {{"e_sq", sq}, {"e_cycle", cyc}, {"e_cz", cz}};
}

void write_json_output(const std::string& path, Json body, Manifest& m) {
  m.output(path);
  body["manifest"] = m.to_json();
  io::write_file_atomic(path, io::dump(body));
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

int cmd_topo(int distance, bool sycamore, const std::string& out_path, std::ostream& out) {
  Manifest m;
  m.command = "topo";
  if ((distance > 0) == sycamore) {
    throw std::invalid_argument("give exactly one of --distance or --sycamore68");
  }
  const ProcessorGraph p = sycamore ? sycamore_like_68() : build_surface_code_lattice(distance);
  if (sycamore) {
    m.args["sycamore68"] = true;
  } else {
    m.args["distance"] = distance;
  }
  write_json_output(out_path, io::to_json(p), m);
  out << "processor: " << p.num_qubits() << " qubits, " << p.num_couplers() << " couplers\n";
  return kExitOk;
}

int cmd_gen(const std::string& proc_path, const std::string& spec_path,
            std::optional<std::uint64_t> seed_flag, const std::string& out_path, std::ostream& out) {
  Manifest m;
  m.command = "gen";
  const ProcessorGraph p = io::processor_from_json(load_input(proc_path, m));
  GenerativeSpec spec = spec_path.empty() ? GenerativeSpec{}
                                          : io::priors_from_json(load_input(spec_path, m));
  spec.seed = resolve_seed(seed_flag, m);
  const CharacterizationData d = generate_processor(spec, p);
  write_json_output(out_path, io::to_json(d), m);
  out << "characterization: " << d.qubits.size() << " qubits, " << d.stray.size()
      << " stray pairs, grid " << d.grid.size << " points\n";
  return kExitOk;
}

int cmd_synth(const std::string& char_path, const std::string& weights_path, int configs,
              double noise, std::optional<std::uint64_t> seed_flag, const std::string& out_path,
              std::ostream& out) {
  Manifest m;
  m.command = "synth";
  m.args = {{"configs", configs}, {"noise", noise}};
  if (configs < 1) throw std::invalid_argument("--configs must be >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("--noise must be >= 0");
  const Loaded l = load_estimator_inputs(char_path, weights_path, m);
  const std::uint64_t seed = resolve_seed(seed_flag, m);
  const Estimator truth = build_estimator(l.data, kAllMechanisms, l.weights);
  const auto bounds = hard_bounds(*l.data, truth.graph());
  std::mt19937_64 rng(seed);
  std::vector<BenchmarkSample> samples;
  for (int i = 0; i < configs; ++i) {
    const auto f = random_baseline(bounds, mix_seed(seed, static_cast<std::uint64_t>(i)));
    samples.push_back(synthesize_benchmarks(truth, f, SampleTag::isolated, noise, rng));
    samples.push_back(synthesize_benchmarks(truth, f, SampleTag::parallel, noise, rng));
  }
  m.output(out_path);
  const std::string text = Json{{"manifest", m.to_json()}}.dump() + "\n" +
                           io::dataset_to_jsonl(samples, truth.graph(), l.data->processor);
  io::write_file_atomic(out_path, text);
  out << "dataset: " << samples.size() << " benchmark samples\n";
  return kExitOk;
}

int cmd_train(const std::string& char_path, const std::string& data_path, int iterations,
              double train_fraction, std::optional<std::uint64_t> seed_flag,
              const std::string& out_path, std::ostream& out) {
  Manifest m;
  m.command = "train";
  m.args = {{"iterations", iterations}, {"train_fraction", train_fraction}};
  const Loaded l = load_estimator_inputs(char_path, "", m);
  const std::string text = io::read_file(data_path);
  m.input(data_path, text);
  const std::uint64_t seed = resolve_seed(seed_flag, m);
  const Estimator e = build_estimator(l.data, kAllMechanisms, WeightTable::zeros());
  const auto samples = io::dataset_from_jsonl(text, e.graph(), l.data->processor);
  if (samples.empty()) throw InputError(data_path + ": no benchmark samples");
  TrainOptions opt;
  opt.iterations = iterations;
  opt.train_fraction = train_fraction;
  opt.seed = seed;
  const TrainResult r = train_weights(e, samples, opt);
  write_json_output(out_path, io::to_json(r.weights), m);
  out << "trained " << kNumGroups << " weight groups on " << r.train_rows << " rows\n";
  if (!r.test_measured.empty()) {
    const AccuracyReport acc = accuracy_report(r.test_predicted, r.test_measured);
    out << "test median relative inaccuracy: " << fmt(acc.median_relative) << "\n";
  }
  return kExitOk;
}

int cmd_optimize(const Common& c, const std::string& char_path, const std::string& weights_path,
                 const std::string& flags_str, bool arbitrary, const SnakeFlags& sf,
                 std::optional<std::uint64_t> seed_flag, const std::string& out_path,
                 std::ostream& out) {
  Manifest m;
  m.command = "optimize";
  const Loaded l = load_estimator_inputs(char_path, weights_path, m);
  const std::uint64_t seed = resolve_seed(seed_flag, m);
  const unsigned flags = parse_mechanisms(split_list(flags_str));
  const SnakeParams params = sf.params(seed);
  m.args = {{"snake", io::to_json(params)},
            {"mechanisms", mechanism_names(flags)},
            {"arbitrary_algorithm", arbitrary}};
  const Estimator e = build_estimator(l.data, flags, l.weights, arbitrary);
  const auto bounds = hard_bounds(*l.data, e.graph());
  const SnakeResult r = optimize(e, bounds, params, c.jobs != 1);
  Json prov = {{"params", io::to_json(params)},
               {"seed", seed},
               {"mechanisms", mechanism_names(flags)},
               {"estimator_hash", io::estimator_hash(e)},
               {"energy", r.energy},
               {"start", e.graph().name(r.start)},
               {"steps", r.trace.size()},
               {"untrained_weights", !l.weights.trained}};
  if (c.timing) prov["seconds"] = r.seconds;
  write_json_output(out_path, io::config_to_json(e.graph(), r.values, prov), m);
  out << "optimized " << e.num_vars() << " variables in " << r.trace.size()
      << " steps, E = " << fmt(r.energy, 6) << "\n";
  if (!l.weights.trained) out << "warning: estimator uses untrained default weights\n";
  return kExitOk;
}

int cmd_heal(const Common& c, const std::string& char_path, const std::string& weights_path,
             const std::string& config_path, const std::string& targets_str, double cycle_threshold,
             double sq_threshold, const SnakeFlags& sf, std::optional<std::uint64_t> seed_flag,
             const std::string& out_path, std::ostream& out) {
  Manifest m;
  m.command = "heal";
  const Loaded l = load_estimator_inputs(char_path, weights_path, m);
  const Json cfg_json = load_input(config_path, m);
  const std::uint64_t seed = resolve_seed(seed_flag, m);
  const SnakeParams params = sf.params(seed);
  const Estimator e = build_estimator(l.data, kAllMechanisms, l.weights);
  const auto bounds = hard_bounds(*l.data, e.graph());
  const std::vector<double> config = io::config_from_json(cfg_json, e.graph());
  e.check_complete(config);
  m.args = {{"snake", io::to_json(params)},
            {"targets", targets_str},
            {"cycle_threshold", cycle_threshold},
            {"sq_threshold", sq_threshold}};

  std::vector<VarId> targets;
  if (targets_str == "auto") {
    HealThresholds th;
    th.cycle = cycle_threshold;
    th.sq = sq_threshold;
    targets = select_heal_targets(predict_benchmarks(e, config), e.graph(), l.data->processor, th);
  } else {
    for (const auto& name : split_list(targets_str)) targets.push_back(e.graph().find(name));
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  }
  const double before = e.evaluate(config);
  std::vector<double> healed = config;
  double after = before;
  Json names = Json::array();
  for (VarId v : targets) names.push_back(e.graph().name(v));
  double seconds = 0.0;
  if (!targets.empty()) {
    const SnakeResult r = heal(e, bounds, config, targets, params);
    healed = r.values;
    after = e.evaluate(healed);
    seconds = r.seconds;
  }
  Json prov = {{"params", io::to_json(params)},
               {"seed", seed},
               {"estimator_hash", io::estimator_hash(e)},
               {"targets", names},
               {"energy_before", before},
               {"energy", after},
               {"untrained_weights", !l.weights.trained}};
  if (cfg_json.contains("provenance")) prov["source"] = cfg_json["provenance"];
  if (c.timing) prov["seconds"] = seconds;
  write_json_output(out_path, io::config_to_json(e.graph(), healed, prov), m);
  out << "healed " << targets.size() << " targets, E " << fmt(before, 6) << " -> "
      << fmt(after, 6) << "\n";
  if (!l.weights.trained) out << "warning: estimator uses untrained default weights\n";
  return kExitOk;
}

int cmd_stitch(const Common& c, const std::string& char_path, const std::string& weights_path,
               int regions, const SnakeFlags& sf, std::optional<std::uint64_t> seed_flag,
               const std::string& out_path, std::ostream& out) {
  Manifest m;
  m.command = "stitch";
  const Loaded l = load_estimator_inputs(char_path, weights_path, m);
  const std::uint64_t seed = resolve_seed(seed_flag, m);
  const SnakeParams params = sf.params(seed);
  m.args = {{"snake", io::to_json(params)}, {"regions", regions}};
  const Estimator e = build_estimator(l.data, kAllMechanisms, l.weights);
  const auto bounds = hard_bounds(*l.data, e.graph());
  const StitchPlan plan = make_stitch_plan(e, regions);
  const StitchResult r = stitch(e, bounds, plan, params, c.jobs != 1);
  Json seam = Json::array();
  for (VarId v : plan.seam) seam.push_back(e.graph().name(v));
  Json prov = {{"params", io::to_json(params)},
               {"seed", seed},
               {"regions", regions},
               {"seam", seam},
               {"estimator_hash", io::estimator_hash(e)},
               {"energy", r.energy},
               {"untrained_weights", !l.weights.trained}};
  if (c.timing) {
    prov["region_seconds"] = r.region_seconds;
    prov["seam_seconds"] = r.seam_seconds;
  }
  write_json_output(out_path, io::config_to_json(e.graph(), r.values, prov), m);
  out << "stitched " << regions << " regions, seam " << plan.seam.size()
      << " variables, E = " << fmt(r.energy, 6) << "\n";
  if (!l.weights.trained) out << "warning: estimator uses untrained default weights\n";
  return kExitOk;
}

int cmd_report(const std::string& char_path, const std::string& weights_path,
               const std::string& config_path, const std::string& out_path, std::ostream& out) {
  Manifest m;
  m.command = "report";
  const Loaded l = load_estimator_inputs(char_path, weights_path, m);
  const Json cfg_json = load_input(config_path, m);
  const Estimator e = build_estimator(l.data, kAllMechanisms, l.weights);
  const std::vector<double> config = io::config_from_json(cfg_json, e.graph());
  e.check_complete(config);
  const BenchmarkPrediction pred = predict_benchmarks(e, config);
  Json body;
  body["predictions"] = prediction_json(pred, l.data->processor, e.graph());
  body["e_cycle"] = io::to_json(percentile_report(pred.e_cycle));
  body["e_sq"] = io::to_json(percentile_report(pred.e_sq));
  body["outlier_fraction"] = outlier_fraction(pred.e_cycle);
  body["energy"] = e.evaluate(config);
  body["estimator_hash"] = io::estimator_hash(e);
  body["untrained_weights"] = pred.untrained;
  write_json_output(out_path, body, m);
  out << "median cycle error " << fmt(percentile_report(pred.e_cycle).p50) << ", outliers "
      << fmt(outlier_fraction(pred.e_cycle)) << "\n";
  if (pred.untrained) out << "warning: predictions use untrained default weights\n";
  return kExitOk;
}

// --- sweeps -----------------------------------------------------------------

std::vector<std::uint64_t> spec_seeds(const Json& spec) {
  if (!spec.contains("seeds")) throw InputError("sweep spec: missing 'seeds'");
  try {
    return spec["seeds"].get<std::vector<std::uint64_t>>();
  } catch (const Json::exception&) {
    throw InputError("sweep spec: 'seeds' must be a list of unsigned integers");
  }
}

SweepSettings spec_settings(const Json& spec) {
  SweepSettings s;
  if (spec.contains("weights")) s.weights = io::weights_from_json(spec["weights"]);
  if (spec.contains("snake")) s.params = io::snake_params_from_json(spec["snake"]);
  return s;
}

std::shared_ptr<const CharacterizationData> spec_processor(const Json& spec) {
  GenerativeSpec priors = spec.contains("priors") ? io::priors_from_json(spec["priors"])
                                                  : GenerativeSpec{};
  if (spec.contains("processor_seed")) priors.seed = spec["processor_seed"].get<std::uint64_t>();
  ProcessorGraph g;
  if (spec.contains("processor") && spec["processor"] == "sycamore68") {
    g = sycamore_like_68();
  } else if (spec.contains("distance")) {
    g = build_surface_code_lattice(spec["distance"].get<int>());
  } else {
    throw InputError("sweep spec: give 'distance' or \"processor\": \"sycamore68\"");
  }
  return std::make_shared<const CharacterizationData>(generate_processor(priors, g));
}

std::string scope_label(int s) { return s == kGlobalScope ? "max" : std::to_string(s); }

std::string flags_label(unsigned flags) {
  const auto names = mechanism_names(flags);
  if (names.empty()) return "none";
  std::string s;
  for (const auto& n : names) s += (s.empty() ? "" : "+") + n;
  return s;
}

int cmd_sweep(const Common& c, const std::string& kind, const std::string& spec_path,
              const std::string& out_dir, std::ostream& out) {
  Manifest m;
  m.command = "sweep " + kind;
  const Json spec = load_input(spec_path, m);
  if (!spec.is_object()) throw InputError("sweep spec must be a JSON object");
  m.args = spec;
  Json results;
  std::vector<TableRow> rows;

  if (kind == "scope") {
    const auto data = spec_processor(spec);
    const auto seeds = spec_seeds(spec);
    std::vector<int> scopes{1, 2, kGlobalScope};
    if (spec.contains("scopes")) {
      scopes.clear();
      for (const auto& s : spec["scopes"]) {
        scopes.push_back(s.is_string() ? parse_scope(s.get<std::string>()) : s.get<int>());
      }
    }
    m.seeds["seeds"] = seeds;
    SweepSettings st = spec_settings(spec);
    st.parallel = c.jobs != 1;
    const auto runs = run_scope_sweep(data, scopes, seeds, st);
    results["runs"] = Json::array();
    for (const auto& r : runs) {
      Json j = {{"seed", r.seed},
                {"scope", scope_label(r.scope)},
                {"e_cycle", io::to_json(r.e_cycle)},
                {"outlier_fraction", r.outlier_fraction},
                {"energy", r.energy},
                {"evaluations", r.evaluations},
                {"steps", r.steps},
                {"budget", r.budget}};
      if (c.timing) j["seconds"] = r.seconds;
      results["runs"].push_back(j);
      TableRow row;
      row.benchmark = "CZXEB";
      row.n = static_cast<double>(data->processor.num_qubits());
      row.configurations = 1;
      row.label = "Optimized";
      row.scope = scope_label(r.scope);
      row.stats = r.e_cycle;
      row.has_stats = true;
      rows.push_back(row);
    }
  } else if (kind == "mitigation") {
    const auto data = spec_processor(spec);
    const auto seeds = spec_seeds(spec);
    std::vector<unsigned> subsets;
    if (spec.contains("subsets")) {
      for (const auto& s : spec["subsets"]) {
        subsets.push_back(s.is_number_unsigned() ? s.get<unsigned>()
                                                 : parse_mechanisms(s.get<std::vector<std::string>>()));
      }
    }
    m.seeds["seeds"] = seeds;
    SweepSettings st = spec_settings(spec);
    st.parallel = c.jobs != 1;
    const auto runs = run_mitigation_sweep(data, subsets, seeds, st);
    results["runs"] = Json::array();
    for (const auto& r : runs) {
      results["runs"].push_back({{"seed", r.seed},
                                 {"mechanisms", mechanism_names(r.flags)},
                                 {"e_cycle", io::to_json(r.e_cycle)},
                                 {"outlier_fraction", r.outlier_fraction},
                                 {"energy", r.energy},
                                 {"median_idle_detuning_ghz", r.median_idle_detuning_ghz}});
      TableRow row;
      row.benchmark = "CZXEB";
      row.n = static_cast<double>(data->processor.num_qubits());
      row.configurations = 1;
      row.label = flags_label(r.flags);
      row.stats = r.e_cycle;
      row.has_stats = true;
      rows.push_back(row);
    }
  } else if (kind == "scaling") {
    ScalingSettings st;
    st.seeds = spec_seeds(spec);
    if (spec.contains("distances")) st.distances = spec["distances"].get<std::vector<int>>();
    if (spec.contains("priors")) st.priors = io::priors_from_json(spec["priors"]);
    if (spec.contains("processor_seed")) st.priors.seed = spec["processor_seed"].get<std::uint64_t>();
    if (spec.contains("small_n_configs")) st.small_n_configs = spec["small_n_configs"].get<int>();
    if (spec.contains("small_n_threshold")) {
      st.small_n_threshold = spec["small_n_threshold"].get<int>();
    }
    if (spec.contains("stitch_regions")) st.stitch_regions = spec["stitch_regions"].get<int>();
    st.sweep = spec_settings(spec);
    st.sweep.parallel = c.jobs != 1;
    m.seeds["seeds"] = st.seeds;
    const ScalingResult r = run_scaling_sweep(st);
    results["points"] = Json::array();
    for (const auto& p : r.points) {
      Json j = {{"distance", p.distance},
                {"N", p.n},
                {"configurations", p.configurations},
                {"baseline", io::to_json(p.baseline)},
                {"optimized", io::to_json(p.optimized)}};
      if (p.has_stitched) j["stitched"] = io::to_json(p.stitched);
      if (c.timing) j["optimize_seconds"] = p.optimize_seconds;
      results["points"].push_back(j);
    }
    auto fit_json = [](bool ok, const SaturationFit& f, const std::string& err) {
      return ok ? io::to_json(f) : Json{{"error", err}};
    };
    results["baseline_fit"] = fit_json(r.baseline_fit_ok, r.baseline_fit, r.baseline_fit_error);
    results["optimized_fit"] = fit_json(r.optimized_fit_ok, r.optimized_fit, r.optimized_fit_error);
    rows = r.table();
  } else {
    throw std::invalid_argument("unknown sweep kind '" + kind + "' (scope, mitigation, scaling)");
  }

  fs::create_directories(out_dir);
  const std::string results_path = (fs::path(out_dir) / "results.json").string();
  const std::string table_path = (fs::path(out_dir) / "table.csv").string();
  io::write_file_atomic(results_path, io::dump(results));
  io::write_file_atomic(table_path, to_csv(rows));
  m.output(results_path);
  m.output(table_path);
  io::write_file_atomic((fs::path(out_dir) / "manifest.json").string(), io::dump(m.to_json()));
  out << "sweep " << kind << ": " << rows.size() << " table rows written\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"snakeopt: frequency-configuration optimizer for tunable-qubit processors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Common common;
  app.add_option("--jobs", common.jobs, "Worker threads for sweeps and multi-seed runs (0 = all cores)")
      ->capture_default_str();
  app.add_flag("--timing", common.timing, "Include wall-clock seconds in outputs (not reproducible)");

  std::optional<std::uint64_t> seed;
  std::string out_path, char_path, weights_path, config_path, proc_path, spec_path, data_path;
  const char* seed_help = "RNG seed (unsigned integer; SNAKEOPT_SEED overrides)";

  auto* topo = app.add_subcommand("topo", "Build a processor graph");
  int distance = 0;
  bool sycamore = false;
  topo->add_option("--distance", distance, "Rotated surface-code distance d (N = 2d^2 - 1 qubits)");
  topo->add_flag("--sycamore68", sycamore, "Use the built-in 68-qubit processor");
  topo->add_option("--out", out_path, "Output processor JSON file")->required();

  auto* gen = app.add_subcommand("gen", "Sample simulated characterization data");
  gen->add_option("--proc", proc_path, "Processor JSON file")->required();
  gen->add_option("--spec", spec_path, "Priors JSON file (defaults when omitted)");
  gen->add_option("--seed", seed, seed_help);
  gen->add_option("--out", out_path, "Output characterization JSON file")->required();

  auto* synth = app.add_subcommand("synth", "Generate benchmark samples from an estimator");
  int configs = 40;
  double noise = 0.0;
  synth->add_option("--char", char_path, "Characterization JSON file")->required();
  synth->add_option("--weights", weights_path, "Generating weight table JSON (defaults when omitted)");
  synth->add_option("--configs", configs, "Random configurations (count); each yields an isolated "
                                          "and a parallel sample")
      ->capture_default_str();
  synth->add_option("--noise", noise, "Relative Gaussian noise on every benchmark (fraction)")
      ->capture_default_str();
  synth->add_option("--seed", seed, seed_help);
  synth->add_option("--out", out_path, "Output dataset JSON-lines file")->required();

  auto* train = app.add_subcommand("train", "Fit estimator weights to benchmarks");
  int iterations = TrainOptions{}.iterations;
  double train_fraction = TrainOptions{}.train_fraction;
  train->add_option("--char", char_path, "Characterization JSON file")->required();
  train->add_option("--data", data_path, "Benchmark dataset JSON-lines file")->required();
  train->add_option("--iterations", iterations, "Optimizer iterations per stage (count)")
      ->capture_default_str();
  train->add_option("--train-fraction", train_fraction, "Fraction of rows used for fitting (0-1]")
      ->capture_default_str();
  train->add_option("--seed", seed, seed_help);
  train->add_option("--out", out_path, "Output weight table JSON file")->required();

  SnakeFlags sf;
  auto* opt = app.add_subcommand("optimize", "Optimize a frequency configuration with Snake");
  std::string flags_str = "all";
  bool arbitrary = false;
  opt->add_option("--char", char_path, "Characterization JSON file")->required();
  opt->add_option("--weights", weights_path, "Weight table JSON (untrained defaults when omitted)");
  opt->add_option("--mechanisms", flags_str,
                  "Comma list of relaxation, dephasing, stray_coupling, pulse_distortion, or 'all'")
      ->capture_default_str();
  opt->add_flag("--arbitrary-algorithm", arbitrary,
                "Model stray coupling between every gate pair instead of the four CZ layers");
  sf.add(opt);
  opt->add_option("--seed", seed, seed_help);
  opt->add_option("--out", out_path, "Output configuration JSON file (GHz)")->required();

  auto* heal_cmd = app.add_subcommand("heal", "Re-optimize outlier gates of a configuration");
  std::string targets = "auto";
  double cycle_threshold = HealThresholds{}.cycle, sq_threshold = HealThresholds{}.sq;
  heal_cmd->add_option("--char", char_path, "Characterization JSON file")->required();
  heal_cmd->add_option("--weights", weights_path, "Weight table JSON (untrained defaults when omitted)");
  heal_cmd->add_option("--config", config_path, "Configuration JSON file to heal")->required();
  heal_cmd->add_option("--targets", targets, "'auto' or a comma list of variable names (q3, q3-q7)")
      ->capture_default_str();
  heal_cmd->add_option("--cycle-threshold", cycle_threshold,
                       "Cycle error above which a pair is an outlier (dimensionless)")
      ->capture_default_str();
  heal_cmd->add_option("--sq-threshold", sq_threshold,
                       "Single-qubit error above which a qubit is an outlier (dimensionless)")
      ->capture_default_str();
  sf.add(heal_cmd);
  heal_cmd->add_option("--seed", seed, seed_help);
  heal_cmd->add_option("--out", out_path, "Output configuration JSON file (GHz)")->required();

  auto* stitch_cmd = app.add_subcommand("stitch", "Optimize regions in parallel and heal the seams");
  int regions = 2;
  stitch_cmd->add_option("--char", char_path, "Characterization JSON file")->required();
  stitch_cmd->add_option("--weights", weights_path, "Weight table JSON (untrained defaults when omitted)");
  stitch_cmd->add_option("--regions", regions, "Number of strip regions R (count)")->capture_default_str();
  sf.add(stitch_cmd);
  stitch_cmd->add_option("--seed", seed, seed_help);
  stitch_cmd->add_option("--out", out_path, "Output configuration JSON file (GHz)")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a scope, mitigation or scaling study");
  std::string sweep_kind;
  sweep->add_option("kind", sweep_kind, "scope, mitigation or scaling")->required();
  sweep->add_option("--spec", spec_path, "Sweep spec JSON file")->required();
  sweep->add_option("--out", out_path, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Predict benchmarks of a configuration");
  report->add_option("--char", char_path, "Characterization JSON file")->required();
  report->add_option("--weights", weights_path, "Weight table JSON (untrained defaults when omitted)");
  report->add_option("--config", config_path, "Configuration JSON file")->required();
  report->add_option("--out", out_path, "Output report JSON file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitBadArguments;
  }

  try {
    if (common.jobs < 0) throw std::invalid_argument("--jobs must be >= 0");
    if (common.jobs > 0) omp_set_num_threads(common.jobs);
    if (topo->parsed()) return cmd_topo(distance, sycamore, out_path, out);
    if (gen->parsed()) return cmd_gen(proc_path, spec_path, seed, out_path, out);
    if (synth->parsed()) {
      return cmd_synth(char_path, weights_path, configs, noise, seed, out_path, out);
    }
    if (train->parsed()) {
      return cmd_train(char_path, data_path, iterations, train_fraction, seed, out_path, out);
    }
    if (opt->parsed()) {
      return cmd_optimize(common, char_path, weights_path, flags_str, arbitrary, sf, seed, out_path,
                          out);
    }
    if (heal_cmd->parsed()) {
      return cmd_heal(common, char_path, weights_path, config_path, targets, cycle_threshold,
                      sq_threshold, sf, seed, out_path, out);
    }
    if (stitch_cmd->parsed()) {
      return cmd_stitch(common, char_path, weights_path, regions, sf, seed, out_path, out);
    }
    if (sweep->parsed()) return cmd_sweep(common, sweep_kind, spec_path, out_path, out);
    if (report->parsed()) return cmd_report(char_path, weights_path, config_path, out_path, out);
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitBadArguments;
  } catch (const InputError& ex) {
    err << "input error: " << ex.what() << "\n";
    return kExitInputError;
  } catch (const Json::exception& ex) {
    err << "input error: " << ex.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitNumericalError;
  }
  return kExitBadArguments;
}

}  // namespace snakeopt
