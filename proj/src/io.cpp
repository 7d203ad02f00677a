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

#include "snakeopt/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace snakeopt::io {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T get(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(std::string(what) + ": missing key '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& ex) {
    throw InputError(std::string(what) + ": bad value for '" + key + "': " + ex.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const char* what) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, what);
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + ": expected a JSON object");
}

struct SpecField {
  const char* key;
  double GenerativeSpec::*member;
};

constexpr SpecField kSpecFields[] = {
    {"fmax_mean_ghz", &GenerativeSpec::fmax_mean_ghz},
    {"fmax_sd_ghz", &GenerativeSpec::fmax_sd_ghz},
    {"band_lo_ghz", &GenerativeSpec::band_lo_ghz},
    {"band_hi_ghz", &GenerativeSpec::band_hi_ghz},
    {"eta_ghz", &GenerativeSpec::eta_ghz},
    {"t1_bg_lo_us", &GenerativeSpec::t1_bg_lo_us},
    {"t1_bg_hi_us", &GenerativeSpec::t1_bg_hi_us},
    {"tls_density_per_ghz", &GenerativeSpec::tls_density_per_ghz},
    {"tls_width_lo_mhz", &GenerativeSpec::tls_width_lo_mhz},
    {"tls_width_hi_mhz", &GenerativeSpec::tls_width_hi_mhz},
    {"tls_depth_median_per_us", &GenerativeSpec::tls_depth_median_per_us},
    {"tls_depth_sigma", &GenerativeSpec::tls_depth_sigma},
    {"chi_nn_sd_mhz", &GenerativeSpec::chi_nn_sd_mhz},
    {"chi_nnn_sd_mhz", &GenerativeSpec::chi_nnn_sd_mhz},
    {"readout_mean_ghz", &GenerativeSpec::readout_mean_ghz},
    {"readout_sd_ghz", &GenerativeSpec::readout_sd_ghz},
    {"readout_exclusion_ghz", &GenerativeSpec::readout_exclusion_ghz},
    {"delta1_median_per_ghz", &GenerativeSpec::delta1_median_per_ghz},
    {"delta2_median_per_ghz2", &GenerativeSpec::delta2_median_per_ghz2},
    {"delta_sigma", &GenerativeSpec::delta_sigma},
    {"grid_margin_below_ghz", &GenerativeSpec::grid_margin_below_ghz},
    {"grid_step_ghz", &GenerativeSpec::grid_step_ghz},
};

std::string pair_name(const ProcessorGraph& p, int coupler) {
  const Coupler& c = p.couplers()[static_cast<std::size_t>(coupler)];
  return "q" + std::to_string(p.qubits()[c.a].id) + "-q" + std::to_string(p.qubits()[c.b].id);
}

std::string qubit_name(const ProcessorGraph& p, int q) {
  return "q" + std::to_string(p.qubits()[static_cast<std::size_t>(q)].id);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("cannot read " + path);
  return ss.str();
}

Json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& ex) {
    throw InputError(path + ": " + ex.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename into " + path);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double round_ghz(double ghz) { return std::round(ghz * 1e6) / 1e6; }

Json to_json(const ProcessorGraph& p) {
  Json j;
  j["qubits"] = Json::array();
  for (const Qubit& q : p.qubits()) j["qubits"].push_back({{"id", q.id}, {"x", q.x}, {"y", q.y}});
  j["couplers"] = Json::array();
  for (const Coupler& c : p.couplers()) {
    j["couplers"].push_back({p.qubits()[c.a].id, p.qubits()[c.b].id});
  }
  if (p.distance()) j["distance"] = *p.distance();
  return j;
}

ProcessorGraph processor_from_json(const Json& j) {
  constexpr const char* what = "processor";
  require_object(j, what);
  if (!j.contains("qubits") || !j["qubits"].is_array()) throw InputError("processor: missing qubits");
  if (!j.contains("couplers") || !j["couplers"].is_array()) {
    throw InputError("processor: missing couplers");
  }
  std::vector<Qubit> qubits;
  for (const auto& q : j["qubits"]) {
    qubits.push_back({get<int>(q, "id", what), get<int>(q, "x", what), get<int>(q, "y", what)});
  }
  std::vector<std::array<int, 2>> couplers;
  for (const auto& c : j["couplers"]) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer()) {
      throw InputError("processor: couplers must be [id, id] pairs");
    }
    couplers.push_back({c[0].get<int>(), c[1].get<int>()});
  }
  std::optional<int> distance;
  if (j.contains("distance")) distance = get<int>(j, "distance", what);
  return ProcessorGraph(std::move(qubits), couplers, distance);
}

Json to_json(const GenerativeSpec& s) {
  Json j;
  j["seed"] = s.seed;
  for (const auto& f : kSpecFields) j[f.key] = s.*(f.member);
  return j;
}

GenerativeSpec priors_from_json(const Json& j) {
  constexpr const char* what = "priors";
  require_object(j, what);
  GenerativeSpec s;
  std::set<std::string> known{"seed"};
  for (const auto& f : kSpecFields) {
    known.insert(f.key);
    if (j.contains(f.key)) s.*(f.member) = get<double>(j, f.key, what);
  }
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InputError("priors: unknown key '" + key + "'");
  }
  s.seed = get_or<std::uint64_t>(j, "seed", 0, what);
  try {
    s.validate();
  } catch (const std::invalid_argument& ex) {
    throw InputError(std::string("priors: ") + ex.what());
  }
  return s;
}

Json to_json(const CharacterizationData& d) {
  const ProcessorGraph& p = d.processor;
  Json j;
  j["processor"] = to_json(p);
  j["grid"] = {{"f0_ghz", d.grid.f0_ghz}, {"step_ghz", d.grid.step_ghz}, {"size", d.grid.size}};
  j["t_sq_ns"] = d.t_sq_ns;
  j["t_cz_ns"] = d.t_cz_ns;
  j["readout_exclusion_ghz"] = d.readout_exclusion_ghz;
  j["qubits"] = Json::array();
  for (std::size_t q = 0; q < d.qubits.size(); ++q) {
    const auto& c = d.qubits[q];
    j["qubits"].push_back({{"id", p.qubits()[q].id},
                           {"f_max_ghz", c.f_max_ghz},
                           {"eta_ghz", c.eta_ghz},
                           {"readout_ghz", c.readout_ghz},
                           {"delta1", c.delta1},
                           {"delta2", c.delta2},
                           {"t1_inv_per_us", c.t1_inv},
                           {"dfdphi_ghz", c.dfdphi}});
  }
  j["stray"] = Json::array();
  for (const auto& s : d.stray) {
    j["stray"].push_back({{"a", p.qubits()[s.a].id},
                          {"b", p.qubits()[s.b].id},
                          {"chi_mhz", s.chi_mhz},
                          {"nearest", s.nearest}});
  }
  j["trajectories"] = Json::array();
  for (const auto& t : d.trajectories) {
    j["trajectories"].push_back({{"high", p.qubits()[t.high].id},
                                 {"low", p.qubits()[t.low].id},
                                 {"ramp_ns", t.ramp_ns},
                                 {"dwell_ns", t.dwell_ns}});
  }
  return j;
}

CharacterizationData characterization_from_json(const Json& j) {
  constexpr const char* what = "characterization";
  require_object(j, what);
  CharacterizationData d;
  if (!j.contains("processor")) throw InputError("characterization: missing processor");
  d.processor = processor_from_json(j["processor"]);
  const ProcessorGraph& p = d.processor;
  const Json grid = get<Json>(j, "grid", what);
  d.grid.f0_ghz = get<double>(grid, "f0_ghz", what);
  d.grid.step_ghz = get<double>(grid, "step_ghz", what);
  d.grid.size = get<int>(grid, "size", what);
  if (d.grid.size < 2 || !(d.grid.step_ghz > 0.0)) throw InputError("characterization: bad grid");
  d.t_sq_ns = get<double>(j, "t_sq_ns", what);
  d.t_cz_ns = get<double>(j, "t_cz_ns", what);
  d.readout_exclusion_ghz = get<double>(j, "readout_exclusion_ghz", what);

  const Json qubits = get<Json>(j, "qubits", what);
  if (!qubits.is_array() || qubits.size() != p.num_qubits()) {
    throw InputError("characterization: need one qubit entry per processor qubit");
  }
  d.qubits.resize(p.num_qubits());
  for (const auto& q : qubits) {
    const int idx = p.index_of(get<int>(q, "id", what));
    auto& c = d.qubits[static_cast<std::size_t>(idx)];
    c.f_max_ghz = get<double>(q, "f_max_ghz", what);
    c.eta_ghz = get<double>(q, "eta_ghz", what);
    c.readout_ghz = get<double>(q, "readout_ghz", what);
    c.delta1 = get<double>(q, "delta1", what);
    c.delta2 = get<double>(q, "delta2", what);
    c.t1_inv = get<std::vector<double>>(q, "t1_inv_per_us", what);
    c.dfdphi = get<std::vector<double>>(q, "dfdphi_ghz", what);
    if (c.t1_inv.size() != static_cast<std::size_t>(d.grid.size) ||
        c.dfdphi.size() != static_cast<std::size_t>(d.grid.size)) {
      throw InputError("characterization: spectrum length does not match the grid");
    }
  }
  for (const auto& s : get<Json>(j, "stray", what)) {
    StrayPair sp;
    sp.a = p.index_of(get<int>(s, "a", what));
    sp.b = p.index_of(get<int>(s, "b", what));
    sp.chi_mhz = get<double>(s, "chi_mhz", what);
    sp.nearest = get<bool>(s, "nearest", what);
    d.stray.push_back(sp);
  }
  const Json traj = get<Json>(j, "trajectories", what);
  if (!traj.is_array() || traj.size() != p.num_couplers()) {
    throw InputError("characterization: need one trajectory per coupler");
  }
  for (const auto& t : traj) {
    CzTrajectory c;
    c.high = p.index_of(get<int>(t, "high", what));
    c.low = p.index_of(get<int>(t, "low", what));
    c.ramp_ns = get<double>(t, "ramp_ns", what);
    c.dwell_ns = get<double>(t, "dwell_ns", what);
    d.trajectories.push_back(c);
  }
  return d;
}

Json to_json(const WeightTable& w) {
  Json j = Json::object();
  for (int g = 0; g < kNumGroups; ++g) j[group_name(g)] = w.w[static_cast<std::size_t>(g)];
  return j;
}

WeightTable weights_from_json(const Json& j) {
  require_object(j, "weights");
  WeightTable w = WeightTable::zeros();
  std::set<int> seen;
  for (const auto& [key, value] : j.items()) {
    if (key == "manifest") continue;
    const int g = group_index(key);
    if (!value.is_number()) throw InputError("weights: '" + key + "' is not a number");
    const double x = value.get<double>();
    if (!std::isfinite(x) || x < 0.0) throw InputError("weights: '" + key + "' must be >= 0");
    w.w[static_cast<std::size_t>(g)] = x;
    seen.insert(g);
  }
  if (seen.size() != static_cast<std::size_t>(kNumGroups)) {
    throw InputError("weights: expected all " + std::to_string(kNumGroups) + " groups");
  }
  w.trained = true;
  return w;
}

Json to_json(const SnakeParams& p) {
  Json j;
  j["scope"] = p.scope == kGlobalScope ? Json("max") : Json(p.scope);
  j["seeds"] = p.seeds == 0 ? Json("all") : Json(p.seeds);
  j["rule"] = to_string(p.rule);
  j["heuristic"] = to_string(p.heuristic);
  const char* kind = p.solver.kind == InnerSolverKind::exhaustive   ? "exhaustive"
                     : p.solver.kind == InnerSolverKind::stochastic ? "stochastic"
                                                                    : "automatic";
  j["solver"] = {{"kind", kind},
                 {"budget", p.solver.budget},
                 {"population", p.solver.population},
                 {"mutation", p.solver.mutation},
                 {"crossover", p.solver.crossover}};
  j["global_budget"] = p.global_budget;
  j["seed"] = p.seed;
  return j;
}

SnakeParams snake_params_from_json(const Json& j) {
  constexpr const char* what = "snake parameters";
  require_object(j, what);
  SnakeParams p;
  if (j.contains("scope")) {
    p.scope = j["scope"].is_string() && j["scope"] == "max" ? kGlobalScope : get<int>(j, "scope", what);
  }
  if (j.contains("seeds")) {
    p.seeds = j["seeds"].is_string() && j["seeds"] == "all" ? 0 : get<int>(j, "seeds", what);
  }
  if (j.contains("rule")) p.rule = parse_rule(get<std::string>(j, "rule", what));
  if (j.contains("heuristic")) p.heuristic = parse_heuristic(get<std::string>(j, "heuristic", what));
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    require_object(s, what);
    const std::string kind = get_or<std::string>(s, "kind", "automatic", what);
    if (kind == "automatic") {
      p.solver.kind = InnerSolverKind::automatic;
    } else if (kind == "exhaustive") {
      p.solver.kind = InnerSolverKind::exhaustive;
    } else if (kind == "stochastic") {
      p.solver.kind = InnerSolverKind::stochastic;
    } else {
      throw InputError("snake parameters: unknown solver kind '" + kind + "'");
    }
    p.solver.budget = get_or<std::int64_t>(s, "budget", p.solver.budget, what);
    p.solver.population = get_or<int>(s, "population", p.solver.population, what);
    p.solver.mutation = get_or<double>(s, "mutation", p.solver.mutation, what);
    p.solver.crossover = get_or<double>(s, "crossover", p.solver.crossover, what);
  }
  p.global_budget = get_or<std::int64_t>(j, "global_budget", p.global_budget, what);
  p.seed = get_or<std::uint64_t>(j, "seed", p.seed, what);
  return p;
}

Json config_to_json(const GateVariableGraph& g, const std::vector<double>& f,
                    const Json& provenance) {
  if (f.size() != g.size()) throw InputError("configuration size does not match the variables");
  Json freqs = Json::object();
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (std::isnan(f[v])) continue;
    freqs[g.name(static_cast<VarId>(v))] = round_ghz(f[v]);
  }
  return {{"frequencies", freqs}, {"provenance", provenance}};
}

std::vector<double> config_from_json(const Json& j, const GateVariableGraph& g) {
  require_object(j, "configuration");
  const Json& freqs = j.contains("frequencies") ? j["frequencies"] : j;
  require_object(freqs, "configuration");
  std::vector<double> f(g.size(), kNaN);
  for (const auto& [key, value] : freqs.items()) {
    const VarId v = g.find(key);
    if (!value.is_number()) throw InputError("configuration: '" + key + "' is not a number");
    f[static_cast<std::size_t>(v)] = snap_to_grid(value.get<double>());
  }
  return f;
}

std::string dataset_to_jsonl(const std::vector<BenchmarkSample>& samples,
                             const GateVariableGraph& g, const ProcessorGraph& p) {
  std::string out;
  for (const auto& s : samples) {
    Json cfg = config_to_json(g, s.config, Json::object())["frequencies"];
    Json sq = Json::object(), cyc = Json::object();
    for (std::size_t q = 0; q < s.e_sq.size(); ++q) {
      if (!std::isnan(s.e_sq[q])) sq[qubit_name(p, static_cast<int>(q))] = s.e_sq[q];
    }
    for (std::size_t c = 0; c < s.e_cycle.size(); ++c) {
      if (!std::isnan(s.e_cycle[c])) cyc[pair_name(p, static_cast<int>(c))] = s.e_cycle[c];
    }
    Json line = {{"config", cfg},
                 {"benchmarks", {{"e_sq", sq}, {"e_cycle", cyc}}},
                 {"tag", s.tag == SampleTag::isolated ? "isolated" : "parallel"}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<BenchmarkSample> dataset_from_jsonl(const std::string& text,
                                                const GateVariableGraph& g,
                                                const ProcessorGraph& p) {
  constexpr const char* what = "dataset";
  std::vector<BenchmarkSample> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& ex) {
      throw InputError("dataset line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (j.is_object() && j.size() == 1 && j.contains("manifest")) continue;
    BenchmarkSample s;
    s.config = config_from_json(get<Json>(j, "config", what), g);
    const std::string tag = get<std::string>(j, "tag", what);
    if (tag == "isolated") {
      s.tag = SampleTag::isolated;
    } else if (tag == "parallel") {
      s.tag = SampleTag::parallel;
    } else {
      throw InputError("dataset line " + std::to_string(line_no) + ": unknown tag '" + tag + "'");
    }
    const Json b = get<Json>(j, "benchmarks", what);
    s.e_sq.assign(p.num_qubits(), kNaN);
    s.e_cycle.assign(p.num_couplers(), kNaN);
    const Json sq = get<Json>(b, "e_sq", what);
    const Json cyc = get<Json>(b, "e_cycle", what);
    for (const auto& [key, value] : sq.items()) {
      const VarId v = g.find(key);
      if (!g.is_idle(v)) throw InputError("dataset: e_sq key '" + key + "' is not a qubit");
      s.e_sq[static_cast<std::size_t>(g.var(v).support[0])] = value.get<double>();
    }
    for (const auto& [key, value] : cyc.items()) {
      const VarId v = g.find(key);
      if (g.is_idle(v)) throw InputError("dataset: e_cycle key '" + key + "' is not a pair");
      s.e_cycle[static_cast<std::size_t>(g.var(v).coupler)] = value.get<double>();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string estimator_hash(const Estimator& e) {
  Json j;
  j["characterization"] = to_json(e.data());
  j["weights"] = to_json(e.weights());
  j["flags"] = e.flags();
  j["components"] = e.components().size();
  return hex64(fnv1a64(j.dump()));
}

Json to_json(const PercentileReport& r) {
  return {{"min", r.min},   {"max", r.max}, {"mean", r.mean}, {"p2.5", r.p2_5},
          {"p25", r.p25},   {"p50", r.p50}, {"p75", r.p75},   {"p97.5", r.p97_5}};
}

Json to_json(const SaturationFit& f) {
  return {{"N_sat", f.n_sat},     {"N_sat_sigma", f.n_sat_sigma},
          {"e_scale", f.e_scale}, {"e_scale_sigma", f.e_scale_sigma},
          {"e_sat", f.e_sat},     {"e_sat_sigma", f.e_sat_sigma},
          {"rss", f.rss},         {"iterations", f.iterations}};
}

Json to_json(const RuntimeFit& f) {
  return {{"a", f.a},
          {"a_sigma", f.a_sigma},
          {"b", f.b},
          {"b_sigma", f.b_sigma},
          {"c", f.c},
          {"c_sigma", f.c_sigma},
          {"r_squared", f.r_squared},
          {"residuals", f.residuals}};
}

}  // namespace snakeopt::io
