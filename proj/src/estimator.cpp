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

#include "snakeopt/estimator.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace snakeopt {

namespace {

constexpr const char* kGroupNames[kNumGroups] = {
    "sq.relaxation", "sq.dephasing",     "sq.stray",
    "cz.relaxation", "cz.relaxation_11", "cz.dephasing",
    "cz.distortion", "cz.stray_cz",      "cz.stray_spectator",
};

constexpr const char* kMechanismNames[4] = {"relaxation", "dephasing", "stray_coupling",
                                            "pulse_distortion"};

// Ramps are integrated with the trapezoid rule over this many points.
constexpr int kTrajectoryPoints = 32;

}  // namespace

unsigned parse_mechanisms(const std::vector<std::string>& names) {
  unsigned flags = 0;
  for (const auto& n : names) {
    bool found = false;
    for (unsigned b = 0; b < 4; ++b) {
      if (n == kMechanismNames[b]) {
        flags |= 1u << b;
        found = true;
      }
    }
    if (n == "all") {
      flags |= kAllMechanisms;
      found = true;
    }
    if (!found) throw InputError("unknown mechanism flag '" + n + "'");
  }
  return flags;
}

std::vector<std::string> mechanism_names(unsigned flags) {
  std::vector<std::string> out;
  for (unsigned b = 0; b < 4; ++b) {
    if (flags & (1u << b)) out.emplace_back(kMechanismNames[b]);
  }
  return out;
}

const char* group_name(int group) { return kGroupNames[group]; }

int group_index(const std::string& name) {
  for (int g = 0; g < kNumGroups; ++g) {
    if (name == kGroupNames[g]) return g;
  }
  throw InputError("unknown weight group '" + name + "'");
}

Mechanism mechanism_of(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::sq_relaxation:
    case ComponentKind::cz_relaxation:
    case ComponentKind::cz_relaxation_11:
      return kRelaxation;
    case ComponentKind::sq_dephasing:
    case ComponentKind::cz_dephasing:
      return kDephasing;
    case ComponentKind::sq_stray:
    case ComponentKind::cz_stray_cz:
    case ComponentKind::cz_stray_spectator:
      return kStrayCoupling;
    case ComponentKind::cz_distortion:
      return kPulseDistortion;
  }
  return kRelaxation;
}

bool is_stray(ComponentKind kind) { return mechanism_of(kind) == kStrayCoupling; }

WeightTable WeightTable::defaults() {
  WeightTable t;
  t.w = {0.33, 0.01, 0.02, 0.5, 0.25, 0.01, 0.01, 0.05, 0.05};
  return t;
}

WeightTable WeightTable::zeros() {
  WeightTable t;
  t.w.fill(0.0);
  return t;
}

std::vector<ErrorComponent> build_components(const GateVariableGraph& graph,
                                             const CharacterizationData& data,
                                             const LayerColoring& layers, unsigned flags,
                                             bool arbitrary_algorithm) {
  if (flags & ~kAllMechanisms) throw InputError("unknown mechanism flag bits");
  const ProcessorGraph& p = data.processor;
  const std::size_t n = p.num_qubits();
  if (graph.num_idle() != n || graph.size() != n + p.num_couplers() || data.qubits.size() != n ||
      data.trajectories.size() != p.num_couplers()) {
    throw InputError("characterization does not cover the gate-variable graph");
  }
  std::vector<ErrorComponent> out;

  // Parasitic partners per qubit with their coupling strength.
  std::vector<std::vector<std::pair<int, double>>> partners(n);
  std::map<std::pair<int, int>, double> chi_of;
  for (const auto& s : data.stray) {
    if (s.chi_mhz <= 0.0) continue;
    partners[s.a].push_back({s.b, s.chi_mhz * 1e-3});
    partners[s.b].push_back({s.a, s.chi_mhz * 1e-3});
    chi_of[{std::min(s.a, s.b), std::max(s.a, s.b)}] = s.chi_mhz * 1e-3;
  }
  for (auto& v : partners) std::sort(v.begin(), v.end());

  auto offset_in = [&](int coupler, int q) {
    const CzTrajectory& t = data.trajectories[coupler];
    const double half = 0.5 * std::abs(data.qubits[t.high].eta_ghz);
    return q == t.high ? half : -half;
  };
  auto add_channels = [&](ErrorComponent base) {
    for (std::uint8_t ch = 0; ch < 4; ++ch) {
      base.channel = ch;
      out.push_back(base);
    }
  };

  for (std::size_t qi = 0; qi < n; ++qi) {
    const int q = static_cast<int>(qi);
    ErrorComponent c;
    c.n_deps = 1;
    c.deps = {graph.idle_var(q), -1};
    c.gate = graph.idle_var(q);
    c.qubit = q;
    if (flags & kRelaxation) {
      c.kind = ComponentKind::sq_relaxation;
      out.push_back(c);
    }
    if (flags & kDephasing) {
      c.kind = ComponentKind::sq_dephasing;
      out.push_back(c);
    }
    if (flags & kStrayCoupling) {
      for (const auto& [o, chi] : partners[q]) {
        ErrorComponent s;
        s.kind = ComponentKind::sq_stray;
        s.n_deps = 2;
        s.deps = {graph.idle_var(q), graph.idle_var(o)};
        s.gate = graph.idle_var(q);
        s.qubit = q;
        s.other = o;
        s.chi_ghz = chi;
        s.eta_ghz = data.qubits[q].eta_ghz;
        s.other_eta_ghz = data.qubits[o].eta_ghz;
        add_channels(s);
      }
    }
  }

  for (std::size_t ci = 0; ci < p.num_couplers(); ++ci) {
    const int cpl = static_cast<int>(ci);
    const CzTrajectory& t = data.trajectories[ci];
    const VarId v = graph.interaction_var(cpl);
    for (int q : {t.high, t.low}) {
      ErrorComponent c;
      c.n_deps = 2;
      c.deps = {graph.idle_var(q), v};
      c.gate = v;
      c.qubit = q;
      c.coupler = cpl;
      c.offset_ghz = offset_in(cpl, q);
      c.eta_ghz = data.qubits[q].eta_ghz;
      if (flags & kRelaxation) {
        c.kind = ComponentKind::cz_relaxation;
        out.push_back(c);
        if (q == t.high) {
          c.kind = ComponentKind::cz_relaxation_11;
          out.push_back(c);
        }
      }
      if (flags & kDephasing) {
        c.kind = ComponentKind::cz_dephasing;
        out.push_back(c);
      }
      if (flags & kPulseDistortion) {
        c.kind = ComponentKind::cz_distortion;
        out.push_back(c);
      }
    }
  }

  if (!(flags & kStrayCoupling)) return out;

  // Which couplers run together, and which qubits idle, in each CZ layer.
  std::vector<std::vector<char>> busy(4, std::vector<char>(n, 0));
  for (int l = 0; l < 4; ++l) {
    for (int c : layers.layers[l]) {
      busy[l][p.couplers()[c].a] = 1;
      busy[l][p.couplers()[c].b] = 1;
    }
  }
  for (std::size_t ci = 0; ci < p.num_couplers(); ++ci) {
    const int c1 = static_cast<int>(ci);
    const Coupler& g1 = p.couplers()[ci];
    const int layer = layers.layer_of[ci];
    const VarId v1 = graph.interaction_var(c1);

    // Other CZ gates whose qubits couple parasitically to this one's.
    std::set<int> partner_couplers;
    for (int q : {g1.a, g1.b}) {
      for (const auto& [o, chi] : partners[q]) {
        for (int c2 : p.incident_couplers(o)) {
          if (c2 == c1) continue;
          const Coupler& g2 = p.couplers()[c2];
          if (g2.a == g1.a || g2.a == g1.b || g2.b == g1.a || g2.b == g1.b) continue;
          if (!arbitrary_algorithm && layers.layer_of[c2] != layer) continue;
          partner_couplers.insert(c2);
        }
      }
    }
    for (int c2 : partner_couplers) {
      const Coupler& g2 = p.couplers()[c2];
      for (int q : {g1.a, g1.b}) {
        for (int o : {g2.a, g2.b}) {
          auto it = chi_of.find({std::min(q, o), std::max(q, o)});
          if (it == chi_of.end()) continue;
          ErrorComponent s;
          s.kind = ComponentKind::cz_stray_cz;
          s.n_deps = 2;
          s.deps = {v1, graph.interaction_var(c2)};
          s.gate = v1;
          s.qubit = q;
          s.other = o;
          s.coupler = c1;
          s.offset_ghz = offset_in(c1, q);
          s.other_offset_ghz = offset_in(c2, o);
          s.chi_ghz = it->second;
          s.eta_ghz = data.qubits[q].eta_ghz;
          s.other_eta_ghz = data.qubits[o].eta_ghz;
          add_channels(s);
        }
      }
    }

    for (int q : {g1.a, g1.b}) {
      for (const auto& [o, chi] : partners[q]) {
        if (o == g1.a || o == g1.b) continue;
        if (!arbitrary_algorithm && busy[layer][o]) continue;
        ErrorComponent s;
        s.kind = ComponentKind::cz_stray_spectator;
        s.n_deps = 2;
        s.deps = {v1, graph.idle_var(o)};
        s.gate = v1;
        s.qubit = q;
        s.other = o;
        s.coupler = c1;
        s.offset_ghz = offset_in(c1, q);
        s.chi_ghz = chi;
        s.eta_ghz = data.qubits[q].eta_ghz;
        s.other_eta_ghz = data.qubits[o].eta_ghz;
        add_channels(s);
      }
    }
  }
  return out;
}

Estimator::Estimator(std::shared_ptr<const CharacterizationData> data, GateVariableGraph graph,
                     std::vector<ErrorComponent> components, WeightTable weights, unsigned flags)
    : data_(std::move(data)),
      graph_(std::move(graph)),
      components_(std::move(components)),
      weights_(weights),
      flags_(flags) {
  const std::size_t nv = graph_.size();
  by_var_.assign(nv, {});
  by_gate_.assign(nv, {});
  std::vector<char> used(nv, 0);
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    for (int d = 0; d < c.n_deps; ++d) {
      const VarId v = c.deps[d];
      if (v < 0 || static_cast<std::size_t>(v) >= nv) {
        throw InputError("component depends on an unknown variable");
      }
      by_var_[v].push_back(static_cast<int>(k));
      used[v] = 1;
    }
    if (c.gate < 0 || static_cast<std::size_t>(c.gate) >= nv) {
      throw InputError("component owned by an unknown gate");
    }
    by_gate_[c.gate].push_back(static_cast<int>(k));
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (used[v]) used_vars_.push_back(static_cast<VarId>(v));
  }
}

Estimator build_estimator(std::shared_ptr<const CharacterizationData> data, unsigned flags,
                          const WeightTable& weights, bool arbitrary_algorithm) {
  GateVariableGraph graph = build_gate_variable_graph(data->processor);
  const LayerColoring layers = color_cz_layers(data->processor);
  auto comps = build_components(graph, *data, layers, flags, arbitrary_algorithm);
  return Estimator(std::move(data), std::move(graph), std::move(comps), weights, flags);
}

double Estimator::kernel(std::size_t k, const double* f) const {
  const ErrorComponent& c = components_[k];
  const CharacterizationData& d = *data_;

  auto lorentzian = [&](double fq, double fo) {
    const double tq = fq + ((c.channel & 2) ? c.eta_ghz : 0.0);
    const double to = fo + ((c.channel & 1) ? c.other_eta_ghz : 0.0);
    const double delta = tq - to;
    const double chi2 = c.chi_ghz * c.chi_ghz;
    return chi2 / (chi2 + delta * delta);
  };
  // Integral over the CZ excursion in microseconds of rate(f(t)).
  auto trajectory = [&](double f_idle, double f_target, auto rate) {
    const CzTrajectory& t = d.trajectories[c.coupler];
    double ramp = 0.0;
    for (int i = 0; i < kTrajectoryPoints; ++i) {
      const double s = static_cast<double>(i) / (kTrajectoryPoints - 1);
      const double w = (i == 0 || i == kTrajectoryPoints - 1) ? 0.5 : 1.0;
      ramp += w * rate(f_idle + s * (f_target - f_idle));
    }
    ramp /= (kTrajectoryPoints - 1);
    return 1e-3 * (2.0 * t.ramp_ns * ramp + t.dwell_ns * rate(f_target));
  };

  switch (c.kind) {
    case ComponentKind::sq_relaxation:
      return 1e-3 * d.t_sq_ns * d.t1_inv_at(c.qubit, f[c.deps[0]]);
    case ComponentKind::sq_dephasing:
      return 1e-3 * d.t_sq_ns * d.dfdphi_at(c.qubit, f[c.deps[0]]);
    case ComponentKind::sq_stray:
      return lorentzian(f[c.deps[0]], f[c.deps[1]]);
    case ComponentKind::cz_relaxation:
      return trajectory(f[c.deps[0]], f[c.deps[1]] + c.offset_ghz,
                        [&](double x) { return d.t1_inv_at(c.qubit, x); });
    case ComponentKind::cz_relaxation_11:
      return trajectory(f[c.deps[0]], f[c.deps[1]] + c.offset_ghz,
                        [&](double x) { return 2.0 * d.t1_inv_at(c.qubit, x + c.eta_ghz); });
    case ComponentKind::cz_dephasing:
      return trajectory(f[c.deps[0]], f[c.deps[1]] + c.offset_ghz,
                        [&](double x) { return d.dfdphi_at(c.qubit, x); });
    case ComponentKind::cz_distortion: {
      const auto& q = d.qubits[c.qubit];
      const double excursion = std::abs(f[c.deps[1]] + c.offset_ghz - f[c.deps[0]]);
      return q.delta1 * excursion + q.delta2 * excursion * excursion;
    }
    case ComponentKind::cz_stray_cz:
      return lorentzian(f[c.deps[0]] + c.offset_ghz, f[c.deps[1]] + c.other_offset_ghz);
    case ComponentKind::cz_stray_spectator:
      return lorentzian(f[c.deps[0]] + c.offset_ghz, f[c.deps[1]]);
  }
  return 0.0;
}

void Estimator::check_complete(const std::vector<double>& f) const {
  if (f.size() != graph_.size()) {
    throw InputError("configuration has " + std::to_string(f.size()) + " values, expected " +
                     std::to_string(graph_.size()));
  }
  for (VarId v : used_vars_) {
    if (std::isnan(f[v])) throw InputError("missing value for variable " + graph_.name(v));
  }
}

double Estimator::evaluate(const std::vector<double>& f) const {
  check_complete(f);
  const std::size_t n = components_.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  const double* fp = f.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ch = 0; ch < static_cast<std::ptrdiff_t>(chunks); ++ch) {
    const std::size_t begin = static_cast<std::size_t>(ch) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += term(k, fp);
    partial[ch] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double Estimator::evaluate_serial(const std::vector<double>& f) const {
  check_complete(f);
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) total += term(k, f.data());
  return total;
}

std::vector<double> Estimator::per_gate(const std::vector<double>& f) const {
  check_complete(f);
  std::vector<double> out(graph_.size(), 0.0);
  for (std::size_t g = 0; g < graph_.size(); ++g) {
    double s = 0.0;
    for (int k : by_gate_[g]) s += term(k, f.data());
    out[g] = s;
  }
  return out;
}

std::vector<double> Estimator::per_component(const std::vector<double>& f) const {
  check_complete(f);
  std::vector<double> out(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) out[k] = term(k, f.data());
  return out;
}

IncrementalEvaluator::IncrementalEvaluator(const Estimator& e, const std::vector<double>& f)
    : e_(&e), f_(f), terms_(e.components().size()), mark_(e.components().size(), 0) {
  e.check_complete(f_);
  for (std::size_t k = 0; k < terms_.size(); ++k) terms_[k] = e.term(k, f_.data());
  resync();
}

double IncrementalEvaluator::resync() {
  total_ = 0.0;
  for (double t : terms_) total_ += t;
  return total_;
}

double IncrementalEvaluator::evaluate_delta(const std::vector<double>& f,
                                            const std::vector<VarId>& changed) {
  if (f.size() != f_.size()) throw InputError("configuration size changed");
  if (check_) {
    std::vector<char> allowed(f_.size(), 0);
    for (VarId v : changed) allowed.at(v) = 1;
    for (std::size_t v = 0; v < f_.size(); ++v) {
      const bool same = f[v] == f_[v] || (std::isnan(f[v]) && std::isnan(f_[v]));
      if (!same && !allowed[v]) {
        throw Error("stale incremental cache: variable " +
                    e_->graph().name(static_cast<VarId>(v)) + " changed but was not declared");
      }
    }
  }
  for (VarId v : changed) f_[v] = f[v];
  if (++epoch_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    epoch_ = 1;
  }
  for (VarId v : changed) {
    if (std::isnan(f_[v]) && !e_->components_of_var(v).empty()) {
      throw InputError("missing value for variable " + e_->graph().name(v));
    }
    for (int k : e_->components_of_var(v)) {
      if (mark_[k] == epoch_) continue;
      mark_[k] = epoch_;
      const double t = e_->term(k, f_.data());
      total_ += t - terms_[k];
      terms_[k] = t;
    }
  }
  return total_;
}

std::int64_t Interval::k_lo() const { return std::llround(lo / kGridStepGhz); }
std::int64_t Interval::k_hi() const { return std::llround(hi / kGridStepGhz); }

Interval subtract_zone(Interval in, double zone_lo, double zone_hi) {
  if (zone_hi < in.lo || zone_lo > in.hi) return in;
  const Interval lower{in.lo, zone_lo};
  const Interval upper{zone_hi, in.hi};
  const double wl = lower.hi - lower.lo;
  const double wu = upper.hi - upper.lo;
  if (wl < 0.0 && wu < 0.0) return Interval{1.0, 0.0};
  return wu >= wl ? upper : lower;
}

namespace {

Interval snap_inward(Interval in, const std::string& name) {
  const double step = kGridStepGhz;
  const auto k_lo = static_cast<std::int64_t>(std::ceil(in.lo / step - 1e-9));
  const auto k_hi = static_cast<std::int64_t>(std::floor(in.hi / step + 1e-9));
  if (!(in.lo <= in.hi) || k_lo > k_hi) {
    throw EmptyBoundsError("empty hard bounds for variable " + name);
  }
  return Interval{static_cast<double>(k_lo) * step, static_cast<double>(k_hi) * step};
}

}  // namespace

std::vector<Interval> hard_bounds(const CharacterizationData& data, const GateVariableGraph& graph,
                                  const BoundsOptions& options) {
  const ProcessorGraph& p = data.processor;
  if (data.qubits.size() != p.num_qubits() || graph.num_idle() != p.num_qubits() ||
      graph.size() != p.num_qubits() + p.num_couplers()) {
    throw InputError("characterization does not cover the gate-variable graph");
  }
  const double w = data.readout_exclusion_ghz;
  std::vector<Interval> out(graph.size());
  for (std::size_t q = 0; q < p.num_qubits(); ++q) {
    const auto& qc = data.qubits[q];
    Interval b{qc.f_max_ghz - options.idle_detuning_ghz, qc.f_max_ghz};
    b = subtract_zone(b, qc.readout_ghz - w, qc.readout_ghz + w);
    out[graph.idle_var(static_cast<int>(q))] =
        snap_inward(b, graph.name(graph.idle_var(static_cast<int>(q))));
  }
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const CzTrajectory& t = data.trajectories[c];
    const auto& hi = data.qubits[t.high];
    const auto& lo = data.qubits[t.low];
    const double half = 0.5 * std::abs(hi.eta_ghz);
    Interval b{0.5 * (hi.f_max_ghz + lo.f_max_ghz) - options.cz_detuning_ghz,
               std::min(hi.f_max_ghz - half, lo.f_max_ghz + half)};
    // The qubits sit at f_ij + half and f_ij - half during the gate.
    b = subtract_zone(b, hi.readout_ghz - w - half, hi.readout_ghz + w - half);
    b = subtract_zone(b, lo.readout_ghz - w + half, lo.readout_ghz + w + half);
    const VarId v = graph.interaction_var(static_cast<int>(c));
    out[v] = snap_inward(b, graph.name(v));
  }
  return out;
}

BenchmarkPrediction predict_benchmarks(const Estimator& e, const std::vector<double>& f) {
  const std::vector<double> eg = e.per_gate(f);
  const GateVariableGraph& g = e.graph();
  const ProcessorGraph& p = e.data().processor;
  BenchmarkPrediction out;
  out.untrained = !e.weights().trained;
  out.e_sq.resize(p.num_qubits());
  out.e_cz.resize(p.num_couplers());
  out.e_cycle.resize(p.num_couplers());
  for (std::size_t q = 0; q < p.num_qubits(); ++q) out.e_sq[q] = eg[g.idle_var(static_cast<int>(q))];
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    out.e_cz[c] = eg[g.interaction_var(static_cast<int>(c))];
    out.e_cycle[c] = out.e_sq[p.couplers()[c].a] + out.e_sq[p.couplers()[c].b] + out.e_cz[c];
  }
  return out;
}

namespace {

// Per-gate unweighted kernel sums split by group: row-major [gate][group].
std::vector<double> gate_features(const Estimator& e, const std::vector<double>& f) {
  e.check_complete(f);
  std::vector<double> feat(e.num_vars() * kNumGroups, 0.0);
  for (std::size_t k = 0; k < e.components().size(); ++k) {
    const auto& c = e.components()[k];
    feat[static_cast<std::size_t>(c.gate) * kNumGroups + c.group()] += e.kernel(k, f.data());
  }
  return feat;
}

}  // namespace

BenchmarkSample synthesize_benchmarks(const Estimator& truth, const std::vector<double>& config,
                                      SampleTag tag, double noise, std::mt19937_64& rng) {
  const auto feat = gate_features(truth, config);
  const GateVariableGraph& g = truth.graph();
  const ProcessorGraph& p = truth.data().processor;
  auto gate_error = [&](VarId v) {
    double s = 0.0;
    for (int k = 0; k < kNumGroups; ++k) {
      if (tag == SampleTag::isolated && is_stray(static_cast<ComponentKind>(k))) continue;
      s += truth.weights()[k] * feat[static_cast<std::size_t>(v) * kNumGroups + k];
    }
    return s;
  };
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noisy = [&](double x) {
    if (noise <= 0.0) return x;
    return x * std::max(0.0, 1.0 + noise * gauss(rng));
  };
  BenchmarkSample s;
  s.config = config;
  s.tag = tag;
  std::vector<double> sq(p.num_qubits());
  for (std::size_t q = 0; q < p.num_qubits(); ++q) sq[q] = gate_error(g.idle_var(static_cast<int>(q)));
  for (std::size_t q = 0; q < p.num_qubits(); ++q) s.e_sq.push_back(noisy(sq[q]));
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const double cyc = sq[p.couplers()[c].a] + sq[p.couplers()[c].b] +
                       gate_error(g.interaction_var(static_cast<int>(c)));
    s.e_cycle.push_back(noisy(cyc));
  }
  return s;
}

namespace {

struct Rows {
  std::vector<std::array<double, kNumGroups>> x;
  std::vector<double> y;
};

void append_rows(const Estimator& e, const BenchmarkSample& s, Rows& rows) {
  const auto feat = gate_features(e, s.config);
  const GateVariableGraph& g = e.graph();
  const ProcessorGraph& p = e.data().processor;
  if (s.e_sq.size() != p.num_qubits() || s.e_cycle.size() != p.num_couplers()) {
    throw InputError("benchmark sample does not match the processor");
  }
  auto gate_row = [&](VarId v) {
    std::array<double, kNumGroups> r{};
    for (int k = 0; k < kNumGroups; ++k) r[k] = feat[static_cast<std::size_t>(v) * kNumGroups + k];
    return r;
  };
  for (std::size_t q = 0; q < p.num_qubits(); ++q) {
    if (std::isnan(s.e_sq[q])) continue;  // not benchmarked
    rows.x.push_back(gate_row(g.idle_var(static_cast<int>(q))));
    rows.y.push_back(s.e_sq[q]);
  }
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    if (std::isnan(s.e_cycle[c])) continue;
    auto r = gate_row(g.interaction_var(static_cast<int>(c)));
    const auto ra = gate_row(g.idle_var(p.couplers()[c].a));
    const auto rb = gate_row(g.idle_var(p.couplers()[c].b));
    for (int k = 0; k < kNumGroups; ++k) r[k] += ra[k] + rb[k];
    rows.x.push_back(r);
    rows.y.push_back(s.e_cycle[c]);
  }
}

// Fits nonnegative weights for `groups` minimizing the mean absolute
// residual of y - offset - x.w over the `train` rows.
void fit_groups(const Rows& rows, const std::vector<double>& offset,
                const std::vector<std::size_t>& train, const std::vector<int>& groups,
                const TrainOptions& opt, WeightTable& weights) {
  const std::size_t ng = groups.size();
  const double n = static_cast<double>(train.size());
  std::vector<double> scale(ng, 0.0);
  double y_scale = 0.0;
  for (std::size_t r : train) {
    for (std::size_t j = 0; j < ng; ++j) scale[j] += std::abs(rows.x[r][groups[j]]) / n;
    y_scale += std::abs(rows.y[r] - offset[r]) / n;
  }
  if (y_scale == 0.0) {
    for (int g : groups) weights[g] = 0.0;
    return;
  }
  // Normalized problem: target t = (y - offset) / y_scale, features z = x / scale.
  std::vector<std::vector<double>> z(train.size(), std::vector<double>(ng));
  std::vector<double> t(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t r = train[i];
    for (std::size_t j = 0; j < ng; ++j) z[i][j] = rows.x[r][groups[j]] / scale[j];
    t[i] = (rows.y[r] - offset[r]) / y_scale;
  }
  std::vector<double> u(ng, 1.0 / static_cast<double>(ng));
  std::vector<double> m(ng, 0.0), v(ng, 0.0), grad(ng), best = u;
  double best_loss = std::numeric_limits<double>::infinity();
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-12;
  const int iters = std::max(1, opt.iterations);
  const double decay = std::log(opt.final_learning_rate / opt.learning_rate) /
                       std::max(1, iters - 1);
  for (int it = 0; it < iters; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double pred = 0.0;
      for (std::size_t j = 0; j < ng; ++j) pred += u[j] * z[i][j];
      const double res = pred - t[i];
      loss += std::abs(res);
      const double s = (res > 0.0) - (res < 0.0);
      for (std::size_t j = 0; j < ng; ++j) grad[j] += s * z[i][j];
    }
    loss /= n;
    if (loss < best_loss) {
      best_loss = loss;
      best = u;
    }
    const double lr = opt.learning_rate * std::exp(decay * it);
    const double c1 = 1.0 - std::pow(kBeta1, it + 1);
    const double c2 = 1.0 - std::pow(kBeta2, it + 1);
    for (std::size_t j = 0; j < ng; ++j) {
      const double gj = grad[j] / n;
      m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * gj;
      v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * gj * gj;
      u[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + kEps);
      u[j] = std::max(0.0, u[j]);
    }
  }
  for (std::size_t j = 0; j < ng; ++j) weights[groups[j]] = best[j] * y_scale / scale[j];
}

}  // namespace

TrainResult train_weights(const Estimator& e, const std::vector<BenchmarkSample>& samples,
                          const TrainOptions& opt) {
  if (!(opt.learning_rate > 0.0) || !(opt.final_learning_rate > 0.0) ||
      !(opt.train_fraction > 0.0 && opt.train_fraction <= 1.0)) {
    throw std::invalid_argument("invalid training options");
  }
  std::array<bool, kNumGroups> present{};
  for (const auto& c : e.components()) present[c.group()] = true;

  TrainResult result;
  result.weights = e.weights();
  result.weights.trained = true;

  std::vector<std::string> unfit;
  std::vector<double> frozen_pred;
  for (int stage = 0; stage < 2; ++stage) {
    const SampleTag tag = stage == 0 ? SampleTag::isolated : SampleTag::parallel;
    std::vector<int> groups;
    for (int g = 0; g < kNumGroups; ++g) {
      if (present[g] && is_stray(static_cast<ComponentKind>(g)) == (stage == 1)) groups.push_back(g);
    }
    if (groups.empty()) continue;
    Rows rows;
    for (const auto& s : samples) {
      if (s.tag == tag) append_rows(e, s, rows);
    }
    std::vector<std::size_t> order(rows.y.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opt.seed * 2 + static_cast<std::uint64_t>(stage));
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_train = static_cast<std::size_t>(std::llround(opt.train_fraction * order.size()));
    n_train = std::clamp<std::size_t>(n_train, std::min<std::size_t>(1, order.size()), order.size());
    std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> test(order.begin() + n_train, order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());

    std::vector<int> fit;
    for (int g : groups) {
      bool signal = false;
      for (std::size_t r : train) signal = signal || rows.x[r][g] != 0.0;
      if (signal) {
        fit.push_back(g);
      } else {
        unfit.emplace_back(group_name(g));
      }
    }
    if (!unfit.empty()) continue;

    // Earlier-stage groups contribute a fixed offset.
    std::vector<double> offset(rows.y.size(), 0.0);
    for (std::size_t r = 0; r < rows.y.size(); ++r) {
      for (int g = 0; g < kNumGroups; ++g) {
        if (std::find(groups.begin(), groups.end(), g) != groups.end()) continue;
        if (stage == 0 && is_stray(static_cast<ComponentKind>(g))) continue;
        offset[r] += result.weights[g] * rows.x[r][g];
      }
    }
    fit_groups(rows, offset, train, fit, opt, result.weights);
    result.train_rows += train.size();
    for (std::size_t r : test) {
      double pred = offset[r];
      for (int g : groups) pred += result.weights[g] * rows.x[r][g];
      result.test_predicted.push_back(pred);
      result.test_measured.push_back(rows.y[r]);
    }
  }
  if (!unfit.empty()) {
    std::string msg = "no training signal for weight groups:";
    for (const auto& u : unfit) msg += " " + u;
    throw NumericalError(msg);
  }
  return result;
}

double median(std::vector<double> v) {
  if (v.empty()) throw InputError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

AccuracyReport accuracy_report(const std::vector<double>& predicted,
                               const std::vector<double>& measured) {
  if (predicted.size() != measured.size()) {
    throw InputError("predictions and measurements are not aligned");
  }
  if (predicted.empty()) throw InputError("accuracy report needs at least one pair");
  AccuracyReport r;
  std::vector<std::pair<double, bool>> by_measured;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double inacc = std::abs(predicted[i] - measured[i]);
    r.inaccuracy.push_back(inacc);
    if (measured[i] == 0.0) {
      ++r.excluded_zero;
    } else {
      r.relative.push_back(inacc / std::abs(measured[i]));
    }
    by_measured.push_back({measured[i], measured[i] > 0.0 && inacc <= 0.5 * measured[i]});
  }
  std::sort(r.inaccuracy.begin(), r.inaccuracy.end());
  std::sort(r.relative.begin(), r.relative.end());
  r.median_inaccuracy = median(r.inaccuracy);
  if (!r.relative.empty()) r.median_relative = median(r.relative);

  std::stable_sort(by_measured.begin(), by_measured.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t best_len = 0, best_start = 0, run = 0;
  for (std::size_t i = 0; i < by_measured.size(); ++i) {
    run = by_measured[i].second ? run + 1 : 0;
    if (run > best_len) {
      best_len = run;
      best_start = i + 1 - run;
    }
  }
  if (best_len > 0) {
    r.has_trust_region = true;
    r.trust_lo = by_measured[best_start].first;
    r.trust_hi = by_measured[best_start + best_len - 1].first;
  }
  return r;
}

}  // namespace snakeopt
