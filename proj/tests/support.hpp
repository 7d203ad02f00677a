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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "snakeopt/estimator.hpp"
#include "snakeopt/genmodel.hpp"
#include "snakeopt/snake.hpp"
#include "snakeopt/topology.hpp"

#ifndef SNAKEOPT_DATA_DIR
#error "SNAKEOPT_DATA_DIR must be defined by the build"
#endif

namespace snakeopt::testing {

inline std::string data_path(const std::string& rel) {
  return std::string(SNAKEOPT_DATA_DIR) + "/" + rel;
}

inline std::shared_ptr<const CharacterizationData> make_data(const ProcessorGraph& p,
                                                             std::uint64_t seed,
                                                             GenerativeSpec spec = {}) {
  spec.seed = seed;
  return std::make_shared<const CharacterizationData>(generate_processor(spec, p));
}

inline std::shared_ptr<const CharacterizationData> lattice_data(int d, std::uint64_t seed) {
  return make_data(build_surface_code_lattice(d), seed);
}

/// Uniform grid point inside every interval.
inline std::vector<double> random_config(const std::vector<Interval>& bounds, std::mt19937_64& rng) {
  std::vector<double> f(bounds.size());
  for (std::size_t v = 0; v < bounds.size(); ++v) {
    std::uniform_int_distribution<std::int64_t> u(0, bounds[v].points() - 1);
    f[v] = bounds[v].at(u(rng));
  }
  return f;
}

/// Hop distances in the incidence graph, recomputed from qubit supports:
/// an idle and an interaction are one hop apart when the idle's qubit is in
/// the interaction's support.
inline std::vector<int> incidence_distances(const GateVariableGraph& g, VarId from) {
  const std::size_t n = g.size();
  auto linked = [&](VarId a, VarId b) {
    if (g.is_idle(a) == g.is_idle(b)) return false;
    const VarId idle = g.is_idle(a) ? a : b;
    const VarId inter = g.is_idle(a) ? b : a;
    const auto& s = g.var(inter).support;
    return std::find(s.begin(), s.end(), g.var(idle).support[0]) != s.end();
  };
  std::vector<int> dist(n, -1);
  dist[from] = 0;
  std::vector<VarId> frontier{from};
  while (!frontier.empty()) {
    std::vector<VarId> next;
    for (VarId u : frontier) {
      for (VarId v = 0; v < static_cast<VarId>(n); ++v) {
        if (dist[v] < 0 && linked(u, v)) {
          dist[v] = dist[u] + 1;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

/// Components that touch `fs` and depend only on `fs` or assigned variables.
inline std::vector<int> containment_filter(const Estimator& e, const std::vector<VarId>& fs,
                                           const std::vector<char>& assigned) {
  const std::set<VarId> in(fs.begin(), fs.end());
  std::vector<int> out;
  for (std::size_t k = 0; k < e.components().size(); ++k) {
    const auto& c = e.components()[k];
    bool touches = false, contained = true;
    for (int d = 0; d < c.n_deps; ++d) {
      const VarId v = c.deps[d];
      if (in.count(v)) {
        touches = true;
      } else if (!assigned[v]) {
        contained = false;
      }
    }
    if (touches && contained) out.push_back(static_cast<int>(k));
  }
  return out;
}

/// Plain component-order sum of weighted terms.
inline double brute_energy(const Estimator& e, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < e.components().size(); ++k) s += e.term(k, f.data());
  return s;
}

/// Small instance for exhaustive comparisons: a short chain of qubits whose
/// interval bounds overlap so that stray collisions couple the variables.
struct ToyInstance {
  Estimator estimator;
  std::vector<Interval> bounds;
};

inline ToyInstance make_toy(std::uint64_t seed, int qubits, int points_per_var) {
  std::vector<Qubit> q;
  std::vector<std::array<int, 2>> c;
  for (int i = 0; i < qubits; ++i) {
    q.push_back({i, i, 0});
    if (i > 0) c.push_back({i - 1, i});
  }
  ProcessorGraph p(q, c);
  GenerativeSpec spec;
  spec.chi_nn_sd_mhz = 6.0;
  spec.chi_nnn_sd_mhz = 4.0;
  spec.tls_density_per_ghz = 20.0;
  spec.fmax_sd_ghz = 0.005;
  spec.readout_mean_ghz = 4.0;
  auto data = make_data(p, seed, spec);
  WeightTable w = WeightTable::defaults();
  Estimator e = build_estimator(data, kAllMechanisms, w);
  std::mt19937_64 rng(seed * 7919 + 1);
  std::vector<Interval> b(e.num_vars());
  const double span = (points_per_var - 1) * kGridStepGhz;
  for (VarId v = 0; v < static_cast<VarId>(e.num_vars()); ++v) {
    const double centre = e.graph().is_idle(v) ? 5.96 : 5.90;
    std::uniform_int_distribution<int> off(-8, 8);
    const double lo = snap_to_grid(centre + off(rng) * kGridStepGhz - span / 2);
    b[v] = Interval{lo, snap_to_grid(lo + span)};
  }
  return {std::move(e), std::move(b)};
}

/// Exhaustive minimum of the full estimator over every grid combination;
/// ties keep the lexicographically smallest point (first variable outermost).
inline std::vector<double> brute_force_optimum(const Estimator& e, const std::vector<Interval>& b,
                                               double* best_out = nullptr) {
  const std::size_t n = b.size();
  std::vector<std::int64_t> idx(n, 0);
  std::vector<double> f(n), best_f;
  double best = INFINITY;
  while (true) {
    for (std::size_t j = 0; j < n; ++j) f[j] = b[j].at(idx[j]);
    const double val = brute_energy(e, f);
    if (val < best) {
      best = val;
      best_f = f;
    }
    std::size_t j = n;
    while (j > 0) {
      --j;
      if (++idx[j] < b[j].points()) break;
      idx[j] = 0;
      if (j == 0) {
        if (best_out) *best_out = best;
        return best_f;
      }
    }
  }
}

}  // namespace snakeopt::testing
