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

#include "snakeopt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <utility>

namespace snakeopt {

double snap_to_grid(double ghz, double step) {
  return static_cast<double>(std::llround(ghz / step)) * step;
}

ProcessorGraph::ProcessorGraph(std::vector<Qubit> qubits,
                               const std::vector<std::array<int, 2>>& coupler_ids,
                               std::optional<int> distance)
    : qubits_(std::move(qubits)), distance_(distance) {
  std::set<std::pair<int, int>> coords;
  for (std::size_t i = 0; i < qubits_.size(); ++i) {
    if (!index_.emplace(qubits_[i].id, static_cast<int>(i)).second) {
      throw InputError("duplicate qubit id " + std::to_string(qubits_[i].id));
    }
    if (!coords.emplace(qubits_[i].x, qubits_[i].y).second) {
      throw InputError("two qubits share coordinates (" +
                       std::to_string(qubits_[i].x) + ", " +
                       std::to_string(qubits_[i].y) + ")");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& [ida, idb] : coupler_ids) {
    int a = index_of(ida);
    int b = index_of(idb);
    if (a == b) {
      throw InputError("coupler joins qubit " + std::to_string(ida) + " to itself");
    }
    if (a > b) std::swap(a, b);
    if (lattice_distance(a, b) != 1) {
      throw InputError("coupler " + std::to_string(ida) + "-" + std::to_string(idb) +
                       " does not join lattice neighbors");
    }
    if (!seen.emplace(a, b).second) {
      throw InputError("duplicate coupler " + std::to_string(ida) + "-" +
                       std::to_string(idb));
    }
  }
  for (const auto& [a, b] : seen) couplers_.push_back({a, b});

  neighbors_.assign(qubits_.size(), {});
  incident_.assign(qubits_.size(), {});
  for (std::size_t c = 0; c < couplers_.size(); ++c) {
    const auto [a, b] = couplers_[c];
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
    incident_[a].push_back(static_cast<int>(c));
    incident_[b].push_back(static_cast<int>(c));
  }
  for (auto& n : neighbors_) std::sort(n.begin(), n.end());
}

int ProcessorGraph::index_of(int qubit_id) const {
  auto it = index_.find(qubit_id);
  if (it == index_.end()) {
    throw InputError("unknown qubit id " + std::to_string(qubit_id));
  }
  return it->second;
}

int ProcessorGraph::lattice_distance(int qa, int qb) const {
  return std::abs(qubits_[qa].x - qubits_[qb].x) +
         std::abs(qubits_[qa].y - qubits_[qb].y);
}

ProcessorGraph build_surface_code_lattice(int d) {
  if (d < 1) throw std::invalid_argument("surface code distance must be >= 1");
  // Data qubit (i, j) and measure plaquette (a, b) live on a diagonal grid;
  // (u, v) = (sum, difference) rotates it onto the square lattice.
  std::vector<Qubit> qubits;
  std::map<std::pair<int, int>, int> data_id;
  int next = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      data_id[{i, j}] = next;
      qubits.push_back({next++, i + j + 1, i - j + d});
    }
  }
  auto has_plaquette = [d](int a, int b) {
    const bool interior = a >= 1 && a <= d - 1 && b >= 1 && b <= d - 1;
    if (interior) return true;
    const bool corner = (a == 0 || a == d) && (b == 0 || b == d);
    if (corner) return false;
    // X-type boundaries on top/bottom, Z-type on left/right.
    if (b == 0 || b == d) return (a + b) % 2 == 0;
    if (a == 0 || a == d) return (a + b) % 2 == 1;
    return false;
  };
  std::vector<std::array<int, 2>> couplers;
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; b <= d; ++b) {
      if (!has_plaquette(a, b)) continue;
      const int id = next++;
      qubits.push_back({id, a + b, a - b + d});
      for (int i : {a - 1, a}) {
        for (int j : {b - 1, b}) {
          if (i < 0 || j < 0 || i >= d || j >= d) continue;
          couplers.push_back({data_id.at({i, j}), id});
        }
      }
    }
  }
  return ProcessorGraph(std::move(qubits), couplers, d);
}

ProcessorGraph sycamore_like_68() {
  static constexpr std::array<std::array<int, 2>, 68> kCoords = {{
      {0, 5},  {1, 3},  {1, 4},  {1, 5},  {2, 2},  {2, 3},  {2, 4},  {2, 7},
      {3, 2},  {3, 3},  {3, 4},  {3, 5},  {3, 6},  {3, 7},  {3, 8},  {4, 0},
      {4, 1},  {4, 2},  {4, 3},  {4, 4},  {4, 5},  {4, 6},  {4, 7},  {4, 8},
      {5, 0},  {5, 1},  {5, 2},  {5, 3},  {5, 4},  {5, 5},  {5, 6},  {5, 7},
      {5, 8},  {5, 9},  {6, 2},  {6, 3},  {6, 4},  {6, 5},  {6, 6},  {6, 7},
      {6, 8},  {6, 9},  {6, 10}, {7, 4},  {7, 5},  {7, 6},  {7, 7},  {7, 8},
      {7, 9},  {7, 10}, {7, 11}, {8, 3},  {8, 4},  {8, 5},  {8, 6},  {8, 7},
      {8, 8},  {8, 9},  {9, 4},  {9, 5},  {9, 6},  {9, 7},  {9, 8},  {9, 9},
      {10, 6}, {10, 7}, {10, 8}, {11, 7},
  }};
  std::vector<Qubit> qubits;
  std::map<std::pair<int, int>, int> at;
  for (std::size_t i = 0; i < kCoords.size(); ++i) {
    qubits.push_back({static_cast<int>(i), kCoords[i][0], kCoords[i][1]});
    at[{kCoords[i][0], kCoords[i][1]}] = static_cast<int>(i);
  }
  std::vector<std::array<int, 2>> couplers;
  for (const auto& q : qubits) {
    for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
      auto it = at.find({q.x + dx, q.y + dy});
      if (it != at.end()) couplers.push_back({q.id, it->second});
    }
  }
  return ProcessorGraph(std::move(qubits), couplers);
}

ProcessorGraph subgraph(const ProcessorGraph& p, const std::set<int>& qubit_ids) {
  std::vector<Qubit> qubits;
  for (int id : qubit_ids) qubits.push_back(p.qubits()[p.index_of(id)]);
  std::vector<std::array<int, 2>> couplers;
  for (const auto& c : p.couplers()) {
    const int ida = p.qubits()[c.a].id;
    const int idb = p.qubits()[c.b].id;
    if (qubit_ids.count(ida) && qubit_ids.count(idb)) couplers.push_back({ida, idb});
  }
  std::optional<int> distance;
  if (qubit_ids.size() == p.num_qubits()) distance = p.distance();
  return ProcessorGraph(std::move(qubits), couplers, distance);
}

GateVariableGraph::GateVariableGraph(const ProcessorGraph& p)
    : num_idle_(p.num_qubits()) {
  const std::size_t n = p.num_qubits();
  const std::size_t total = n + p.num_couplers();
  vars_.resize(total);
  adjacency_.assign(total, {});
  incidence_.assign(total, {});
  names_.resize(total);

  for (std::size_t q = 0; q < n; ++q) {
    vars_[q] = {VarKind::idle, {static_cast<int>(q)}, -1};
    names_[q] = "q" + std::to_string(p.qubits()[q].id);
  }
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const auto [a, b] = p.couplers()[c];
    const VarId v = interaction_var(static_cast<int>(c));
    vars_[v] = {VarKind::interaction, {a, b}, static_cast<int>(c)};
    names_[v] = "q" + std::to_string(p.qubits()[a].id) + "-q" +
                std::to_string(p.qubits()[b].id);
    incidence_[v] = {idle_var(a), idle_var(b)};
    incidence_[idle_var(a)].push_back(v);
    incidence_[idle_var(b)].push_back(v);
  }

  for (std::size_t q = 0; q < n; ++q) {
    auto& adj = adjacency_[q];
    for (int nb : p.neighbors(static_cast<int>(q))) adj.push_back(idle_var(nb));
    for (int c : p.incident_couplers(static_cast<int>(q))) adj.push_back(interaction_var(c));
  }
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const auto [a, b] = p.couplers()[c];
    const VarId v = interaction_var(static_cast<int>(c));
    auto& adj = adjacency_[v];
    adj.push_back(idle_var(a));
    adj.push_back(idle_var(b));
    for (int q : {a, b}) {
      for (int oc : p.incident_couplers(q)) {
        if (oc != static_cast<int>(c)) adj.push_back(interaction_var(oc));
      }
    }
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (auto& inc : incidence_) std::sort(inc.begin(), inc.end());
  for (std::size_t v = 0; v < total; ++v) by_name_[names_[v]] = static_cast<VarId>(v);
}

VarId GateVariableGraph::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw InputError("unknown variable '" + name + "'");
  return it->second;
}

GateVariableGraph build_gate_variable_graph(const ProcessorGraph& p) {
  return GateVariableGraph(p);
}

LayerColoring color_cz_layers(const ProcessorGraph& p) {
  for (std::size_t q = 0; q < p.num_qubits(); ++q) {
    if (p.neighbors(static_cast<int>(q)).size() > 4) {
      throw std::invalid_argument("qubit " + std::to_string(p.qubits()[q].id) +
                                  " has degree > 4; CZ layer coloring needs a lattice");
    }
  }
  LayerColoring out;
  out.layer_of.resize(p.num_couplers());
  auto parity = [](int v) { return ((v % 2) + 2) % 2; };
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const Qubit& qa = p.qubits()[p.couplers()[c].a];
    const Qubit& qb = p.qubits()[p.couplers()[c].b];
    int layer;
    if (qa.y == qb.y) {
      layer = parity(std::min(qa.x, qb.x));
    } else {
      layer = 2 + parity(std::min(qa.y, qb.y));
    }
    out.layers[layer].push_back(static_cast<int>(c));
    out.layer_of[c] = layer;
  }
  return out;
}

}  // namespace snakeopt
