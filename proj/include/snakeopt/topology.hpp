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

#include <array>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "snakeopt/common.hpp"

namespace snakeopt {

struct Qubit {
  int id = 0;
  int x = 0;
  int y = 0;
  bool operator==(const Qubit&) const = default;
};

/// Coupler between two qubits, stored by qubit *index* (position in
/// ProcessorGraph::qubits()), with a < b.
struct Coupler {
  int a = 0;
  int b = 0;
  bool operator==(const Coupler&) const = default;
};

/// Qubits on integer lattice coordinates joined by nearest-neighbor couplers.
///
/// Invariants (checked on construction): qubit ids and coordinates are
/// unique, every coupler joins two distinct known qubits at Manhattan
/// distance 1, and no pair is coupled twice. Couplers are kept sorted.
class ProcessorGraph {
 public:
  ProcessorGraph() = default;

  /// `couplers` are given as pairs of qubit *ids*.
  ProcessorGraph(std::vector<Qubit> qubits,
                 const std::vector<std::array<int, 2>>& coupler_ids,
                 std::optional<int> distance = std::nullopt);

  const std::vector<Qubit>& qubits() const { return qubits_; }
  const std::vector<Coupler>& couplers() const { return couplers_; }
  std::optional<int> distance() const { return distance_; }

  std::size_t num_qubits() const { return qubits_.size(); }
  std::size_t num_couplers() const { return couplers_.size(); }

  /// Throws InputError for unknown ids.
  int index_of(int qubit_id) const;
  bool contains(int qubit_id) const { return index_.count(qubit_id) != 0; }

  /// Qubit indices coupled to `qubit_index`, ascending.
  const std::vector<int>& neighbors(int qubit_index) const {
    return neighbors_[qubit_index];
  }
  /// Coupler indices touching `qubit_index`, ascending.
  const std::vector<int>& incident_couplers(int qubit_index) const {
    return incident_[qubit_index];
  }

  /// Lattice (Manhattan) distance between two qubits' coordinates.
  int lattice_distance(int qa, int qb) const;

  bool operator==(const ProcessorGraph& other) const {
    return qubits_ == other.qubits_ && couplers_ == other.couplers_ &&
           distance_ == other.distance_;
  }

 private:
  std::vector<Qubit> qubits_;
  std::vector<Coupler> couplers_;
  std::optional<int> distance_;
  std::unordered_map<int, int> index_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
};

/// Rotated surface-code layout with N = 2d^2 - 1 qubits: d^2 data qubits and
/// d^2 - 1 measure qubits, expressed on a square lattice (the diagonal grid
/// rotated by 45 degrees) so that every coupler has Manhattan length 1.
ProcessorGraph build_surface_code_lattice(int d);

/// A 68-qubit, 109-coupler irregular diagonal-grid processor resembling the
/// Sycamore-class chips. Same graph as data/sycamore68.json.
ProcessorGraph sycamore_like_68();

/// Induced subgraph on `qubit_ids`. Throws InputError on unknown ids.
ProcessorGraph subgraph(const ProcessorGraph& p, const std::set<int>& qubit_ids);

enum class VarKind { idle, interaction };

struct GateVariable {
  VarKind kind = VarKind::idle;
  /// Qubit indices this variable acts on: {i} for idles, {a, b} for
  /// interactions.
  std::vector<int> support;
  /// Coupler index for interaction variables, -1 otherwise.
  int coupler = -1;
};

/// One idle variable f_i per qubit and one interaction variable f_ij per
/// coupler. Idle variables occupy ids [0, N), interactions [N, N + C).
class GateVariableGraph {
 public:
  GateVariableGraph() = default;
  explicit GateVariableGraph(const ProcessorGraph& p);

  std::size_t size() const { return vars_.size(); }
  std::size_t num_idle() const { return num_idle_; }
  const GateVariable& var(VarId v) const { return vars_[v]; }
  bool is_idle(VarId v) const { return vars_[v].kind == VarKind::idle; }

  VarId idle_var(int qubit_index) const { return qubit_index; }
  VarId interaction_var(int coupler_index) const {
    return static_cast<VarId>(num_idle_) + coupler_index;
  }

  /// Variables sharing a qubit with `v` or joined to it by a coupler, sorted.
  const std::vector<VarId>& adjacency(VarId v) const { return adjacency_[v]; }

  /// Incidence neighbors: an idle variable touches the interaction variables
  /// of its couplers, and an interaction touches its two idles. Hop distance
  /// in this graph is the scope metric.
  const std::vector<VarId>& incidence(VarId v) const { return incidence_[v]; }

  /// Human-readable ids ("q3", "q3-q7") built from qubit ids.
  const std::string& name(VarId v) const { return names_[v]; }
  /// Throws InputError for unknown names.
  VarId find(const std::string& name) const;

 private:
  std::vector<GateVariable> vars_;
  std::size_t num_idle_ = 0;
  std::vector<std::vector<VarId>> adjacency_;
  std::vector<std::vector<VarId>> incidence_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, VarId> by_name_;
};

GateVariableGraph build_gate_variable_graph(const ProcessorGraph& p);

/// Four disjoint CZ layers (coupler indices): horizontal-even,
/// horizontal-odd, vertical-even, vertical-odd. Parity is taken on the lower
/// coordinate along the coupler's axis, so no qubit appears twice per layer.
struct LayerColoring {
  std::array<std::vector<int>, 4> layers;
  /// layer_of[c] = layer index of coupler c.
  std::vector<int> layer_of;
};

/// Throws std::invalid_argument if any qubit has degree > 4.
LayerColoring color_cz_layers(const ProcessorGraph& p);

}  // namespace snakeopt
