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
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "snakeopt/common.hpp"
#include "snakeopt/genmodel.hpp"
#include "snakeopt/topology.hpp"

namespace snakeopt {

/// Mitigation flags select which physical mechanisms the estimator models.
enum Mechanism : unsigned {
  kRelaxation = 1u << 0,
  kDephasing = 1u << 1,
  kStrayCoupling = 1u << 2,
  kPulseDistortion = 1u << 3,
};
inline constexpr unsigned kAllMechanisms =
    kRelaxation | kDephasing | kStrayCoupling | kPulseDistortion;

/// "relaxation", "dephasing", "stray_coupling", "pulse_distortion".
/// Throws InputError on unknown names.
unsigned parse_mechanisms(const std::vector<std::string>& names);
std::vector<std::string> mechanism_names(unsigned flags);

/// Component kinds double as tied weight groups: every component of a kind
/// shares one trainable weight.
enum class ComponentKind : std::uint8_t {
  sq_relaxation,
  sq_dephasing,
  sq_stray,
  cz_relaxation,
  cz_relaxation_11,
  cz_dephasing,
  cz_distortion,
  cz_stray_cz,
  cz_stray_spectator,
};
inline constexpr int kNumGroups = 9;

const char* group_name(int group);
/// Throws InputError for unknown names.
int group_index(const std::string& name);
Mechanism mechanism_of(ComponentKind kind);
bool is_stray(ComponentKind kind);

/// Unweighted error kernel of one gate and mechanism. `deps[0]` is the
/// owning gate's own variable (idle for SQ kinds, interaction for CZ
/// kinds, except CZ single-qubit kinds where it is the qubit's idle), and
/// `deps[1]` the second variable when `n_deps == 2`.
struct ErrorComponent {
  ComponentKind kind = ComponentKind::sq_relaxation;
  std::uint8_t n_deps = 1;
  /// Stray kinds: bit 1 selects the owner's 1-2 transition, bit 0 the partner's.
  std::uint8_t channel = 0;
  std::array<VarId, 2> deps{{-1, -1}};
  VarId gate = -1;   // gate variable owning this error (SQ_i or CZ_ij)
  int qubit = -1;    // qubit the kernel is evaluated for
  int other = -1;    // partner qubit of stray kinds
  int coupler = -1;  // CZ kinds: coupler index of the owning gate
  double offset_ghz = 0.0;        // CZ kinds: qubit frequency = f_ij + offset
  double other_offset_ghz = 0.0;  // CZ-CZ stray: partner frequency = f_kl + offset
  double chi_ghz = 0.0;
  double eta_ghz = 0.0;
  double other_eta_ghz = 0.0;

  int group() const { return static_cast<int>(kind); }
  bool depends_on(VarId v) const {
    return deps[0] == v || (n_deps == 2 && deps[1] == v);
  }
};

struct WeightTable {
  std::array<double, kNumGroups> w{};
  /// False for the built-in defaults; set by training and by loading a file.
  bool trained = false;

  /// Built-in defaults used to generate simulated benchmarks.
  static WeightTable defaults();
  static WeightTable zeros();
  double operator[](int g) const { return w[g]; }
  double& operator[](int g) { return w[g]; }
};

/// Emits the component list for a processor. Stray components cover gates
/// that run concurrently in the four-layer CZ benchmark unless
/// `arbitrary_algorithm` is set, which emits every parasitic combination.
std::vector<ErrorComponent> build_components(const GateVariableGraph& graph,
                                             const CharacterizationData& data,
                                             const LayerColoring& layers, unsigned flags,
                                             bool arbitrary_algorithm = false);

/// Weighted sum of error components over a frequency configuration stored as
/// a dense vector indexed by VarId (NaN marks an unset variable).
class Estimator {
 public:
  Estimator() = default;
  Estimator(std::shared_ptr<const CharacterizationData> data, GateVariableGraph graph,
            std::vector<ErrorComponent> components, WeightTable weights, unsigned flags);

  const CharacterizationData& data() const { return *data_; }
  std::shared_ptr<const CharacterizationData> data_ptr() const { return data_; }
  const GateVariableGraph& graph() const { return graph_; }
  const std::vector<ErrorComponent>& components() const { return components_; }
  const WeightTable& weights() const { return weights_; }
  void set_weights(const WeightTable& w) { weights_ = w; }
  unsigned flags() const { return flags_; }
  std::size_t num_vars() const { return graph_.size(); }

  /// Components depending on variable v (the inverse of the dependency sets).
  const std::vector<int>& components_of_var(VarId v) const { return by_var_[v]; }
  /// Components owned by gate variable g.
  const std::vector<int>& components_of_gate(VarId g) const { return by_gate_[g]; }

  double kernel(std::size_t k, const double* f) const;
  double term(std::size_t k, const double* f) const {
    return weights_.w[components_[k].group()] * kernel(k, f);
  }

  /// OpenMP evaluation: fixed-size chunks reduced in chunk order, so the
  /// result does not depend on the thread count.
  double evaluate(const std::vector<double>& f) const;
  /// Single-threaded reference: plain sum in component order.
  double evaluate_serial(const std::vector<double>& f) const;
  /// E_g for every gate variable (0 for gates without components).
  std::vector<double> per_gate(const std::vector<double>& f) const;
  /// Weighted value of every component.
  std::vector<double> per_component(const std::vector<double>& f) const;

  /// Throws InputError when f has the wrong size or leaves a dependency unset.
  void check_complete(const std::vector<double>& f) const;

  static constexpr std::size_t kChunk = 1024;

 private:
  std::shared_ptr<const CharacterizationData> data_;
  GateVariableGraph graph_;
  std::vector<ErrorComponent> components_;
  WeightTable weights_;
  unsigned flags_ = 0;
  std::vector<std::vector<int>> by_var_;
  std::vector<std::vector<int>> by_gate_;
  std::vector<VarId> used_vars_;
};

/// Builds the gate-variable graph, layer coloring and components for `data`.
Estimator build_estimator(std::shared_ptr<const CharacterizationData> data, unsigned flags,
                          const WeightTable& weights, bool arbitrary_algorithm = false);

/// Caches per-component terms so that changing a few variables only
/// recomputes the components indexed by them.
class IncrementalEvaluator {
 public:
  IncrementalEvaluator(const Estimator& e, const std::vector<double>& f);

  double total() const { return total_; }
  const std::vector<double>& values() const { return f_; }

  /// Applies `f`, which must differ from the cached configuration only in
  /// `changed`; throws Error (stale cache) otherwise when checking is on.
  double evaluate_delta(const std::vector<double>& f, const std::vector<VarId>& changed);
  /// Recomputes the total from cached terms in component order.
  double resync();
  void set_stale_check(bool on) { check_ = on; }

 private:
  const Estimator* e_;
  std::vector<double> f_;
  std::vector<double> terms_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  double total_ = 0.0;
  bool check_ = true;
};

/// Closed frequency interval on the 2 MHz grid.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t k_lo() const;
  std::int64_t k_hi() const;
  /// Number of grid points.
  std::int64_t points() const { return k_hi() - k_lo() + 1; }
  double at(std::int64_t t) const { return static_cast<double>(k_lo() + t) * kGridStepGhz; }
};

class EmptyBoundsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct BoundsOptions {
  double idle_detuning_ghz = 0.45;
  double cz_detuning_ghz = 0.74;
};

/// Removes [zone_lo, zone_hi] from `in`, keeping the larger remaining piece
/// (the upper one on ties). Returns `in` unchanged when they do not overlap.
Interval subtract_zone(Interval in, double zone_lo, double zone_hi);

/// Idle: [f_max - idle_detuning, f_max]; interaction: [mean f_max -
/// cz_detuning, highest point both qubits can reach]; both minus readout
/// exclusion zones and snapped inward to the grid.
std::vector<Interval> hard_bounds(const CharacterizationData& data, const GateVariableGraph& graph,
                                  const BoundsOptions& options = {});

struct BenchmarkPrediction {
  std::vector<double> e_sq;     // per qubit index
  std::vector<double> e_cycle;  // per coupler index
  std::vector<double> e_cz;     // per coupler index
  bool untrained = false;
};

BenchmarkPrediction predict_benchmarks(const Estimator& e, const std::vector<double>& f);

enum class SampleTag { isolated, parallel };

struct BenchmarkSample {
  std::vector<double> config;
  std::vector<double> e_sq;
  std::vector<double> e_cycle;
  SampleTag tag = SampleTag::parallel;
};

/// Benchmarks generated by the estimator itself: isolated samples omit stray
/// components. Multiplicative Gaussian noise of relative size `noise`.
BenchmarkSample synthesize_benchmarks(const Estimator& truth, const std::vector<double>& config,
                                      SampleTag tag, double noise, std::mt19937_64& rng);

struct TrainOptions {
  int iterations = 4000;
  double learning_rate = 0.05;
  double final_learning_rate = 1e-5;
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
};

struct TrainResult {
  WeightTable weights;
  std::vector<double> test_predicted;
  std::vector<double> test_measured;
  std::size_t train_rows = 0;
};

/// Two-stage fit: relaxation, dephasing and distortion groups on isolated
/// samples, then stray groups on parallel samples with the first stage
/// frozen. Full-batch Adam on mean absolute error; weights kept >= 0.
/// Throws NumericalError listing groups without training signal.
TrainResult train_weights(const Estimator& e, const std::vector<BenchmarkSample>& samples,
                          const TrainOptions& options = {});

struct AccuracyReport {
  std::vector<double> inaccuracy;  // sorted
  std::vector<double> relative;    // sorted, zero measurements excluded
  std::size_t excluded_zero = 0;
  double median_inaccuracy = 0.0;
  double median_relative = 0.0;
  double trust_lo = 0.0;
  double trust_hi = 0.0;
  bool has_trust_region = false;
};

/// Trust region: the widest run of measured values (sorted) over which
/// every prediction is within half of the measurement.
AccuracyReport accuracy_report(const std::vector<double>& predicted,
                               const std::vector<double>& measured);

double median(std::vector<double> v);

}  // namespace snakeopt
