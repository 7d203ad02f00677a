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

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "snakeopt/estimator.hpp"

namespace snakeopt {

/// Scope sentinel: optimize every remaining variable jointly.
inline constexpr int kGlobalScope = std::numeric_limits<int>::max();

enum class TraversalRule { nn, nnn, arb };
enum class TraversalHeuristic { bfs, dfs, rnd };
enum class InnerSolverKind { automatic, exhaustive, stochastic };

struct InnerSolver {
  /// automatic: exhaustive below three dimensions, differential evolution otherwise.
  InnerSolverKind kind = InnerSolverKind::automatic;
  std::int64_t budget = 2000;  // objective evaluations per stochastic solve
  int population = 0;          // 0 picks max(10, 15 * dims)
  double mutation = 0.6;
  double crossover = 0.9;
};

struct SnakeParams {
  int scope = 2;
  /// Number of starting variables; 0 starts from every variable. Fewer than
  /// all are drawn from the interaction variables when there are enough.
  int seeds = 1;
  TraversalRule rule = TraversalRule::arb;
  TraversalHeuristic heuristic = TraversalHeuristic::bfs;
  InnerSolver solver;
  /// Stochastic budget for global-scope solves; 0 uses solver.budget.
  std::int64_t global_budget = 0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument (scope < 1, NN/NNN with scope > 3, ...).
  void validate() const;
};

std::string to_string(TraversalRule r);
std::string to_string(TraversalHeuristic h);
/// Throw InputError on unknown names.
TraversalRule parse_rule(const std::string& s);
TraversalHeuristic parse_heuristic(const std::string& s);

struct TraceStep {
  VarId center = -1;
  std::vector<VarId> vars;
  double value = 0.0;  // restricted objective at the accepted solution
  std::int64_t evaluations = 0;
  double seconds = 0.0;
};

struct SnakeResult {
  std::vector<double> values;  // NaN for variables outside the run
  double energy = 0.0;         // sum of components whose dependencies are all set
  VarId start = -1;
  std::vector<TraceStep> trace;
  double seconds = 0.0;
};

/// Pending variables within incidence-graph distance < scope of `center`,
/// ascending. The center is included when pending.
std::vector<VarId> neighborhood(const GateVariableGraph& graph, const std::vector<char>& pending,
                                VarId center, int scope);

/// Restricted objective: components touching `fs` whose dependencies all lie
/// in `fs` or among `assigned` variables. Component ids ascending.
struct SubProblem {
  std::vector<VarId> vars;
  std::vector<int> components;
};
SubProblem build_snake_estimator(const Estimator& e, const std::vector<VarId>& fs,
                                 const std::vector<char>& assigned);

struct InnerResult {
  std::vector<double> x;  // frequencies of sp.vars
  double value = 0.0;
  std::int64_t evaluations = 0;
};

/// Minimizes the restricted objective over the grid points of `bounds`.
/// `work` supplies constants for assigned variables and is left holding the
/// solution. Exhaustive search breaks ties towards the lowest frequencies
/// (lexicographically, first variable outermost). `warm` seeds the
/// stochastic population.
InnerResult inner_solve(const Estimator& e, const SubProblem& sp, std::vector<double>& work,
                        const std::vector<Interval>& bounds, const InnerSolver& solver,
                        std::uint64_t seed, const std::vector<double>* warm = nullptr,
                        std::int64_t budget_override = 0);

/// Full Snake run over every variable. Multi-seed runs return the result
/// with the lowest energy (ties: lowest starting variable).
SnakeResult optimize(const Estimator& e, const std::vector<Interval>& bounds,
                     const SnakeParams& params, bool parallel = true);

/// Snake run over `subset` only; other variables stay unset, so components
/// reaching outside the subset are ignored.
SnakeResult optimize_subset(const Estimator& e, const std::vector<Interval>& bounds,
                            const SnakeParams& params, const std::vector<VarId>& subset,
                            bool parallel = true);

/// Targets plus every interaction variable hinged on an idle target, ascending.
std::vector<VarId> heal_closure(const GateVariableGraph& graph, const std::vector<VarId>& targets);

/// Re-optimizes the closure of `targets` by a Snake pass with all other
/// variables held at their current values. Each step starts from the
/// current values and never accepts a worse block, so E does not increase.
SnakeResult heal(const Estimator& e, const std::vector<Interval>& bounds,
                 const std::vector<double>& config, const std::vector<VarId>& targets,
                 const SnakeParams& params);

struct HealThresholds {
  double cycle = 1.5e-2;
  double sq = 1.5e-3;
};

/// Interactions of outlier pairs, plus idles that are outliers themselves or
/// sit in two or more outlier pairs. Ascending.
std::vector<VarId> select_heal_targets(const BenchmarkPrediction& prediction,
                                       const GateVariableGraph& graph,
                                       const ProcessorGraph& processor,
                                       const HealThresholds& thresholds = {});

struct StitchPlan {
  std::vector<std::vector<VarId>> regions;
  std::vector<VarId> seam;
};

/// R strips of qubits ordered by x (then y), balanced by qubit count. An
/// interaction variable joins the region of its lower-index qubit.
StitchPlan make_stitch_plan(const Estimator& e, int regions);

/// Variables of components whose dependencies span more than one region.
std::vector<VarId> seam_variables(const Estimator& e,
                                  const std::vector<std::vector<VarId>>& regions);

/// Throws InputError when regions overlap or miss a variable.
void validate_plan(const StitchPlan& plan, std::size_t num_vars);

struct StitchResult {
  std::vector<double> values;
  double energy = 0.0;
  std::vector<SnakeResult> regions;
  SnakeResult seam;
  std::vector<double> region_seconds;
  double seam_seconds = 0.0;
};

StitchResult stitch(const Estimator& e, const std::vector<Interval>& bounds,
                    const StitchPlan& plan, const SnakeParams& params, bool parallel = true);

/// Deterministic 64-bit mixing used to derive per-step generator seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace snakeopt
