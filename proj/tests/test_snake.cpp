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

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "snakeopt/snake.hpp"
#include "support.hpp"

namespace snakeopt {
namespace {

using testing::random_config;

struct Fixture {
  Estimator e;
  std::vector<Interval> b;
};

Fixture lattice_fixture(int d, std::uint64_t seed) {
  Estimator e = build_estimator(testing::lattice_data(d, seed), kAllMechanisms,
                                WeightTable::defaults());
  auto b = hard_bounds(e.data(), e.graph());
  return {std::move(e), std::move(b)};
}

TEST(Params, Validation) {
  SnakeParams p;
  EXPECT_NO_THROW(p.validate());
  p.scope = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.scope = 4;
  p.rule = TraversalRule::nn;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.rule = TraversalRule::arb;
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(parse_rule(to_string(TraversalRule::nnn)), TraversalRule::nnn);
  EXPECT_EQ(parse_heuristic(to_string(TraversalHeuristic::dfs)), TraversalHeuristic::dfs);
  EXPECT_THROW(parse_rule("XYZ"), InputError);
}

TEST(Neighborhood, ScopeOneIsTheCentre) {
  const GateVariableGraph g(build_surface_code_lattice(5));
  const std::vector<char> pending(g.size(), 1);
  for (VarId v = 0; v < static_cast<VarId>(g.size()); ++v) {
    EXPECT_EQ(neighborhood(g, pending, v, 1), std::vector<VarId>{v});
  }
}

TEST(Neighborhood, GlobalScopeIsEveryPendingVariable) {
  const GateVariableGraph g(build_surface_code_lattice(3));
  std::vector<char> pending(g.size(), 1);
  pending[4] = pending[20] = 0;
  std::vector<VarId> oracle;
  for (VarId v = 0; v < static_cast<VarId>(g.size()); ++v) {
    if (pending[v]) oracle.push_back(v);
  }
  EXPECT_EQ(neighborhood(g, pending, 0, kGlobalScope), oracle);
}

TEST(Neighborhood, MatchesBruteForceDistances) {
  const ProcessorGraph p = build_surface_code_lattice(5);
  const GateVariableGraph g(p);
  std::mt19937_64 rng(1);
  for (int scope : {2, 3, 4}) {
    for (VarId c = 0; c < static_cast<VarId>(g.size()); ++c) {
      std::vector<char> pending(g.size());
      for (auto& x : pending) x = (rng() % 4) != 0;
      const auto dist = testing::incidence_distances(g, c);
      std::vector<VarId> oracle;
      for (VarId v = 0; v < static_cast<VarId>(g.size()); ++v) {
        if (pending[v] && dist[v] >= 0 && dist[v] < scope) oracle.push_back(v);
      }
      EXPECT_EQ(neighborhood(g, pending, c, scope), oracle);
    }
  }
}

TEST(Neighborhood, ScopeTwoOnInteriorIdleHasFiveVariables) {
  const ProcessorGraph p = build_surface_code_lattice(5);
  const GateVariableGraph g(p);
  const std::vector<char> pending(g.size(), 1);
  std::size_t interior = 0;
  for (int q = 0; q < static_cast<int>(p.num_qubits()); ++q) {
    const auto n = neighborhood(g, pending, g.idle_var(q), 2);
    EXPECT_LE(n.size(), 5u);
    interior += n.size() == 5;
  }
  EXPECT_GT(interior, 0u);
}

TEST(SnakeEstimator, FullSetEqualsEstimator) {
  const Fixture fx = lattice_fixture(3, 2);
  std::vector<VarId> all(fx.e.num_vars());
  for (VarId v = 0; v < static_cast<VarId>(all.size()); ++v) all[v] = v;
  const SubProblem sp = build_snake_estimator(fx.e, all, std::vector<char>(all.size(), 0));
  EXPECT_EQ(sp.components.size(), fx.e.components().size());
}

TEST(SnakeEstimator, ExcludesComponentsOnUnassignedOutsiders) {
  const Fixture fx = lattice_fixture(3, 3);
  const std::vector<char> none(fx.e.num_vars(), 0);
  const SubProblem sp = build_snake_estimator(fx.e, {0}, none);
  for (int k : sp.components) {
    const auto& c = fx.e.components()[k];
    EXPECT_EQ(c.deps[0], 0);
    EXPECT_EQ(c.n_deps, 1);
  }
}

TEST(SnakeEstimator, MatchesContainmentFilter) {
  const Fixture fx = lattice_fixture(3, 4);
  std::mt19937_64 rng(4);
  const auto n = fx.e.num_vars();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<char> assigned(n, 0);
    std::vector<VarId> fs;
    for (VarId v = 0; v < static_cast<VarId>(n); ++v) {
      const auto r = rng() % 3;
      if (r == 0) fs.push_back(v);
      if (r == 1) assigned[v] = 1;
    }
    if (fs.empty()) continue;
    EXPECT_EQ(build_snake_estimator(fx.e, fs, assigned).components,
              testing::containment_filter(fx.e, fs, assigned));
  }
}

TEST(InnerSolve, OneDimensionalExhaustiveIsLinearScanArgmin) {
  const Fixture fx = lattice_fixture(3, 5);
  std::mt19937_64 rng(5);
  auto work = random_config(fx.b, rng);
  std::vector<char> assigned(fx.e.num_vars(), 1);
  for (VarId v : {0, 5, 20, 30}) {
    assigned[v] = 0;
    const SubProblem sp = build_snake_estimator(fx.e, {v}, assigned);
    const InnerResult r = inner_solve(fx.e, sp, work, fx.b, InnerSolver{}, 1);
    // Oracle: scan with strict improvement, so the lowest frequency wins ties.
    auto probe = work;
    double best = INFINITY, arg = NAN;
    for (std::int64_t t = 0; t < fx.b[v].points(); ++t) {
      probe[v] = fx.b[v].at(t);
      double s = 0.0;
      for (int k : sp.components) s += fx.e.term(k, probe.data());
      if (s < best) {
        best = s;
        arg = probe[v];
      }
    }
    EXPECT_EQ(r.x[0], arg);
    EXPECT_EQ(r.value, best);
    EXPECT_EQ(work[v], arg);
    assigned[v] = 1;
  }
}

TEST(InnerSolve, ConstantObjectivePicksLowestFrequency) {
  Fixture fx = lattice_fixture(2, 6);
  fx.e.set_weights(WeightTable::zeros());
  std::mt19937_64 rng(6);
  auto work = random_config(fx.b, rng);
  const SubProblem sp = build_snake_estimator(fx.e, {0, 1}, std::vector<char>(fx.e.num_vars(), 1));
  const InnerResult r = inner_solve(fx.e, sp, work, fx.b, InnerSolver{}, 1);
  EXPECT_EQ(r.x[0], fx.b[0].lo);
  EXPECT_EQ(r.x[1], fx.b[1].lo);
}

TEST(InnerSolve, StochasticFiveDimensionalNearCoarseOptimum) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const testing::ToyInstance toy = testing::make_toy(seed, 3, 10);
    ASSERT_EQ(toy.estimator.num_vars(), 5u);
    double best = 0.0;
    testing::brute_force_optimum(toy.estimator, toy.bounds, &best);
    std::vector<VarId> all{0, 1, 2, 3, 4};
    const SubProblem sp =
        build_snake_estimator(toy.estimator, all, std::vector<char>(5, 0));
    std::vector<double> work(5, NAN);
    InnerSolver s;
    s.kind = InnerSolverKind::stochastic;
    s.budget = 10000;
    const InnerResult r = inner_solve(toy.estimator, sp, work, toy.bounds, s, seed);
    EXPECT_LE(r.value, best * 1.05) << "seed " << seed;
    EXPECT_LE(r.evaluations, s.budget);
    // Never worse than uniform random search with the same budget.
    std::mt19937_64 rng(seed);
    double random_best = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < s.budget; ++i) {
      random_best = std::min(random_best,
                             toy.estimator.evaluate_serial(testing::random_config(toy.bounds, rng)));
    }
    EXPECT_LE(r.value, random_best) << "seed " << seed;
  }
}

TEST(InnerSolve, EmptyBoundsAreRejected) {
  Fixture fx = lattice_fixture(2, 7);
  fx.b[0] = Interval{1.0, 0.0};
  std::vector<double> work(fx.e.num_vars(), 5.0);
  const SubProblem sp = build_snake_estimator(fx.e, {0}, std::vector<char>(fx.e.num_vars(), 1));
  EXPECT_THROW(inner_solve(fx.e, sp, work, fx.b, InnerSolver{}, 1), EmptyBoundsError);
}

TEST(Optimize, SingleVariableEqualsInnerSolve) {
  const Fixture fx = lattice_fixture(1, 8);
  SnakeParams p;
  const SnakeResult r = optimize(fx.e, fx.b, p);
  std::vector<double> work(1, NAN);
  const SubProblem sp = build_snake_estimator(fx.e, {0}, {0});
  const InnerResult ir = inner_solve(fx.e, sp, work, fx.b, p.solver, 0);
  EXPECT_EQ(r.values[0], ir.x[0]);
}

TEST(Optimize, GlobalExhaustiveMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const testing::ToyInstance toy = testing::make_toy(seed, 3, 8);
    double best = 0.0;
    const auto oracle = testing::brute_force_optimum(toy.estimator, toy.bounds, &best);
    SnakeParams p;
    p.scope = kGlobalScope;
    p.solver.kind = InnerSolverKind::exhaustive;
    p.seed = seed;
    const SnakeResult r = optimize(toy.estimator, toy.bounds, p);
    EXPECT_EQ(r.values, oracle) << "seed " << seed;
    EXPECT_EQ(testing::brute_energy(toy.estimator, r.values), best);
  }
}

TEST(Optimize, ScopeOneStepsAreConditionalOptima) {
  const Fixture fx = lattice_fixture(3, 9);
  SnakeParams p;
  p.scope = 1;
  p.seed = 9;
  const SnakeResult r = optimize(fx.e, fx.b, p);
  ASSERT_EQ(r.trace.size(), fx.e.num_vars());
  std::vector<double> f(fx.e.num_vars(), NAN);
  std::set<VarId> seen;
  for (const TraceStep& s : r.trace) {
    ASSERT_EQ(s.vars.size(), 1u);
    const VarId v = s.vars[0];
    EXPECT_TRUE(seen.insert(v).second);
    double best = INFINITY, arg = NAN;
    for (std::int64_t t = 0; t < fx.b[v].points(); ++t) {
      f[v] = fx.b[v].at(t);
      double sum = 0.0;
      for (int k : fx.e.components_of_var(v)) {
        const auto& c = fx.e.components()[k];
        bool ready = true;
        for (int d = 0; d < c.n_deps; ++d) ready &= !std::isnan(f[c.deps[d]]);
        if (ready) sum += fx.e.term(k, f.data());
      }
      if (sum < best) {
        best = sum;
        arg = f[v];
      }
    }
    f[v] = arg;
    EXPECT_EQ(r.values[v], arg) << fx.e.graph().name(v);
  }
}

TEST(Optimize, CompleteAndDeterministic) {
  const Fixture fx = lattice_fixture(3, 10);
  for (auto rule : {TraversalRule::nn, TraversalRule::nnn, TraversalRule::arb}) {
    for (auto h : {TraversalHeuristic::bfs, TraversalHeuristic::dfs, TraversalHeuristic::rnd}) {
      SnakeParams p;
      p.rule = rule;
      p.heuristic = h;
      p.seed = 10;
      p.solver.budget = 300;
      const SnakeResult a = optimize(fx.e, fx.b, p);
      const SnakeResult b = optimize(fx.e, fx.b, p);
      EXPECT_EQ(a.values, b.values);
      ASSERT_EQ(a.trace.size(), b.trace.size());
      std::vector<int> count(fx.e.num_vars(), 0);
      for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].vars, b.trace[i].vars);
        for (VarId v : a.trace[i].vars) ++count[v];
      }
      for (VarId v = 0; v < static_cast<VarId>(count.size()); ++v) {
        EXPECT_EQ(count[v], 1);
        EXPECT_GE(a.values[v], fx.b[v].lo);
        EXPECT_LE(a.values[v], fx.b[v].hi);
      }
    }
  }
}

TEST(Optimize, MultiSeedReturnsLowestEnergy) {
  const Fixture fx = lattice_fixture(2, 11);
  SnakeParams p;
  p.seed = 11;
  p.seeds = 0;
  const SnakeResult best = optimize(fx.e, fx.b, p, false);
  EXPECT_NEAR(best.energy, fx.e.evaluate_serial(best.values), 1e-12 * best.energy);
  SnakeParams single = p;
  single.seeds = 1;
  EXPECT_LE(best.energy, optimize(fx.e, fx.b, single, false).energy);
  EXPECT_EQ(optimize(fx.e, fx.b, p, true).values, best.values);
}

TEST(Heal, RequiresTargets) {
  const Fixture fx = lattice_fixture(2, 12);
  std::mt19937_64 rng(12);
  EXPECT_THROW(heal(fx.e, fx.b, random_config(fx.b, rng), {}, SnakeParams{}),
               std::invalid_argument);
  EXPECT_THROW(heal(fx.e, fx.b, random_config(fx.b, rng), {999}, SnakeParams{}), InputError);
}

TEST(Heal, ClosureAddsHingedInteractions) {
  const ProcessorGraph p = build_surface_code_lattice(3);
  const GateVariableGraph g(p);
  const VarId idle = g.idle_var(4);
  std::vector<VarId> oracle{idle};
  for (int c : p.incident_couplers(4)) oracle.push_back(g.interaction_var(c));
  std::sort(oracle.begin(), oracle.end());
  EXPECT_EQ(heal_closure(g, {idle}), oracle);
  const VarId inter = g.interaction_var(0);
  EXPECT_EQ(heal_closure(g, {inter}), std::vector<VarId>{inter});
}

TEST(Heal, InteractionTargetLeavesIdlesBitIdentical) {
  const Fixture fx = lattice_fixture(3, 13);
  std::mt19937_64 rng(13);
  const auto f = random_config(fx.b, rng);
  const VarId target = fx.e.graph().interaction_var(3);
  const SnakeResult r = heal(fx.e, fx.b, f, {target}, SnakeParams{});
  for (VarId v = 0; v < static_cast<VarId>(f.size()); ++v) {
    if (v != target) EXPECT_EQ(r.values[v], f[v]);
  }
  EXPECT_LE(fx.e.evaluate_serial(r.values), fx.e.evaluate_serial(f));
}

TEST(SelectHealTargets, Thresholds) {
  const ProcessorGraph p = build_surface_code_lattice(3);
  const GateVariableGraph g(p);
  BenchmarkPrediction pred;
  pred.e_sq.assign(p.num_qubits(), 1e-4);
  pred.e_cycle.assign(p.num_couplers(), 5e-3);
  pred.e_cz.assign(p.num_couplers(), 4e-3);
  EXPECT_TRUE(select_heal_targets(pred, g, p).empty());

  pred.e_cycle[2] = 2.0e-2;
  EXPECT_EQ(select_heal_targets(pred, g, p), std::vector<VarId>{g.interaction_var(2)});

  // Two outlier pairs sharing a qubit pull in its idle.
  const int q = 4;
  const auto& inc = p.incident_couplers(q);
  ASSERT_GE(inc.size(), 2u);
  pred.e_cycle.assign(p.num_couplers(), 5e-3);
  pred.e_cycle[inc[0]] = pred.e_cycle[inc[1]] = 1.6e-2;
  std::vector<VarId> expect{g.idle_var(q), g.interaction_var(inc[0]), g.interaction_var(inc[1])};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(select_heal_targets(pred, g, p), expect);

  pred.e_cycle.assign(p.num_couplers(), 5e-3);
  pred.e_sq[7] = 1.5e-3;
  EXPECT_EQ(select_heal_targets(pred, g, p), std::vector<VarId>{g.idle_var(7)});
}

TEST(Stitch, PlanPartitionsVariables) {
  const Fixture fx = lattice_fixture(5, 14);
  for (int r : {1, 2, 3, 4}) {
    const StitchPlan plan = make_stitch_plan(fx.e, r);
    EXPECT_EQ(plan.regions.size(), static_cast<std::size_t>(r));
    EXPECT_NO_THROW(validate_plan(plan, fx.e.num_vars()));
    std::vector<int> owner(fx.e.num_vars(), 0);
    for (const auto& reg : plan.regions) {
      for (VarId v : reg) ++owner[v];
    }
    for (int c : owner) EXPECT_EQ(c, 1);
  }
  StitchPlan bad = make_stitch_plan(fx.e, 2);
  bad.regions[1].push_back(bad.regions[0][0]);
  EXPECT_THROW(validate_plan(bad, fx.e.num_vars()), InputError);
  bad = make_stitch_plan(fx.e, 2);
  bad.regions[1].pop_back();
  EXPECT_THROW(validate_plan(bad, fx.e.num_vars()), InputError);
}

TEST(Stitch, SeamMatchesDependencyCutOracle) {
  const auto data = testing::make_data(sycamore_like_68(), 15);
  const Estimator e = build_estimator(data, kAllMechanisms, WeightTable::defaults());
  const StitchPlan plan = make_stitch_plan(e, 2);
  std::vector<int> region(e.num_vars(), -1);
  for (int r = 0; r < 2; ++r) {
    for (VarId v : plan.regions[r]) region[v] = r;
  }
  std::set<VarId> oracle;
  for (const auto& c : e.components()) {
    if (c.n_deps == 2 && region[c.deps[0]] != region[c.deps[1]]) {
      oracle.insert(c.deps[0]);
      oracle.insert(c.deps[1]);
    }
  }
  EXPECT_EQ(plan.seam, std::vector<VarId>(oracle.begin(), oracle.end()));
  EXPECT_FALSE(plan.seam.empty());
}

TEST(Stitch, SingleRegionEqualsPlainOptimize) {
  const Fixture fx = lattice_fixture(3, 16);
  SnakeParams p;
  p.seed = 16;
  const StitchResult s = stitch(fx.e, fx.b, make_stitch_plan(fx.e, 1), p);
  EXPECT_EQ(s.values, optimize(fx.e, fx.b, p).values);
}

TEST(Stitch, TwoRegionsGiveCompleteConfiguration) {
  const Fixture fx = lattice_fixture(3, 17);
  SnakeParams p;
  p.seed = 17;
  const StitchResult s = stitch(fx.e, fx.b, make_stitch_plan(fx.e, 2), p);
  for (double x : s.values) EXPECT_FALSE(std::isnan(x));
  EXPECT_NEAR(s.energy, fx.e.evaluate_serial(s.values), 1e-12 * s.energy);
  EXPECT_EQ(s.regions.size(), 2u);
}

TEST(MixSeed, Distinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(mix_seed(a, b));
  }
  EXPECT_EQ(seen.size(), 2500u);
}

}  // namespace
}  // namespace snakeopt
