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

#include "snakeopt/snake.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace snakeopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Breadth-first layers of the incidence graph from `center`, up to `depth`.
std::vector<std::vector<VarId>> incidence_layers(const GateVariableGraph& g, VarId center,
                                                 int depth) {
  std::vector<std::vector<VarId>> layers{{center}};
  std::vector<char> seen(g.size(), 0);
  seen[center] = 1;
  for (int d = 1; d <= depth; ++d) {
    std::vector<VarId> next;
    for (VarId v : layers.back()) {
      for (VarId w : g.incidence(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          next.push_back(w);
        }
      }
    }
    if (next.empty()) break;
    layers.push_back(std::move(next));
  }
  return layers;
}

// Stochastic minimization in grid-index space: DE/rand/1/bin, elitist,
// followed by a coordinate-descent polish of the best point.
InnerResult differential_evolution(const std::vector<std::int64_t>& points,
                                   const std::function<double(const std::vector<std::int64_t>&)>& f,
                                   const InnerSolver& s, std::int64_t budget, std::uint64_t seed,
                                   const std::vector<std::int64_t>* warm,
                                   std::vector<std::int64_t>& best_idx) {
  const std::size_t dims = points.size();
  const int np = s.population > 0
                     ? s.population
                     : std::max(10, static_cast<int>(15 * dims));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto round_idx = [&](const std::vector<double>& x) {
    std::vector<std::int64_t> k(dims);
    for (std::size_t j = 0; j < dims; ++j) {
      k[j] = std::clamp<std::int64_t>(std::llround(x[j]), 0, points[j] - 1);
    }
    return k;
  };
  std::vector<std::vector<double>> pop(np, std::vector<double>(dims));
  for (int i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      pop[i][j] = (i == 0 && warm) ? static_cast<double>((*warm)[j])
                                   : unit(rng) * static_cast<double>(points[j] - 1);
    }
  }
  InnerResult r;
  std::vector<double> fit(np);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < np; ++i) {
    const auto k = round_idx(pop[i]);
    fit[i] = f(k);
    ++r.evaluations;
    if (fit[i] < best) {
      best = fit[i];
      best_idx = k;
    }
  }
  std::vector<double> trial(dims);
  std::uniform_int_distribution<int> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dims - 1);
  // The last tenth of the budget goes to a unit-step coordinate descent.
  const std::int64_t de_budget = budget - budget / 10;
  while (r.evaluations < de_budget && np >= 4) {
    for (int i = 0; i < np && r.evaluations < de_budget; ++i) {
      int a, b, c;
      do a = pick(rng); while (a == i);
      do b = pick(rng); while (b == i || b == a);
      do c = pick(rng); while (c == i || c == a || c == b);
      const std::size_t jr = pick_dim(rng);
      for (std::size_t j = 0; j < dims; ++j) {
        if (j == jr || unit(rng) < s.crossover) {
          double v = pop[a][j] + s.mutation * (pop[b][j] - pop[c][j]);
          const double hi = static_cast<double>(points[j] - 1);
          if (v < 0.0) v = unit(rng) * pop[i][j];
          if (v > hi) v = hi - unit(rng) * (hi - pop[i][j]);
          trial[j] = v;
        } else {
          trial[j] = pop[i][j];
        }
      }
      const auto k = round_idx(trial);
      const double ft = f(k);
      ++r.evaluations;
      if (ft <= fit[i]) {
        pop[i] = trial;
        fit[i] = ft;
      }
      if (ft < best) {
        best = ft;
        best_idx = k;
      }
    }
    // Restart around the incumbent once the population has collapsed.
    bool collapsed = true;
    for (int i = 1; i < np && collapsed; ++i) {
      collapsed = round_idx(pop[i]) == round_idx(pop[0]);
    }
    if (collapsed) {
      for (int i = 0; i < np && r.evaluations < de_budget; ++i) {
        for (std::size_t j = 0; j < dims; ++j) {
          pop[i][j] = i == 0 ? static_cast<double>(best_idx[j])
                             : unit(rng) * static_cast<double>(points[j] - 1);
        }
        if (i == 0) {
          fit[i] = best;
          continue;
        }
        const auto k = round_idx(pop[i]);
        fit[i] = f(k);
        ++r.evaluations;
        if (fit[i] < best) {
          best = fit[i];
          best_idx = k;
        }
      }
    }
  }
  bool improved = true;
  while (improved && r.evaluations < budget) {
    improved = false;
    for (std::size_t j = 0; j < dims && r.evaluations < budget; ++j) {
      for (const std::int64_t step : {-1, 1}) {
        if (r.evaluations >= budget) break;
        std::vector<std::int64_t> k = best_idx;
        k[j] += step;
        if (k[j] < 0 || k[j] >= points[j]) continue;
        const double fk = f(k);
        ++r.evaluations;
        if (fk < best) {
          best = fk;
          best_idx = std::move(k);
          improved = true;
        }
      }
    }
  }
  r.value = best;
  return r;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SnakeParams::validate() const {
  if (scope < 1) throw std::invalid_argument("scope must be >= 1");
  if (scope > 3 && scope != kGlobalScope && rule != TraversalRule::arb) {
    throw std::invalid_argument("scopes above 3 need the ARB traversal rule");
  }
  if (seeds < 0) throw std::invalid_argument("seed count must be >= 0 (0 = all)");
  if (solver.budget < 1 || global_budget < 0) {
    throw std::invalid_argument("stochastic budget must be positive");
  }
  if (solver.population != 0 && solver.population < 4) {
    throw std::invalid_argument("population must be >= 4");
  }
}

std::string to_string(TraversalRule r) {
  switch (r) {
    case TraversalRule::nn: return "NN";
    case TraversalRule::nnn: return "NNN";
    case TraversalRule::arb: return "ARB";
  }
  return "ARB";
}

std::string to_string(TraversalHeuristic h) {
  switch (h) {
    case TraversalHeuristic::bfs: return "BFS";
    case TraversalHeuristic::dfs: return "DFS";
    case TraversalHeuristic::rnd: return "RND";
  }
  return "BFS";
}

TraversalRule parse_rule(const std::string& s) {
  if (s == "NN" || s == "nn") return TraversalRule::nn;
  if (s == "NNN" || s == "nnn") return TraversalRule::nnn;
  if (s == "ARB" || s == "arb") return TraversalRule::arb;
  throw InputError("unknown traversal rule '" + s + "'");
}

TraversalHeuristic parse_heuristic(const std::string& s) {
  if (s == "BFS" || s == "bfs") return TraversalHeuristic::bfs;
  if (s == "DFS" || s == "dfs") return TraversalHeuristic::dfs;
  if (s == "RND" || s == "rnd") return TraversalHeuristic::rnd;
  throw InputError("unknown traversal heuristic '" + s + "'");
}

std::vector<VarId> neighborhood(const GateVariableGraph& g, const std::vector<char>& pending,
                                VarId center, int scope) {
  std::vector<VarId> out;
  if (scope == kGlobalScope) {
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (pending[v]) out.push_back(static_cast<VarId>(v));
    }
    return out;
  }
  for (const auto& layer : incidence_layers(g, center, scope - 1)) {
    for (VarId v : layer) {
      if (pending[v]) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SubProblem build_snake_estimator(const Estimator& e, const std::vector<VarId>& fs,
                                 const std::vector<char>& assigned) {
  SubProblem sp;
  sp.vars = fs;
  std::sort(sp.vars.begin(), sp.vars.end());
  std::vector<char> in_fs(e.num_vars(), 0);
  for (VarId v : sp.vars) in_fs[v] = 1;
  for (VarId v : sp.vars) {
    for (int k : e.components_of_var(v)) {
      const auto& c = e.components()[k];
      bool ok = true;
      for (int d = 0; d < c.n_deps; ++d) {
        ok = ok && (in_fs[c.deps[d]] || assigned[c.deps[d]]);
      }
      if (ok) sp.components.push_back(k);
    }
  }
  std::sort(sp.components.begin(), sp.components.end());
  sp.components.erase(std::unique(sp.components.begin(), sp.components.end()),
                      sp.components.end());
  return sp;
}

InnerResult inner_solve(const Estimator& e, const SubProblem& sp, std::vector<double>& work,
                        const std::vector<Interval>& bounds, const InnerSolver& solver,
                        std::uint64_t seed, const std::vector<double>* warm,
                        std::int64_t budget_override) {
  const std::size_t dims = sp.vars.size();
  if (dims == 0) throw std::invalid_argument("inner solve over an empty variable set");
  std::vector<std::int64_t> points(dims), base(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    const Interval& b = bounds.at(sp.vars[j]);
    if (!(b.lo <= b.hi) || b.points() < 1) {
      throw EmptyBoundsError("empty hard bounds for variable " + e.graph().name(sp.vars[j]));
    }
    points[j] = b.points();
    base[j] = b.k_lo();
  }
  const double* fp = work.data();
  auto set = [&](std::size_t j, std::int64_t k) {
    work[sp.vars[j]] = static_cast<double>(base[j] + k) * kGridStepGhz;
  };
  auto objective = [&](const std::vector<std::int64_t>& k) {
    for (std::size_t j = 0; j < dims; ++j) set(j, k[j]);
    double s = 0.0;
    for (int c : sp.components) s += e.term(c, fp);
    return s;
  };

  bool exhaustive = solver.kind == InnerSolverKind::exhaustive ||
                    (solver.kind == InnerSolverKind::automatic && dims < 3);
  InnerResult r;
  std::vector<std::int64_t> best_idx(dims, 0);
  if (exhaustive) {
    double space = 1.0;
    for (auto p : points) space *= static_cast<double>(p);
    if (space > 2e9) {
      throw NumericalError("exhaustive search over " + std::to_string(dims) +
                           " variables is too large");
    }
    // Components are summed at the deepest level that fixes all their
    // subproblem variables, so outer partial sums are reused.
    std::vector<int> pos(e.num_vars(), -1);
    for (std::size_t j = 0; j < dims; ++j) pos[sp.vars[j]] = static_cast<int>(j);
    std::vector<std::vector<int>> at_level(dims);
    for (int c : sp.components) {
      const auto& comp = e.components()[c];
      int level = 0;
      for (int d = 0; d < comp.n_deps; ++d) level = std::max(level, pos[comp.deps[d]]);
      at_level[level].push_back(c);
    }
    std::vector<std::int64_t> idx(dims, 0);
    std::vector<double> partial(dims + 1, 0.0);
    double best = std::numeric_limits<double>::infinity();
    // Iterative odometer over the grid, first variable outermost.
    std::size_t level = 0;
    set(0, 0);
    while (true) {
      double s = partial[level];
      for (int c : at_level[level]) s += e.term(c, fp);
      partial[level + 1] = s;
      if (level + 1 < dims) {
        ++level;
        idx[level] = 0;
        set(level, 0);
        continue;
      }
      ++r.evaluations;
      if (s < best) {
        best = s;
        best_idx = idx;
      }
      // Advance.
      while (true) {
        if (++idx[level] < points[level]) {
          set(level, idx[level]);
          break;
        }
        if (level == 0) goto done;
        --level;
      }
    }
  done:
    r.value = best;
  } else {
    std::vector<std::int64_t> warm_idx;
    if (warm) {
      warm_idx.resize(dims);
      for (std::size_t j = 0; j < dims; ++j) {
        warm_idx[j] = std::clamp<std::int64_t>(std::llround((*warm)[j] / kGridStepGhz) - base[j],
                                               0, points[j] - 1);
      }
    }
    const std::int64_t budget = budget_override > 0 ? budget_override : solver.budget;
    r = differential_evolution(points, objective, solver, budget, seed,
                               warm ? &warm_idx : nullptr, best_idx);
  }
  r.value = objective(best_idx);
  r.x.resize(dims);
  for (std::size_t j = 0; j < dims; ++j) r.x[j] = work[sp.vars[j]];
  return r;
}

namespace {

struct ThreadState {
  std::vector<char> pending;
  std::vector<char> assigned;
  std::vector<double> values;
  std::size_t remaining = 0;
};

std::vector<VarId> traversal_candidates(const GateVariableGraph& g, VarId center,
                                        const SnakeParams& p) {
  std::vector<VarId> out;
  switch (p.rule) {
    case TraversalRule::nn:
      out = g.adjacency(center);
      break;
    case TraversalRule::nnn: {
      std::set<VarId> s(g.adjacency(center).begin(), g.adjacency(center).end());
      for (VarId v : g.adjacency(center)) s.insert(g.adjacency(v).begin(), g.adjacency(v).end());
      s.erase(center);
      out.assign(s.begin(), s.end());
      break;
    }
    case TraversalRule::arb: {
      if (p.scope == kGlobalScope) break;
      auto layers = incidence_layers(g, center, p.scope);
      if (static_cast<int>(layers.size()) > p.scope) out = layers[p.scope];
      std::sort(out.begin(), out.end());
      break;
    }
  }
  return out;
}

VarId nearest_pending(const GateVariableGraph& g, const std::vector<char>& pending, VarId from) {
  if (from >= 0) {
    std::vector<char> seen(g.size(), 0);
    std::vector<VarId> layer{from};
    seen[from] = 1;
    while (!layer.empty()) {
      VarId best = -1;
      for (VarId v : layer) {
        if (pending[v] && (best < 0 || v < best)) best = v;
      }
      if (best >= 0) return best;
      std::vector<VarId> next;
      for (VarId v : layer) {
        for (VarId w : g.incidence(v)) {
          if (!seen[w]) {
            seen[w] = 1;
            next.push_back(w);
          }
        }
      }
      layer = std::move(next);
    }
  }
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (pending[v]) return static_cast<VarId>(v);
  }
  return -1;
}

// One Snake thread. With `polish`, each block starts from the current values
// and ends with exact coordinate scans, so the objective never increases.
SnakeResult run_thread(const Estimator& e, const std::vector<Interval>& bounds,
                       const SnakeParams& p, VarId start, ThreadState st, bool polish) {
  const auto t0 = Clock::now();
  const GateVariableGraph& g = e.graph();
  SnakeResult res;
  res.start = start;
  std::deque<VarId> frontier;
  std::mt19937_64 walk(mix_seed(p.seed, 0x5eedULL + static_cast<std::uint64_t>(start)));
  VarId center = start;
  VarId last = start;
  std::int64_t step = 0;
  InnerSolver exact;
  exact.kind = InnerSolverKind::exhaustive;

  while (st.remaining > 0) {
    while (center < 0 || !st.pending[center]) {
      if (frontier.empty()) {
        center = nearest_pending(g, st.pending, last);
        break;
      }
      if (p.heuristic == TraversalHeuristic::bfs) {
        center = frontier.front();
        frontier.pop_front();
      } else if (p.heuristic == TraversalHeuristic::dfs) {
        center = frontier.back();
        frontier.pop_back();
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
        const std::size_t i = pick(walk);
        center = frontier[i];
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    const auto ts = Clock::now();
    const std::vector<VarId> fs = neighborhood(g, st.pending, center, p.scope);
    const SubProblem sp = build_snake_estimator(e, fs, st.assigned);
    const std::uint64_t step_seed =
        mix_seed(mix_seed(p.seed, static_cast<std::uint64_t>(start)), static_cast<std::uint64_t>(step));
    const std::int64_t budget = p.scope == kGlobalScope ? p.global_budget : 0;
    InnerResult r;
    if (polish) {
      std::vector<double> warm(fs.size());
      for (std::size_t j = 0; j < fs.size(); ++j) warm[j] = st.values[fs[j]];
      std::vector<double> work = st.values;
      double current = 0.0;
      for (int c : sp.components) current += e.term(c, work.data());
      r = inner_solve(e, sp, work, bounds, p.solver, step_seed, &warm, budget);
      if (!(r.value < current)) {
        r.x = warm;
        r.value = current;
        for (std::size_t j = 0; j < fs.size(); ++j) work[fs[j]] = warm[j];
      }
      // Exact single-variable scans over the block.
      for (std::size_t j = 0; j < fs.size(); ++j) {
        SubProblem one = build_snake_estimator(e, {fs[j]}, st.assigned);
        const double before = r.value;
        double one_before = 0.0;
        for (int c : one.components) one_before += e.term(c, work.data());
        const double keep = work[fs[j]];
        InnerResult s = inner_solve(e, one, work, bounds, exact, step_seed);
        r.evaluations += s.evaluations;
        if (s.value < one_before) {
          r.x[j] = s.x[0];
          double total = 0.0;
          for (int c : sp.components) total += e.term(c, work.data());
          r.value = total;
        } else {
          work[fs[j]] = keep;
          r.value = before;
        }
      }
      for (std::size_t j = 0; j < fs.size(); ++j) st.values[fs[j]] = work[fs[j]];
    } else {
      r = inner_solve(e, sp, st.values, bounds, p.solver, step_seed, nullptr, budget);
    }
    for (VarId v : fs) {
      st.pending[v] = 0;
      st.assigned[v] = 1;
      --st.remaining;
    }
    TraceStep t;
    t.center = center;
    t.vars = fs;
    t.value = r.value;
    t.evaluations = r.evaluations;
    t.seconds = seconds_since(ts);
    res.trace.push_back(std::move(t));
    ++step;

    for (VarId v : traversal_candidates(g, center, p)) {
      if (st.pending[v]) frontier.push_back(v);
    }
    last = center;
    center = -1;
  }

  res.values = std::move(st.values);
  double energy = 0.0;
  for (std::size_t k = 0; k < e.components().size(); ++k) {
    const auto& c = e.components()[k];
    bool set = true;
    for (int d = 0; d < c.n_deps; ++d) set = set && !std::isnan(res.values[c.deps[d]]);
    if (set) energy += e.term(k, res.values.data());
  }
  res.energy = energy;
  res.seconds = seconds_since(t0);
  return res;
}

}  // namespace

SnakeResult optimize_subset(const Estimator& e, const std::vector<Interval>& bounds,
                            const SnakeParams& params, const std::vector<VarId>& subset,
                            bool parallel) {
  params.validate();
  const std::size_t nv = e.num_vars();
  if (bounds.size() != nv) throw InputError("bounds do not match the variable count");
  ThreadState init;
  init.pending.assign(nv, 0);
  init.assigned.assign(nv, 0);
  init.values.assign(nv, std::numeric_limits<double>::quiet_NaN());
  std::vector<VarId> vars = subset;
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (VarId v : vars) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv) throw InputError("unknown variable id");
    init.pending[v] = 1;
  }
  init.remaining = vars.size();
  if (vars.empty()) {
    SnakeResult r;
    r.values = init.values;
    return r;
  }

  std::vector<VarId> starts;
  if (params.seeds == 0 || static_cast<std::size_t>(params.seeds) >= vars.size()) {
    starts = vars;
  } else {
    // Random starts come from interaction variables when there are enough.
    std::vector<VarId> shuffled;
    for (VarId v : vars) {
      if (!e.graph().is_idle(v)) shuffled.push_back(v);
    }
    if (shuffled.size() < static_cast<std::size_t>(params.seeds)) shuffled = vars;
    std::mt19937_64 rng(params.seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    starts.assign(shuffled.begin(), shuffled.begin() + params.seeds);
    std::sort(starts.begin(), starts.end());
  }

  std::vector<SnakeResult> results(starts.size());
  const auto n = static_cast<std::ptrdiff_t>(starts.size());
  if (parallel && n > 1) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      results[i] = run_thread(e, bounds, params, starts[i], init, false);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      results[i] = run_thread(e, bounds, params, starts[i], init, false);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].energy < results[best].energy) best = i;
  }
  return std::move(results[best]);
}

SnakeResult optimize(const Estimator& e, const std::vector<Interval>& bounds,
                     const SnakeParams& params, bool parallel) {
  std::vector<VarId> all(e.num_vars());
  std::iota(all.begin(), all.end(), 0);
  return optimize_subset(e, bounds, params, all, parallel);
}

std::vector<VarId> heal_closure(const GateVariableGraph& g, const std::vector<VarId>& targets) {
  std::set<VarId> out;
  for (VarId v : targets) {
    if (v < 0 || static_cast<std::size_t>(v) >= g.size()) {
      throw InputError("unknown variable id " + std::to_string(v));
    }
    out.insert(v);
    if (g.is_idle(v)) {
      for (VarId w : g.incidence(v)) out.insert(w);
    }
  }
  return {out.begin(), out.end()};
}

SnakeResult heal(const Estimator& e, const std::vector<Interval>& bounds,
                 const std::vector<double>& config, const std::vector<VarId>& targets,
                 const SnakeParams& params) {
  params.validate();
  if (targets.empty()) throw std::invalid_argument("heal needs at least one target");
  e.check_complete(config);
  const std::vector<VarId> closure = heal_closure(e.graph(), targets);
  ThreadState st;
  st.pending.assign(e.num_vars(), 0);
  st.assigned.assign(e.num_vars(), 1);
  st.values = config;
  for (VarId v : closure) st.pending[v] = 1;
  st.remaining = closure.size();
  return run_thread(e, bounds, params, closure.front(), std::move(st), true);
}

std::vector<VarId> select_heal_targets(const BenchmarkPrediction& pred,
                                       const GateVariableGraph& g, const ProcessorGraph& p,
                                       const HealThresholds& th) {
  if (pred.e_sq.size() != p.num_qubits() || pred.e_cycle.size() != p.num_couplers()) {
    throw InputError("benchmark prediction does not match the processor");
  }
  std::set<VarId> out;
  std::vector<int> outlier_pairs(p.num_qubits(), 0);
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    if (pred.e_cycle[c] >= th.cycle) {
      out.insert(g.interaction_var(static_cast<int>(c)));
      ++outlier_pairs[p.couplers()[c].a];
      ++outlier_pairs[p.couplers()[c].b];
    }
  }
  for (std::size_t q = 0; q < p.num_qubits(); ++q) {
    if (pred.e_sq[q] >= th.sq || outlier_pairs[q] >= 2) out.insert(g.idle_var(static_cast<int>(q)));
  }
  return {out.begin(), out.end()};
}

StitchPlan make_stitch_plan(const Estimator& e, int regions) {
  if (regions < 1) throw std::invalid_argument("region count must be >= 1");
  const ProcessorGraph& p = e.data().processor;
  const GateVariableGraph& g = e.graph();
  const std::size_t n = p.num_qubits();
  if (static_cast<std::size_t>(regions) > std::max<std::size_t>(n, 1)) {
    throw std::invalid_argument("more regions than qubits");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& qa = p.qubits()[a];
    const auto& qb = p.qubits()[b];
    return std::tie(qa.x, qa.y) < std::tie(qb.x, qb.y);
  });
  std::vector<int> region_of(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    region_of[order[i]] = static_cast<int>(i * static_cast<std::size_t>(regions) / n);
  }
  StitchPlan plan;
  plan.regions.assign(regions, {});
  for (std::size_t q = 0; q < n; ++q) plan.regions[region_of[q]].push_back(g.idle_var(static_cast<int>(q)));
  for (std::size_t c = 0; c < p.num_couplers(); ++c) {
    const int lower = std::min(p.couplers()[c].a, p.couplers()[c].b);
    plan.regions[region_of[lower]].push_back(g.interaction_var(static_cast<int>(c)));
  }
  for (auto& r : plan.regions) std::sort(r.begin(), r.end());
  plan.seam = seam_variables(e, plan.regions);
  return plan;
}

std::vector<VarId> seam_variables(const Estimator& e,
                                  const std::vector<std::vector<VarId>>& regions) {
  std::vector<int> region_of(e.num_vars(), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (VarId v : regions[r]) region_of.at(v) = static_cast<int>(r);
  }
  std::set<VarId> seam;
  for (const auto& c : e.components()) {
    if (c.n_deps == 2 && region_of[c.deps[0]] != region_of[c.deps[1]]) {
      seam.insert(c.deps[0]);
      seam.insert(c.deps[1]);
    }
  }
  return {seam.begin(), seam.end()};
}

void validate_plan(const StitchPlan& plan, std::size_t num_vars) {
  std::vector<int> count(num_vars, 0);
  for (const auto& r : plan.regions) {
    for (VarId v : r) {
      if (v < 0 || static_cast<std::size_t>(v) >= num_vars) {
        throw InputError("stitch plan references unknown variable " + std::to_string(v));
      }
      if (++count[v] > 1) {
        throw InputError("overlapping regions: variable " + std::to_string(v) +
                         " appears in more than one region");
      }
    }
  }
  for (std::size_t v = 0; v < num_vars; ++v) {
    if (count[v] == 0) {
      throw InputError("stitch plan leaves variable " + std::to_string(v) + " uncovered");
    }
  }
}

StitchResult stitch(const Estimator& e, const std::vector<Interval>& bounds,
                    const StitchPlan& plan, const SnakeParams& params, bool parallel) {
  params.validate();
  validate_plan(plan, e.num_vars());
  StitchResult out;
  const auto nr = static_cast<std::ptrdiff_t>(plan.regions.size());
  out.regions.resize(plan.regions.size());
  // Regions run one per thread; seeds inside a region run serially.
  if (parallel && nr > 1) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < nr; ++r) {
      out.regions[r] = optimize_subset(e, bounds, params, plan.regions[r], false);
    }
  } else {
    for (std::ptrdiff_t r = 0; r < nr; ++r) {
      out.regions[r] = optimize_subset(e, bounds, params, plan.regions[r], nr == 1 && parallel);
    }
  }
  out.values.assign(e.num_vars(), std::numeric_limits<double>::quiet_NaN());
  for (std::ptrdiff_t r = 0; r < nr; ++r) {
    for (VarId v : plan.regions[r]) out.values[v] = out.regions[r].values[v];
    out.region_seconds.push_back(out.regions[r].seconds);
  }
  if (!plan.seam.empty()) {
    out.seam = heal(e, bounds, out.values, plan.seam, params);
    out.values = out.seam.values;
    out.seam_seconds = out.seam.seconds;
  }
  out.energy = e.evaluate(out.values);
  return out;
}

}  // namespace snakeopt
