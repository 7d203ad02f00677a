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

// Acceptance gate: every criterion at its stated tolerance, one PASS/FAIL line
// each. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>
#include <unistd.h>

#include "snakeopt/benchlab.hpp"
#include "snakeopt/cli.hpp"
#include "snakeopt/io.hpp"
#include "support.hpp"

namespace snakeopt {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Exhaustive global Snake equals enumeration on toy instances.
Outcome brute_force_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  int exact = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const int qubits = 2 + t % 2;          // 3 or 5 variables
    const int points = 8 + t % 5;          // 8..12 grid points per variable
    const testing::ToyInstance toy = testing::make_toy(100 + t, qubits, points);
    double best = 0.0;
    const auto oracle = testing::brute_force_optimum(toy.estimator, toy.bounds, &best);
    SnakeParams p;
    p.scope = kGlobalScope;
    p.solver.kind = InnerSolverKind::exhaustive;
    p.seed = static_cast<std::uint64_t>(t);
    const SnakeResult r = optimize(toy.estimator, toy.bounds, p, false);
    exact += r.values == oracle && toy.estimator.evaluate_serial(r.values) == best;
  }
  const double secs = seconds_since(t0);
  return {exact == trials && secs < 60.0,
          std::to_string(exact) + "/" + std::to_string(trials) + " exact, " +
              fmt("%.1f s", secs)};
}

// 2. Restricted objective equals the dependency filter on random pairs.
Outcome containment() {
  const Estimator e =
      build_estimator(testing::lattice_data(3, 7), kAllMechanisms, WeightTable::defaults());
  const auto& g = e.graph();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<VarId> pick(0, static_cast<VarId>(g.size()) - 1);
  std::uniform_int_distribution<int> scope(1, 4);
  std::bernoulli_distribution coin(0.5);
  int equal = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::vector<char> assigned(g.size());
    for (auto& a : assigned) a = coin(rng);
    const VarId center = pick(rng);
    assigned[center] = 0;
    std::vector<char> pending(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) pending[v] = !assigned[v];
    const auto fs = neighborhood(g, pending, center, scope(rng));
    const SubProblem sp = build_snake_estimator(e, fs, assigned);
    equal += sp.components == testing::containment_filter(e, fs, assigned);
  }
  return {equal == trials, std::to_string(equal) + "/" + std::to_string(trials) + " equal"};
}

// 3. S=2 beats S=1 and budget-matched S_max on median predicted e_c.
Outcome scope_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  int wins = 0;
  std::ostringstream seeds;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int d = 3 + static_cast<int>((seed - 1) % 3);
    const auto runs =
        run_scope_sweep(testing::lattice_data(d, seed), {1, 2, kGlobalScope}, {seed});
    double m1 = 0, m2 = 0, mmax = 0;
    for (const auto& r : runs) {
      (r.scope == 1 ? m1 : r.scope == 2 ? m2 : mmax) = r.e_cycle.p50;
    }
    const bool win = m2 < m1 && m2 < mmax;
    wins += win;
    seeds << " d" << d << (win ? "+" : "-");
  }
  const double secs = seconds_since(t0);
  return {wins >= 8 && secs < 1800.0,
          std::to_string(wins) + "/10 seeds," + seeds.str() + ", " + fmt("%.0f s", secs)};
}

// 4. All mechanisms give the lowest median e_c; dephasing-only hugs f_max.
Outcome mitigation_trend() {
  int wins = 0;
  double worst_detuning = 0.0;
  std::ostringstream best;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto runs = run_mitigation_sweep(testing::lattice_data(3, seed), {}, {seed});
    const MitigationRun* lowest = &runs[0];
    for (const auto& r : runs) {
      if (r.e_cycle.p50 < lowest->e_cycle.p50) lowest = &r;
      if (r.flags == kDephasing) {
        worst_detuning = std::max(worst_detuning, r.median_idle_detuning_ghz);
      }
    }
    wins += lowest->flags == kAllMechanisms;
    best << " " << lowest->flags;
  }
  return {wins >= 8 && worst_detuning < 0.050,
          std::to_string(wins) + "/10 seeds (lowest subsets:" + best.str() +
              "), max dephasing-only detuning " + fmt("%.1f MHz", worst_detuning * 1e3)};
}

// 5. Healing a degraded variable: E drops, outside untouched, far gates unchanged.
Outcome healing_contract() {
  int ok = 0;
  const int trials = 100;
  std::string first_failure;
  for (std::uint64_t proc = 0; proc < 5; ++proc) {
    const Estimator e = build_estimator(testing::lattice_data(3, 50 + proc), kAllMechanisms,
                                        WeightTable::defaults());
    const auto bounds = hard_bounds(e.data(), e.graph());
    SnakeParams p;
    p.seed = proc;
    const std::vector<double> optimized = optimize(e, bounds, p, false).values;
    std::mt19937_64 rng(500 + proc);
    std::uniform_int_distribution<VarId> pick(0, static_cast<VarId>(e.num_vars()) - 1);
    for (int t = 0; t < trials / 5; ++t) {
      const VarId v = pick(rng);
      // Degrade v to its worst grid point.
      std::vector<double> degraded = optimized;
      double worst = -1.0;
      double worst_f = optimized[v];
      std::vector<double> probe = optimized;
      for (std::int64_t k = 0; k < bounds[v].points(); ++k) {
        probe[v] = bounds[v].at(k);
        const double en = e.evaluate_serial(probe);
        if (en > worst) {
          worst = en;
          worst_f = probe[v];
        }
      }
      degraded[v] = worst_f;
      const double before = e.evaluate_serial(degraded);
      SnakeParams hp;
      hp.seed = mix_seed(proc, t);
      const SnakeResult h = heal(e, bounds, degraded, {v}, hp);
      const double after = e.evaluate_serial(h.values);

      const auto closure = heal_closure(e.graph(), {v});
      const std::set<VarId> in(closure.begin(), closure.end());
      bool outside_same = true;
      for (std::size_t u = 0; u < e.num_vars(); ++u) {
        if (!in.count(static_cast<VarId>(u)) &&
            std::memcmp(&h.values[u], &degraded[u], sizeof(double)) != 0) {
          outside_same = false;
        }
      }
      const auto g_before = e.per_gate(degraded);
      const auto g_after = e.per_gate(h.values);
      bool far_same = true;
      for (std::size_t g = 0; g < e.num_vars(); ++g) {
        bool overlaps = false;
        for (int k : e.components_of_gate(static_cast<VarId>(g))) {
          const auto& c = e.components()[k];
          for (int d = 0; d < c.n_deps; ++d) overlaps |= in.count(c.deps[d]) > 0;
        }
        if (!overlaps && g_before[g] != g_after[g]) far_same = false;
      }
      const bool good = after < before && outside_same && far_same;
      ok += good;
      if (!good && first_failure.empty()) {
        first_failure = " (first failure: " + e.graph().name(v) + fmt(" dE=%.3g", after - before) +
                        (outside_same ? "" : " outside changed") +
                        (far_same ? "" : " far gate changed") + ")";
      }
    }
  }
  return {ok == trials, std::to_string(ok) + "/" + std::to_string(trials) + first_failure};
}

// 6. R=2 stitching matches the unstitched median and cuts per-thread time.
Outcome stitching_parity() {
  double ratio_sum = 0.0, time_sum = 0.0, path_sum = 0.0, time_ref = 0.0;
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    const Estimator e = build_estimator(testing::make_data(sycamore_like_68(), s), kAllMechanisms,
                                        WeightTable::defaults());
    const auto bounds = hard_bounds(e.data(), e.graph());
    SnakeParams p;
    p.seed = static_cast<std::uint64_t>(s);
    const SnakeResult full = optimize(e, bounds, p, false);
    const StitchResult st = stitch(e, bounds, make_stitch_plan(e, 2), p, false);
    const double m_full = median(predict_benchmarks(e, full.values).e_cycle);
    const double m_st = median(predict_benchmarks(e, st.values).e_cycle);
    ratio_sum += m_st / m_full;
    // Longest single thread: a region thread or the seam pass.
    const double region = *std::max_element(st.region_seconds.begin(), st.region_seconds.end());
    time_sum += std::max(region, st.seam_seconds);
    path_sum += region + st.seam_seconds;
    time_ref += full.seconds;
  }
  const double ratio = ratio_sum / seeds;
  const double time_ratio = time_sum / time_ref;
  return {std::abs(ratio - 1.0) <= 0.20 && time_ratio <= 0.60,
          "median ratio " + fmt("%.3f", ratio) + ", per-thread time ratio " +
              fmt("%.3f", time_ratio) + " (regions then seam: " +
              fmt("%.3f", path_sum / time_ref) + ")"};
}

// 7. Saturation fit: noiseless recovery and experimental replay.
Outcome saturation_fit() {
  std::vector<std::pair<double, double>> pts;
  for (double n = 2; n <= 100; n += 7) pts.push_back({n, 7.5e-3 - 3.1e-3 * std::exp(-n / 22.0)});
  const SaturationFit f = fit_saturation(pts);
  const double err = std::max({std::abs(f.n_sat / 22.0 - 1), std::abs(f.e_scale / 3.1e-3 - 1),
                               std::abs(f.e_sat / 7.5e-3 - 1)});
  std::vector<std::pair<double, double>> exp_pts;
  for (const auto& r : load_reference_table(testing::data_path("reference/scaling_exp.csv"))) {
    if (r.benchmark == "CZXEB" && r.label == "Optimized") exp_pts.push_back({r.n, r.stats.mean});
  }
  const SaturationFit x = fit_saturation(exp_pts);
  double ref = NAN, sigma = NAN;
  for (const auto& r : load_saturation_reference(testing::data_path("reference/sat_model.csv"))) {
    if (r.source == "experiment" && r.series == "optimized") {
      ref = r.fit.e_sat;
      sigma = r.fit.e_sat_sigma;
    }
  }
  const double z = std::abs(x.e_sat - ref) / sigma;
  return {err <= 0.01 && z <= 2.0,
          "noiseless max rel err " + fmt("%.2e", err) + ", experimental e_sat " +
              fmt("%.2fe-3", x.e_sat * 1e3) + fmt(" (%.2f sigma)", z)};
}

// 8. Baseline and optimized scaling both saturate; optimized well below.
Outcome scaling_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  ScalingSettings s;
  const ScalingResult r = run_scaling_sweep(s);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  for (const auto& p : r.points) {
    d << " N" << p.n << ":" << fmt("%.2f", p.baseline.mean * 1e3) << "/"
      << fmt("%.2f", p.optimized.mean * 1e3);
  }
  if (!r.baseline_fit_ok || !r.optimized_fit_ok) {
    return {false, "fit failed: " + r.baseline_fit_error + " " + r.optimized_fit_error + d.str()};
  }
  const double ratio = r.baseline_fit.e_sat / r.optimized_fit.e_sat;
  return {r.optimized_fit.e_sat < r.baseline_fit.e_sat && ratio >= 2.0 && secs < 7200.0,
          "e_sat baseline " + fmt("%.2fe-3", r.baseline_fit.e_sat * 1e3) + " optimized " +
              fmt("%.2fe-3", r.optimized_fit.e_sat * 1e3) + fmt(" ratio %.2f", ratio) +
              fmt(", %.0f s;", secs) + d.str()};
}

// 9. Full and incremental evaluation throughput on the 68-qubit instance.
Outcome throughput() {
  omp_set_num_threads(1);
  // Every parasitic combination: the largest 68-qubit component set.
  const Estimator e = build_estimator(testing::make_data(sycamore_like_68(), 9), kAllMechanisms,
                                      WeightTable::defaults(), true);
  const auto bounds = hard_bounds(e.data(), e.graph());
  std::mt19937_64 rng(9);
  std::vector<double> f = testing::random_config(bounds, rng);
  volatile double sink = 0.0;
  int full_evals = 0;
  auto t0 = std::chrono::steady_clock::now();
  while (seconds_since(t0) < 3.0) {
    sink = sink + e.evaluate(f);
    ++full_evals;
  }
  const double full_rate = full_evals / seconds_since(t0);

  IncrementalEvaluator inc(e, f);
  std::uniform_int_distribution<VarId> pick(0, static_cast<VarId>(e.num_vars()) - 1);
  int inc_evals = 0;
  t0 = std::chrono::steady_clock::now();
  while (seconds_since(t0) < 3.0) {
    const VarId v = pick(rng);
    std::uniform_int_distribution<std::int64_t> k(0, bounds[v].points() - 1);
    f[v] = bounds[v].at(k(rng));
    sink = sink + inc.evaluate_delta(f, {v});
    ++inc_evals;
  }
  const double inc_rate = inc_evals / seconds_since(t0);
  omp_set_num_threads(omp_get_num_procs());
  const double speedup = inc_rate / full_rate;
  return {full_rate >= 100.0 && speedup >= 20.0,
          std::to_string(e.num_vars()) + " vars, " + std::to_string(e.components().size()) +
              " components: " + fmt("%.0f full/s", full_rate) + ", incremental " +
              fmt("%.0fx faster", speedup)};
}

// 10. S=2 runtime is quadratic-or-better in N; S=1 < S=2 < S_max on d=5.
Outcome runtime_model() {
  SweepSettings st;
  st.parallel = false;
  std::vector<std::pair<double, double>> pts;
  std::ostringstream d;
  for (int dist = 3; dist <= 13; ++dist) {
    const auto data = testing::lattice_data(dist, 10 + dist);
    const auto runs = run_scope_sweep(data, {2}, {1}, st);
    pts.push_back({static_cast<double>(data->processor.num_qubits()), runs[0].seconds});
    d << " " << data->processor.num_qubits() << ":" << fmt("%.1f", runs[0].seconds);
  }
  const RuntimeFit fit = fit_runtime(pts);
  const auto runs = run_scope_sweep(testing::lattice_data(5, 15), {1, 2, kGlobalScope}, {1}, st);
  double t1 = 0, t2 = 0, tmax = 0;
  for (const auto& r : runs) (r.scope == 1 ? t1 : r.scope == 2 ? t2 : tmax) = r.seconds;
  return {fit.b > 0.0 && fit.r_squared >= 0.95 && t1 < t2 && t2 < tmax,
          fmt("b=%.3g", fit.b) + fmt(" c=%.3g", fit.c) + fmt(" R2=%.4f", fit.r_squared) +
              "; d=5 " + fmt("%.2f", t1) + " < " + fmt("%.2f", t2) + " < " + fmt("%.2f s", tmax) +
              ";" + d.str()};
}

// 11. Two identical seeded d=3 pipelines produce identical bundles.
Outcome determinism() {
  ::setenv("SOURCE_DATE_EPOCH", "0", 1);
  const fs::path root =
      fs::temp_directory_path() / ("snakeopt_acceptance_" + std::to_string(::getpid()));
  std::vector<std::string> bundles;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    auto p = [&](const char* n) { return (dir / n).string(); };
    const std::vector<std::vector<std::string>> steps{
        {"topo", "--distance", "3", "--out", p("proc.json")},
        {"gen", "--proc", p("proc.json"), "--seed", "11", "--out", p("char.json")},
        {"synth", "--char", p("char.json"), "--configs", "20", "--seed", "12", "--out",
         p("data.jsonl")},
        {"train", "--char", p("char.json"), "--data", p("data.jsonl"), "--seed", "13", "--out",
         p("weights.json")},
        {"optimize", "--char", p("char.json"), "--weights", p("weights.json"), "--seed", "14",
         "--out", p("opt.json")},
        {"heal", "--char", p("char.json"), "--weights", p("weights.json"), "--config",
         p("opt.json"), "--targets", "auto", "--seed", "15", "--out", p("healed.json")},
        {"report", "--char", p("char.json"), "--weights", p("weights.json"), "--config",
         p("healed.json"), "--out", p("report.json")}};
    std::string bundle;
    for (const auto& args : steps) {
      std::ostringstream out, err;
      if (run_cli(args, out, err) != kExitOk) {
        fs::remove_all(root);
        return {false, args[0] + " failed: " + err.str()};
      }
      bundle += out.str();
    }
    for (const char* n : {"proc.json", "char.json", "data.jsonl", "weights.json", "opt.json",
                          "healed.json", "report.json"}) {
      bundle += io::read_file(p(n));
    }
    bundles.push_back(std::move(bundle));
  }
  fs::remove_all(root);
  ::unsetenv("SOURCE_DATE_EPOCH");
  return {bundles[0] == bundles[1],
          std::to_string(bundles[0].size()) + " bytes per bundle" +
              (bundles[0] == bundles[1] ? ", identical" : ", differ")};
}

// 12. Training recovers generating weights and tolerates 10% noise.
Outcome weight_recovery() {
  const Estimator truth =
      build_estimator(testing::lattice_data(3, 21), kAllMechanisms, WeightTable::defaults());
  const auto bounds = hard_bounds(truth.data(), truth.graph());
  auto synth = [&](double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<BenchmarkSample> out;
    for (int i = 0; i < 40; ++i) {
      const auto c = testing::random_config(bounds, rng);
      out.push_back(synthesize_benchmarks(truth, c, SampleTag::isolated, noise, rng));
      out.push_back(synthesize_benchmarks(truth, c, SampleTag::parallel, noise, rng));
    }
    return out;
  };
  TrainOptions opt;
  opt.seed = 1;
  const TrainResult clean = train_weights(truth, synth(0.0, 1), opt);
  double worst = 0.0;
  std::string worst_group;
  for (int g = 0; g < kNumGroups; ++g) {
    const double rel = std::abs(clean.weights[g] / truth.weights()[g] - 1.0);
    if (rel >= worst) {
      worst = rel;
      worst_group = group_name(g);
    }
  }
  opt.seed = 2;
  const TrainResult noisy = train_weights(truth, synth(0.10, 2), opt);
  const double rel = accuracy_report(noisy.test_predicted, noisy.test_measured).median_relative;
  return {worst <= 0.05 && rel <= 0.30,
          "worst group " + worst_group + fmt(" %.2e rel", worst) + ", noisy test median " +
              fmt("%.3f", rel)};
}

}  // namespace
}  // namespace snakeopt

int main(int argc, char** argv) {
  using namespace snakeopt;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"brute-force oracle equivalence", brute_force_equivalence},
      {"snake-estimator containment", containment},
      {"scope trend", scope_trend},
      {"mitigation trend", mitigation_trend},
      {"healing contract", healing_contract},
      {"stitching parity", stitching_parity},
      {"saturation-model fitting", saturation_fit},
      {"scaling trend", scaling_trend},
      {"throughput", throughput},
      {"runtime model", runtime_model},
      {"determinism", determinism},
      {"weight recovery", weight_recovery}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
