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
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "snakeopt/estimator.hpp"
#include "snakeopt/genmodel.hpp"
#include "snakeopt/snake.hpp"

namespace snakeopt {

/// Cycle error above which a gate counts as an outlier, at every size.
inline constexpr double kOutlierCycleError = 1.5e-2;

/// Uniform draw per variable over the grid points of its bounds.
std::vector<double> random_baseline(const std::vector<Interval>& bounds, std::uint64_t seed);

struct PercentileReport {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double p2_5 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p97_5 = 0.0;
};

/// Linear-interpolated percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);
/// Throws InputError on empty input.
PercentileReport percentile_report(const std::vector<double>& values);

double outlier_fraction(const std::vector<double>& cycle_errors,
                        double threshold = kOutlierCycleError);

/// <e_c>(N) = e_sat - e_scale exp(-N / N_sat).
struct SaturationFit {
  double n_sat = 0.0, n_sat_sigma = 0.0;
  double e_scale = 0.0, e_scale_sigma = 0.0;
  double e_sat = 0.0, e_sat_sigma = 0.0;
  double rss = 0.0;
  int iterations = 0;

  double predict(double n) const;
};

/// Levenberg-Marquardt in (e_sat, e_scale, log N_sat) starting from
/// e_sat = max, e_scale = max - min, N_sat = median N. Throws InputError
/// for fewer than 4 points or fewer than 2 distinct N, NumericalError with
/// the residuals when the solver does not converge.
SaturationFit fit_saturation(const std::vector<std::pair<double, double>>& points);

/// r = a + b N + c N^2 by least squares.
struct RuntimeFit {
  double a = 0.0, a_sigma = 0.0;
  double b = 0.0, b_sigma = 0.0;
  double c = 0.0, c_sigma = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;

  double predict(double n) const { return a + b * n + c * n * n; }
};

/// Throws InputError for fewer than 4 points, NumericalError on a
/// rank-deficient design (fewer than 3 distinct N).
RuntimeFit fit_runtime(const std::vector<std::pair<double, double>>& points);

/// One row of a reference or generated benchmark table. Errors are absolute.
struct TableRow {
  std::string benchmark;
  double n = 0.0;  // NaN when absent
  int configurations = 0;  // 0 when absent
  std::string label;
  std::string scope;
  PercentileReport stats;
  bool has_stats = false;  // false for rows that only carry a mean
};

/// Reads a benchmark table CSV. Columns are matched by header name; error
/// columns are stored in units of 1e-3 and returned absolute. Lines starting
/// with '#' are comments. Throws InputError.
std::vector<TableRow> load_reference_table(const std::string& path);

struct SaturationReference {
  std::string source;  // "experiment" or "simulation"
  std::string series;  // "baseline" or "optimized"
  SaturationFit fit;
};

/// Reads saturation-model parameters (errors in units of 1e-3).
std::vector<SaturationReference> load_saturation_reference(const std::string& path);

struct Standards {
  double outlier = kOutlierCycleError;
  PercentileReport baseline;   // 68-qubit random configuration
  PercentileReport crossover;  // 49-qubit error-correction crossover
};

/// CZXEB standards replayed from the scope-sweep reference table.
Standards load_standards(const std::string& path);

/// Columns: benchmark,N,configurations,label,scope,min,max,mean,p2.5,p25,
/// p50,p75,p97.5 with errors in units of 1e-3; readable by
/// load_reference_table.
std::string to_csv(const std::vector<TableRow>& rows);

/// Shared knobs for the sweeps.
struct SweepSettings {
  WeightTable weights = WeightTable::defaults();
  SnakeParams params;
  BoundsOptions bounds;
  /// Jobs run on an OpenMP pool; results are ordered by job key either way.
  bool parallel = true;
};

struct ScopeRun {
  std::uint64_t seed = 0;
  int scope = 0;
  PercentileReport e_cycle;
  double outlier_fraction = 0.0;
  double energy = 0.0;
  std::int64_t evaluations = 0;
  std::size_t steps = 0;
  std::int64_t budget = 0;  // stochastic budget of global-scope runs
  double seconds = 0.0;
};

/// Optimizes `data` at every scope for every seed. kGlobalScope runs get a
/// stochastic budget of (S=2 step count) x (per-subproblem budget).
std::vector<ScopeRun> run_scope_sweep(std::shared_ptr<const CharacterizationData> data,
                                      const std::vector<int>& scopes,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SweepSettings& settings = {});

struct MitigationRun {
  std::uint64_t seed = 0;
  unsigned flags = 0;
  PercentileReport e_cycle;
  double outlier_fraction = 0.0;
  double energy = 0.0;  // full estimator
  double median_idle_detuning_ghz = 0.0;
};

/// Optimizes against each mechanism subset and scores every result with the
/// full estimator. Empty `subsets` means all 16.
std::vector<MitigationRun> run_mitigation_sweep(std::shared_ptr<const CharacterizationData> data,
                                                std::vector<unsigned> subsets,
                                                const std::vector<std::uint64_t>& seeds,
                                                const SweepSettings& settings = {});

struct ScalingSettings {
  std::vector<int> distances{3, 5, 7, 9, 11};
  std::vector<std::uint64_t> seeds{1};
  GenerativeSpec priors;
  SweepSettings sweep;
  /// Sizes below this many qubits pool this many processors per seed.
  int small_n_threshold = 40;
  int small_n_configs = 3;
  int stitch_regions = 0;  // > 1 adds a stitched series
};

struct ScalingPoint {
  int distance = 0;
  int n = 0;
  int configurations = 0;
  PercentileReport baseline;
  PercentileReport optimized;
  PercentileReport stitched;
  bool has_stitched = false;
  double optimize_seconds = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  SaturationFit baseline_fit;
  SaturationFit optimized_fit;
  bool baseline_fit_ok = false;
  bool optimized_fit_ok = false;
  std::string baseline_fit_error;
  std::string optimized_fit_error;

  std::vector<TableRow> table() const;
};

ScalingResult run_scaling_sweep(const ScalingSettings& settings);

}  // namespace snakeopt
