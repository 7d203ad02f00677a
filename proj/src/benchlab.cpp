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

#include "snakeopt/benchlab.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace snakeopt {

namespace {

constexpr double kTableScale = 1e-3;

double seconds_between(std::chrono::steady_clock::time_point a,
                       std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, const std::string& path, int line_no) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw InputError(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
  }
}

/// Header-indexed CSV rows with comment lines removed.
struct CsvTable {
  std::map<std::string, std::size_t> column;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  CsvTable t;
  std::string line;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (!header) {
      for (std::size_t i = 0; i < cells.size(); ++i) t.column[cells[i]] = i;
      header = true;
      continue;
    }
    cells.resize(std::max(cells.size(), t.column.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (!header) throw InputError(path + ": missing header");
  return t;
}

}  // namespace

std::vector<double> random_baseline(const std::vector<Interval>& bounds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> f(bounds.size());
  for (std::size_t v = 0; v < bounds.size(); ++v) {
    if (!(bounds[v].lo <= bounds[v].hi) || bounds[v].points() < 1) {
      throw EmptyBoundsError("empty hard bounds for variable " + std::to_string(v));
    }
    std::uniform_int_distribution<std::int64_t> pick(0, bounds[v].points() - 1);
    f[v] = bounds[v].at(pick(rng));
  }
  return f;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PercentileReport percentile_report(const std::vector<double>& values) {
  if (values.empty()) throw InputError("percentile report of an empty sample");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  PercentileReport r;
  r.min = v.front();
  r.max = v.back();
  // Sorted-order summation keeps the mean independent of input order.
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  r.p2_5 = percentile(v, 2.5);
  r.p25 = percentile(v, 25.0);
  r.p50 = percentile(v, 50.0);
  r.p75 = percentile(v, 75.0);
  r.p97_5 = percentile(v, 97.5);
  return r;
}

double outlier_fraction(const std::vector<double>& cycle_errors, double threshold) {
  if (cycle_errors.empty()) return 0.0;
  const auto n = std::count_if(cycle_errors.begin(), cycle_errors.end(),
                               [&](double e) { return e >= threshold; });
  return static_cast<double>(n) / static_cast<double>(cycle_errors.size());
}

double SaturationFit::predict(double n) const {
  return e_sat - e_scale * std::exp(-n / n_sat);
}

namespace {

/// Residuals of the saturation model in units of the largest |y|.
struct SaturationFunctor {
  std::vector<double> n, y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(n.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const double ns = std::exp(x[2]);
    for (std::size_t i = 0; i < n.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = x[0] - x[1] * std::exp(-n[i] / ns) - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    const double ns = std::exp(x[2]);
    for (std::size_t i = 0; i < n.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double ex = std::exp(-n[i] / ns);
      j(row, 0) = 1.0;
      j(row, 1) = -ex;
      j(row, 2) = -x[1] * ex * (n[i] / ns);
    }
    return 0;
  }
};

}  // namespace

SaturationFit fit_saturation(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw InputError("saturation fit needs at least 4 points");
  SaturationFunctor fn;
  double ymax = 0.0;
  for (const auto& [n, y] : points) {
    if (!std::isfinite(n) || !std::isfinite(y) || n <= 0.0) {
      throw InputError("saturation fit needs finite points with N > 0");
    }
    fn.n.push_back(n);
    fn.y.push_back(y);
    ymax = std::max(ymax, std::abs(y));
  }
  std::vector<double> distinct = fn.n;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw InputError("saturation fit needs at least 2 distinct N");
  const double scale = ymax > 0.0 ? ymax : 1.0;
  for (double& y : fn.y) y /= scale;

  const auto [ymin_it, ymax_it] = std::minmax_element(fn.y.begin(), fn.y.end());
  Eigen::VectorXd x(3);
  x << *ymax_it, *ymax_it - *ymin_it, std::log(median(fn.n));

  Eigen::VectorXd r(fn.values());
  fn(x, r);
  SaturationFit out;
  if (r.squaredNorm() > 0.0) {
    Eigen::LevenbergMarquardt<SaturationFunctor> lm(fn);
    lm.parameters.maxfev = 4000;
    lm.parameters.ftol = 1e-14;
    lm.parameters.xtol = 1e-14;
    const auto status = lm.minimize(x);
    out.iterations = static_cast<int>(lm.iter);
    using namespace Eigen::LevenbergMarquardtSpace;
    const bool converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                           status == RelativeErrorAndReductionTooSmall ||
                           status == CosinusTooSmall || status == FtolTooSmall ||
                           status == XtolTooSmall || status == GtolTooSmall;
    fn(x, r);
    if (!converged || !x.allFinite()) {
      std::ostringstream msg;
      msg << "saturation fit did not converge (status " << static_cast<int>(status)
          << "); residuals:";
      for (Eigen::Index i = 0; i < r.size(); ++i) msg << ' ' << r[i] * scale;
      throw NumericalError(msg.str());
    }
  }
  Eigen::MatrixXd j(fn.values(), 3);
  fn.df(x, j);
  const double rss = r.squaredNorm();
  const int dof = fn.values() - 3;
  const double s2 = dof > 0 ? rss / dof : std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const Eigen::MatrixXd cov = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();

  out.e_sat = x[0] * scale;
  out.e_scale = x[1] * scale;
  out.n_sat = std::exp(x[2]);
  out.e_sat_sigma = std::sqrt(std::max(0.0, cov(0, 0))) * scale;
  out.e_scale_sigma = std::sqrt(std::max(0.0, cov(1, 1))) * scale;
  out.n_sat_sigma = out.n_sat * std::sqrt(std::max(0.0, cov(2, 2)));
  out.rss = rss * scale * scale;
  return out;
}

RuntimeFit fit_runtime(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw InputError("runtime fit needs at least 4 points");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd x(m, 3);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double n = points[static_cast<std::size_t>(i)].first;
    x(i, 0) = 1.0;
    x(i, 1) = n;
    x(i, 2) = n * n;
    y[i] = points[static_cast<std::size_t>(i)].second;
  }
  if (!x.allFinite() || !y.allFinite()) throw InputError("runtime fit needs finite points");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 3) throw NumericalError("runtime fit design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd res = y - x * beta;

  RuntimeFit out;
  out.a = beta[0];
  out.b = beta[1];
  out.c = beta[2];
  out.residuals.assign(res.data(), res.data() + res.size());
  const double rss = res.squaredNorm();
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  out.r_squared = tss > 0.0 ? 1.0 - rss / tss : (rss == 0.0 ? 1.0 : 0.0);
  const double s2 = rss / static_cast<double>(m - 3);
  const Eigen::MatrixXd cov = s2 * (x.transpose() * x).inverse();
  out.a_sigma = std::sqrt(std::max(0.0, cov(0, 0)));
  out.b_sigma = std::sqrt(std::max(0.0, cov(1, 1)));
  out.c_sigma = std::sqrt(std::max(0.0, cov(2, 2)));
  return out;
}

std::vector<TableRow> load_reference_table(const std::string& path) {
  const CsvTable t = read_csv(path);
  for (const char* need : {"benchmark", "label", "mean"}) {
    if (!t.column.count(need)) throw InputError(path + ": missing column " + need);
  }
  auto cell = [&](const std::vector<std::string>& row, const std::string& name) -> std::string {
    const auto it = t.column.find(name);
    return it == t.column.end() ? std::string() : row[it->second];
  };
  std::vector<TableRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const int ln = t.line_numbers[i];
    TableRow r;
    r.benchmark = cell(row, "benchmark");
    r.label = cell(row, "label");
    r.scope = cell(row, "scope");
    r.n = parse_cell(cell(row, "N"), path, ln);
    const double configs = parse_cell(cell(row, "configurations"), path, ln);
    r.configurations = std::isnan(configs) ? 0 : static_cast<int>(configs);
    auto stat = [&](const char* name) { return parse_cell(cell(row, name), path, ln) * kTableScale; };
    r.stats.mean = stat("mean");
    r.stats.min = stat("min");
    r.stats.max = stat("max");
    r.stats.p2_5 = stat("p2.5");
    r.stats.p25 = stat("p25");
    r.stats.p50 = stat("p50");
    r.stats.p75 = stat("p75");
    r.stats.p97_5 = stat("p97.5");
    // Placeholder rows carry no statistics at all.
    if (std::isnan(r.stats.mean) && std::isnan(r.stats.min) && std::isnan(r.stats.p50) &&
        std::isnan(r.stats.max)) {
      continue;
    }
    if (std::isnan(r.stats.mean)) throw InputError(path + ":" + std::to_string(ln) + ": missing mean");
    r.has_stats = !std::isnan(r.stats.p50);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SaturationReference> load_saturation_reference(const std::string& path) {
  const CsvTable t = read_csv(path);
  for (const char* need : {"source", "series", "N_sat", "N_sat_sigma", "e_sat", "e_sat_sigma",
                           "e_scale", "e_scale_sigma"}) {
    if (!t.column.count(need)) throw InputError(path + ": missing column " + need);
  }
  std::vector<SaturationReference> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const int ln = t.line_numbers[i];
    auto num = [&](const char* name) { return parse_cell(row[t.column.at(name)], path, ln); };
    SaturationReference s;
    s.source = row[t.column.at("source")];
    s.series = row[t.column.at("series")];
    s.fit.n_sat = num("N_sat");
    s.fit.n_sat_sigma = num("N_sat_sigma");
    s.fit.e_sat = num("e_sat") * kTableScale;
    s.fit.e_sat_sigma = num("e_sat_sigma") * kTableScale;
    s.fit.e_scale = num("e_scale") * kTableScale;
    s.fit.e_scale_sigma = num("e_scale_sigma") * kTableScale;
    out.push_back(std::move(s));
  }
  return out;
}

Standards load_standards(const std::string& path) {
  const auto rows = load_reference_table(path);
  Standards s;
  bool baseline = false, crossover = false;
  for (const auto& r : rows) {
    if (r.benchmark != "CZXEB") continue;
    if (r.label == "Outlier") s.outlier = r.stats.mean;
    if (r.label == "Baseline" && r.has_stats) {
      s.baseline = r.stats;
      baseline = true;
    }
    if (r.label == "Crossover" && r.has_stats) {
      s.crossover = r.stats;
      crossover = true;
    }
  }
  if (!baseline || !crossover) throw InputError(path + ": missing Baseline or Crossover row");
  return s;
}

std::string to_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "# values x 1e-3\n"
      << "benchmark,N,configurations,label,scope,min,max,mean,p2.5,p25,p50,p75,p97.5\n";
  char buf[64];
  auto num = [&](double v) -> std::string {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof buf, "%.4f", v / kTableScale);
    return buf;
  };
  for (const auto& r : rows) {
    out << r.benchmark << ',';
    if (!std::isnan(r.n)) out << static_cast<long long>(std::llround(r.n));
    out << ',';
    if (r.configurations > 0) out << r.configurations;
    out << ',' << r.label << ',' << r.scope << ',';
    if (r.has_stats) {
      out << num(r.stats.min) << ',' << num(r.stats.max) << ',' << num(r.stats.mean) << ','
          << num(r.stats.p2_5) << ',' << num(r.stats.p25) << ',' << num(r.stats.p50) << ','
          << num(r.stats.p75) << ',' << num(r.stats.p97_5);
    } else {
      out << ",," << num(r.stats.mean) << ",,,,,";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::int64_t total_evaluations(const SnakeResult& r) {
  std::int64_t n = 0;
  for (const auto& t : r.trace) n += t.evaluations;
  return n;
}

/// Runs jobs 0..n-1, on the OpenMP pool when `parallel`.
template <typename F>
void for_jobs(std::size_t n, bool parallel, F&& job) {
  if (parallel) {
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      try {
        job(static_cast<std::size_t>(i));
      } catch (const std::exception& ex) {
        errors[static_cast<std::size_t>(i)] = ex.what();
      }
    }
    for (const auto& e : errors) {
      if (!e.empty()) throw NumericalError(e);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) job(i);
  }
}

}  // namespace

std::vector<ScopeRun> run_scope_sweep(std::shared_ptr<const CharacterizationData> data,
                                      const std::vector<int>& scopes,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SweepSettings& settings) {
  if (scopes.empty() || seeds.empty()) throw InputError("scope sweep needs scopes and seeds");
  if (data->processor.num_couplers() == 0) throw InputError("scope sweep needs couplers");
  settings.params.validate();
  const Estimator e = build_estimator(data, kAllMechanisms, settings.weights);
  const auto bounds = hard_bounds(*data, e.graph(), settings.bounds);

  const bool has_global =
      std::find(scopes.begin(), scopes.end(), kGlobalScope) != scopes.end();
  const bool has_two = std::find(scopes.begin(), scopes.end(), 2) != scopes.end();
  // Local runs first; global runs need the S=2 step count of their seed.
  std::vector<int> local;
  for (int s : scopes) {
    if (s != kGlobalScope) local.push_back(s);
  }
  if (has_global && !has_two) local.push_back(2);

  struct Job {
    std::uint64_t seed;
    int scope;
  };
  auto run_one = [&](const Job& j, std::int64_t global_budget) {
    SnakeParams p = settings.params;
    p.scope = j.scope;
    p.seed = j.seed;
    p.global_budget = global_budget;
    p.validate();
    SnakeResult r = optimize(e, bounds, p, false);
    ScopeRun out;
    out.seed = j.seed;
    out.scope = j.scope;
    const auto pred = predict_benchmarks(e, r.values);
    out.e_cycle = percentile_report(pred.e_cycle);
    out.outlier_fraction = outlier_fraction(pred.e_cycle);
    out.energy = r.energy;
    out.evaluations = total_evaluations(r);
    out.steps = r.trace.size();
    out.budget = j.scope == kGlobalScope ? global_budget : 0;
    out.seconds = r.seconds;
    return out;
  };

  std::vector<Job> first;
  for (auto seed : seeds) {
    for (int s : local) first.push_back({seed, s});
  }
  std::vector<ScopeRun> first_runs(first.size());
  for_jobs(first.size(), settings.parallel,
           [&](std::size_t i) { first_runs[i] = run_one(first[i], 0); });

  std::vector<ScopeRun> global_runs(has_global ? seeds.size() : 0);
  if (has_global) {
    for_jobs(seeds.size(), settings.parallel, [&](std::size_t i) {
      std::int64_t steps = 0;
      for (std::size_t k = 0; k < first.size(); ++k) {
        if (first[k].seed == seeds[i] && first[k].scope == 2) {
          steps = static_cast<std::int64_t>(first_runs[k].steps);
        }
      }
      global_runs[i] = run_one({seeds[i], kGlobalScope}, steps * settings.params.solver.budget);
    });
  }

  // Reduce in (seed, scope-list) order.
  std::vector<ScopeRun> out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (int s : scopes) {
      if (s == kGlobalScope) {
        out.push_back(global_runs[i]);
        continue;
      }
      for (std::size_t k = 0; k < first.size(); ++k) {
        if (first[k].seed == seeds[i] && first[k].scope == s) {
          out.push_back(first_runs[k]);
          break;
        }
      }
    }
  }
  return out;
}

std::vector<MitigationRun> run_mitigation_sweep(std::shared_ptr<const CharacterizationData> data,
                                                std::vector<unsigned> subsets,
                                                const std::vector<std::uint64_t>& seeds,
                                                const SweepSettings& settings) {
  if (seeds.empty()) throw InputError("mitigation sweep needs seeds");
  if (data->processor.num_couplers() == 0) throw InputError("mitigation sweep needs couplers");
  if (subsets.empty()) {
    for (unsigned f = 0; f <= kAllMechanisms; ++f) subsets.push_back(f);
  }
  for (unsigned f : subsets) {
    if (f > kAllMechanisms) throw InputError("unknown mechanism flags " + std::to_string(f));
  }
  settings.params.validate();
  const Estimator full = build_estimator(data, kAllMechanisms, settings.weights);
  const auto bounds = hard_bounds(*data, full.graph(), settings.bounds);
  std::map<unsigned, Estimator> partial;
  for (unsigned f : subsets) {
    if (f != 0 && !partial.count(f)) partial.emplace(f, build_estimator(data, f, settings.weights));
  }

  const std::size_t n = seeds.size() * subsets.size();
  std::vector<MitigationRun> out(n);
  for_jobs(n, settings.parallel, [&](std::size_t i) {
    const std::uint64_t seed = seeds[i / subsets.size()];
    const unsigned flags = subsets[i % subsets.size()];
    std::vector<double> f;
    if (flags == 0) {
      // No mechanism gives no objective: the configuration stays random.
      f = random_baseline(bounds, seed);
    } else {
      SnakeParams p = settings.params;
      p.seed = seed;
      f = optimize(partial.at(flags), bounds, p, false).values;
    }
    MitigationRun r;
    r.seed = seed;
    r.flags = flags;
    const auto pred = predict_benchmarks(full, f);
    r.e_cycle = percentile_report(pred.e_cycle);
    r.outlier_fraction = outlier_fraction(pred.e_cycle);
    r.energy = full.evaluate_serial(f);
    const auto& g = full.graph();
    std::vector<double> detuning;
    for (std::size_t q = 0; q < data->qubits.size(); ++q) {
      detuning.push_back(data->qubits[q].f_max_ghz - f[g.idle_var(static_cast<int>(q))]);
    }
    r.median_idle_detuning_ghz = median(detuning);
    out[i] = std::move(r);
  });
  return out;
}

std::vector<TableRow> ScalingResult::table() const {
  std::vector<TableRow> rows;
  for (const auto& p : points) {
    auto add = [&](const char* label, const PercentileReport& r) {
      TableRow row;
      row.benchmark = "CZXEB";
      row.n = p.n;
      row.configurations = p.configurations;
      row.label = label;
      row.stats = r;
      row.has_stats = true;
      rows.push_back(std::move(row));
    };
    add("Baseline", p.baseline);
    add("Optimized", p.optimized);
    if (p.has_stitched) add("Stitched", p.stitched);
  }
  return rows;
}

ScalingResult run_scaling_sweep(const ScalingSettings& settings) {
  if (settings.distances.empty() || settings.seeds.empty()) {
    throw InputError("scaling sweep needs distances and seeds");
  }
  settings.priors.validate();
  settings.sweep.params.validate();

  struct Job {
    int distance;
    int n;
    std::uint64_t seed;
    int config;
  };
  struct JobResult {
    std::vector<double> baseline, optimized, stitched;
    double seconds = 0.0;
  };
  std::vector<Job> jobs;
  std::vector<ProcessorGraph> graphs;
  for (int d : settings.distances) {
    graphs.push_back(build_surface_code_lattice(d));
    const int n = static_cast<int>(graphs.back().qubits().size());
    const int configs = n < settings.small_n_threshold ? std::max(1, settings.small_n_configs) : 1;
    for (auto seed : settings.seeds) {
      for (int c = 0; c < configs; ++c) jobs.push_back({d, n, seed, c});
    }
  }

  std::vector<JobResult> results(jobs.size());
  for_jobs(jobs.size(), settings.sweep.parallel, [&](std::size_t i) {
    const Job& j = jobs[i];
    const auto gi = static_cast<std::size_t>(
        std::find(settings.distances.begin(), settings.distances.end(), j.distance) -
        settings.distances.begin());
    GenerativeSpec spec = settings.priors;
    spec.seed = mix_seed(mix_seed(mix_seed(settings.priors.seed, static_cast<std::uint64_t>(j.distance)),
                                  j.seed),
                         static_cast<std::uint64_t>(j.config));
    auto data = std::make_shared<const CharacterizationData>(generate_processor(spec, graphs[gi]));
    const Estimator e = build_estimator(data, kAllMechanisms, settings.sweep.weights);
    const auto bounds = hard_bounds(*data, e.graph(), settings.sweep.bounds);
    JobResult r;
    r.baseline = predict_benchmarks(e, random_baseline(bounds, mix_seed(spec.seed, 1))).e_cycle;
    SnakeParams p = settings.sweep.params;
    p.seed = spec.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const SnakeResult opt = optimize(e, bounds, p, false);
    r.seconds = seconds_between(t0, std::chrono::steady_clock::now());
    r.optimized = predict_benchmarks(e, opt.values).e_cycle;
    if (settings.stitch_regions > 1) {
      const StitchPlan plan = make_stitch_plan(e, settings.stitch_regions);
      r.stitched = predict_benchmarks(e, stitch(e, bounds, plan, p, false).values).e_cycle;
    }
    results[i] = std::move(r);
  });

  ScalingResult out;
  for (int d : settings.distances) {
    ScalingPoint pt;
    pt.distance = d;
    std::vector<double> base, opt, st;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].distance != d) continue;
      pt.n = jobs[i].n;
      ++pt.configurations;
      base.insert(base.end(), results[i].baseline.begin(), results[i].baseline.end());
      opt.insert(opt.end(), results[i].optimized.begin(), results[i].optimized.end());
      st.insert(st.end(), results[i].stitched.begin(), results[i].stitched.end());
      pt.optimize_seconds += results[i].seconds;
    }
    pt.baseline = percentile_report(base);
    pt.optimized = percentile_report(opt);
    if (!st.empty()) {
      pt.stitched = percentile_report(st);
      pt.has_stitched = true;
    }
    out.points.push_back(pt);
  }

  std::vector<std::pair<double, double>> base_pts, opt_pts;
  for (const auto& p : out.points) {
    base_pts.emplace_back(p.n, p.baseline.mean);
    opt_pts.emplace_back(p.n, p.optimized.mean);
  }
  try {
    out.baseline_fit = fit_saturation(base_pts);
    out.baseline_fit_ok = true;
  } catch (const Error& ex) {
    out.baseline_fit_error = ex.what();
  }
  try {
    out.optimized_fit = fit_saturation(opt_pts);
    out.optimized_fit_ok = true;
  } catch (const Error& ex) {
    out.optimized_fit_error = ex.what();
  }
  return out;
}

}  // namespace snakeopt
