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

#include "snakeopt/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace snakeopt {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid generative prior: ") + what);
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

double draw_normal(std::mt19937_64& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(rng);
}

double draw_lognormal(std::mt19937_64& rng, double median, double sigma) {
  if (sigma == 0.0) return median;
  return std::lognormal_distribution<double>(std::log(median), sigma)(rng);
}

double draw_uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double draw_truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo,
                             double hi) {
  if (sd == 0.0) return mean;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = draw_normal(rng, mean, sd);
    if (x >= lo && x <= hi) return x;
  }
  throw std::invalid_argument("invalid generative prior: f_max band has negligible mass");
}

SpectrumGrid make_grid(const GenerativeSpec& spec) {
  SpectrumGrid g;
  g.f0_ghz = spec.band_lo_ghz - spec.grid_margin_below_ghz;
  g.step_ghz = spec.grid_step_ghz;
  g.size = static_cast<int>(
               std::llround((spec.band_hi_ghz - g.f0_ghz) / spec.grid_step_ghz)) +
           1;
  return g;
}

}  // namespace

void GenerativeSpec::validate() const {
  require(finite_all({fmax_mean_ghz, fmax_sd_ghz, band_lo_ghz, band_hi_ghz, eta_ghz,
                      t1_bg_lo_us, t1_bg_hi_us, tls_density_per_ghz, tls_width_lo_mhz,
                      tls_width_hi_mhz, tls_depth_median_per_us, tls_depth_sigma,
                      chi_nn_sd_mhz, chi_nnn_sd_mhz, readout_mean_ghz, readout_sd_ghz,
                      readout_exclusion_ghz, delta1_median_per_ghz, delta2_median_per_ghz2,
                      delta_sigma, grid_margin_below_ghz, grid_step_ghz}),
          "non-finite hyperparameter");
  require(band_lo_ghz > 0.0 && band_lo_ghz < band_hi_ghz, "f_max band must satisfy 0 < lo < hi");
  require(fmax_sd_ghz >= 0.0, "f_max sd must be >= 0");
  require(fmax_mean_ghz >= band_lo_ghz && fmax_mean_ghz <= band_hi_ghz,
          "f_max mean must lie inside the band");
  require(eta_ghz < 0.0, "anharmonicity must be negative");
  require(t1_bg_lo_us > 0.0 && t1_bg_lo_us <= t1_bg_hi_us, "T1 background range");
  require(tls_density_per_ghz >= 0.0, "TLS density must be >= 0");
  require(tls_width_lo_mhz > 0.0 && tls_width_lo_mhz <= tls_width_hi_mhz, "TLS width range");
  require(tls_depth_median_per_us > 0.0 && tls_depth_sigma >= 0.0, "TLS depth prior");
  require(chi_nn_sd_mhz >= 0.0 && chi_nnn_sd_mhz >= 0.0, "stray coupling sd must be >= 0");
  require(readout_sd_ghz >= 0.0 && readout_exclusion_ghz >= 0.0, "readout prior");
  require(delta1_median_per_ghz > 0.0 && delta2_median_per_ghz2 > 0.0 && delta_sigma >= 0.0,
          "distortion prior");
  require(grid_step_ghz > 0.0 && grid_step_ghz <= 0.002, "grid step must be in (0, 2 MHz]");
  require(grid_margin_below_ghz >= 0.0 && band_lo_ghz - grid_margin_below_ghz > 0.0,
          "grid margin");
}

double CharacterizationData::t1_inv_at(int q, double f) const {
  const auto& s = qubits[q].t1_inv;
  const double x = (f - grid.f0_ghz) / grid.step_ghz;
  if (x <= 0.0) return s.front();
  if (x >= grid.size - 1) return s.back();
  const int k = static_cast<int>(x);
  const double t = x - k;
  return s[k] + t * (s[k + 1] - s[k]);
}

double CharacterizationData::dfdphi_at(int q, double f) const {
  const auto& qc = qubits[q];
  if (f >= qc.f_max_ghz) return 0.0;
  const auto& s = qc.dfdphi;
  const double x = (f - grid.f0_ghz) / grid.step_ghz;
  if (x <= 0.0) return s.front();
  const int k = std::min(static_cast<int>(x), grid.size - 2);
  const double f_lo = grid.freq(k);
  double f_hi = grid.freq(k + 1);
  double v_hi = s[k + 1];
  if (f_hi >= qc.f_max_ghz) {
    f_hi = qc.f_max_ghz;
    v_hi = 0.0;
  }
  if (f_hi <= f_lo) return s[k];
  const double t = (f - f_lo) / (f_hi - f_lo);
  return s[k] + t * (v_hi - s[k]);
}

double flux_sensitivity(double f, double f_max) {
  if (f >= f_max || f <= 0.0) return 0.0;
  const double r = f / f_max;
  const double r4 = r * r * r * r;
  return std::numbers::pi * f_max * f_max / (2.0 * f) * std::sqrt(1.0 - r4);
}

std::vector<std::pair<int, int>> parasitic_pairs(const ProcessorGraph& graph,
                                                 std::vector<bool>* nearest) {
  std::map<std::pair<int, int>, int> at;
  for (std::size_t i = 0; i < graph.num_qubits(); ++i) {
    at[{graph.qubits()[i].x, graph.qubits()[i].y}] = static_cast<int>(i);
  }
  std::map<std::pair<int, int>, bool> found;
  static constexpr int kOffsets[][3] = {
      {1, 0, 1}, {0, 1, 1}, {1, 1, 0}, {1, -1, 0}, {2, 0, 0}, {0, 2, 0}};
  for (std::size_t i = 0; i < graph.num_qubits(); ++i) {
    const auto& q = graph.qubits()[i];
    for (const auto& off : kOffsets) {
      auto it = at.find({q.x + off[0], q.y + off[1]});
      if (it == at.end()) continue;
      const int a = std::min(static_cast<int>(i), it->second);
      const int b = std::max(static_cast<int>(i), it->second);
      found[{a, b}] = off[2] == 1;
    }
  }
  std::vector<std::pair<int, int>> out;
  if (nearest) nearest->clear();
  for (const auto& [pair, nn] : found) {
    out.push_back(pair);
    if (nearest) nearest->push_back(nn);
  }
  return out;
}

ArchitecturalParams sample_architecture(const GenerativeSpec& spec,
                                        const ProcessorGraph& graph) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const SpectrumGrid grid = make_grid(spec);
  const double span = grid.hi_ghz() - grid.f0_ghz;

  ArchitecturalParams arch;
  arch.qubits.reserve(graph.num_qubits());
  for (std::size_t i = 0; i < graph.num_qubits(); ++i) {
    QubitParams q;
    q.f_max_ghz = draw_truncated_normal(rng, spec.fmax_mean_ghz, spec.fmax_sd_ghz,
                                        spec.band_lo_ghz, spec.band_hi_ghz);
    q.eta_ghz = spec.eta_ghz;
    q.t1_bg_us = draw_uniform(rng, spec.t1_bg_lo_us, spec.t1_bg_hi_us);
    int n_tls = 0;
    if (spec.tls_density_per_ghz > 0.0) {
      n_tls = std::poisson_distribution<int>(spec.tls_density_per_ghz * span)(rng);
    }
    for (int t = 0; t < n_tls; ++t) {
      Tls tls;
      tls.freq_ghz = draw_uniform(rng, grid.f0_ghz, grid.hi_ghz());
      tls.width_mhz = std::exp(draw_uniform(rng, std::log(spec.tls_width_lo_mhz),
                                            std::log(spec.tls_width_hi_mhz)));
      tls.depth_per_us = draw_lognormal(rng, spec.tls_depth_median_per_us, spec.tls_depth_sigma);
      q.tls.push_back(tls);
    }
    q.readout_ghz = draw_normal(rng, spec.readout_mean_ghz, spec.readout_sd_ghz);
    q.delta1 = draw_lognormal(rng, spec.delta1_median_per_ghz, spec.delta_sigma);
    q.delta2 = draw_lognormal(rng, spec.delta2_median_per_ghz2, spec.delta_sigma);
    arch.qubits.push_back(std::move(q));
  }

  std::vector<bool> nearest;
  const auto pairs = parasitic_pairs(graph, &nearest);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double sd = nearest[k] ? spec.chi_nn_sd_mhz : spec.chi_nnn_sd_mhz;
    arch.stray.push_back(
        {pairs[k].first, pairs[k].second, std::abs(draw_normal(rng, 0.0, sd)), nearest[k]});
  }
  return arch;
}

CharacterizationData synthesize_characterization(const ArchitecturalParams& arch,
                                                 const ProcessorGraph& graph,
                                                 const GenerativeSpec& spec) {
  if (arch.qubits.size() != graph.num_qubits()) {
    throw InputError("architectural parameters cover " + std::to_string(arch.qubits.size()) +
                     " qubits but the processor has " + std::to_string(graph.num_qubits()));
  }
  for (const auto& s : arch.stray) {
    if (s.a < 0 || s.b < 0 || s.a >= static_cast<int>(graph.num_qubits()) ||
        s.b >= static_cast<int>(graph.num_qubits())) {
      throw InputError("stray pair references a qubit missing from the processor");
    }
  }
  CharacterizationData d;
  d.processor = graph;
  d.grid = make_grid(spec);
  d.readout_exclusion_ghz = spec.readout_exclusion_ghz;
  d.stray = arch.stray;
  d.qubits.reserve(arch.qubits.size());
  for (const auto& p : arch.qubits) {
    QubitCharacterization q;
    q.f_max_ghz = p.f_max_ghz;
    q.eta_ghz = p.eta_ghz;
    q.readout_ghz = p.readout_ghz;
    q.delta1 = p.delta1;
    q.delta2 = p.delta2;
    q.t1_inv.resize(d.grid.size);
    q.dfdphi.resize(d.grid.size);
    const double bg = 1.0 / p.t1_bg_us;
    for (int k = 0; k < d.grid.size; ++k) {
      const double f = d.grid.freq(k);
      double rate = bg;
      for (const auto& t : p.tls) {
        const double hw = 0.5e-3 * t.width_mhz;
        const double df = f - t.freq_ghz;
        rate += t.depth_per_us * hw * hw / (df * df + hw * hw);
      }
      q.t1_inv[k] = rate;
      q.dfdphi[k] = flux_sensitivity(f, p.f_max_ghz);
    }
    d.qubits.push_back(std::move(q));
  }
  for (const auto& c : graph.couplers()) {
    CzTrajectory t;
    const bool a_high = d.qubits[c.a].f_max_ghz >= d.qubits[c.b].f_max_ghz;
    t.high = a_high ? c.a : c.b;
    t.low = a_high ? c.b : c.a;
    t.ramp_ns = 5.0;
    t.dwell_ns = d.t_cz_ns - 2.0 * t.ramp_ns;
    d.trajectories.push_back(t);
  }
  return d;
}

CharacterizationData generate_processor(const GenerativeSpec& spec, const ProcessorGraph& graph) {
  return synthesize_characterization(sample_architecture(spec, graph), graph, spec);
}

double StatisticsReport::pass_fraction() const {
  if (stats.empty()) return 1.0;
  const auto n = std::count_if(stats.begin(), stats.end(), [](const auto& s) { return s.pass; });
  return static_cast<double>(n) / static_cast<double>(stats.size());
}

bool StatisticsReport::all_pass() const {
  return std::all_of(stats.begin(), stats.end(), [](const auto& s) { return s.pass; });
}

double ks_two_sample(std::vector<double> a, std::vector<double> b, double* d_out) {
  if (a.empty() || b.empty()) throw InputError("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  if (d_out) *d_out = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  if (lambda < 1e-3) return 1.0;
  // Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    q += term;
    if (std::abs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(q, 0.0, 1.0);
}

int count_tls_peaks(const QubitCharacterization& q, double threshold) {
  const auto& s = q.t1_inv;
  if (s.size() < 3) return 0;
  const double floor = *std::min_element(s.begin(), s.end());
  int peaks = 0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    if (s[k] > s[k - 1] && s[k] >= s[k + 1] && s[k] - floor > threshold) ++peaks;
  }
  return peaks;
}

StatisticsReport validate_statistics(const CharacterizationData& real,
                                     const CharacterizationData& sim, double alpha) {
  if (!(real.grid == sim.grid)) {
    throw InputError("characterizations use different spectrum grids");
  }
  if (real.qubits.empty() || sim.qubits.empty()) {
    throw InputError("characterizations must contain at least one qubit");
  }
  StatisticsReport report;
  auto add = [&](const std::string& name, std::vector<double> a, std::vector<double> b) {
    StatisticResult r;
    r.name = name;
    r.p_value = ks_two_sample(std::move(a), std::move(b), &r.statistic);
    r.pass = r.p_value >= alpha;
    report.stats.push_back(r);
  };

  constexpr int kBands = 4;
  const SpectrumGrid& g = real.grid;
  auto band_stats = [&](const CharacterizationData& d, int band, bool variance) {
    const int k0 = band * g.size / kBands;
    const int k1 = (band + 1) * g.size / kBands;
    std::vector<double> out;
    for (const auto& q : d.qubits) {
      double mean = 0.0;
      for (int k = k0; k < k1; ++k) mean += q.t1_inv[k];
      mean /= (k1 - k0);
      if (!variance) {
        out.push_back(mean);
        continue;
      }
      double var = 0.0;
      for (int k = k0; k < k1; ++k) var += (q.t1_inv[k] - mean) * (q.t1_inv[k] - mean);
      out.push_back(var / (k1 - k0));
    }
    return out;
  };
  for (int b = 0; b < kBands; ++b) {
    const std::string tag = "t1_inv.band" + std::to_string(b);
    add(tag + ".mean", band_stats(real, b, false), band_stats(sim, b, false));
    add(tag + ".variance", band_stats(real, b, true), band_stats(sim, b, true));
  }

  auto tls_density = [&](const CharacterizationData& d) {
    std::vector<double> out;
    const double span = g.hi_ghz() - g.f0_ghz;
    for (const auto& q : d.qubits) out.push_back(count_tls_peaks(q) / span);
    return out;
  };
  add("tls.density", tls_density(real), tls_density(sim));

  for (double det : {0.05, 0.15, 0.30, 0.45}) {
    auto sens = [&](const CharacterizationData& d) {
      std::vector<double> out;
      for (std::size_t q = 0; q < d.qubits.size(); ++q) {
        out.push_back(d.dfdphi_at(static_cast<int>(q), d.qubits[q].f_max_ghz - det));
      }
      return out;
    };
    add("dfdphi.detuning_" + std::to_string(static_cast<int>(std::lround(det * 1000))) + "mhz",
        sens(real), sens(sim));
  }
  return report;
}

}  // namespace snakeopt
