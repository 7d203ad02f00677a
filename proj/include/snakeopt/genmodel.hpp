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
#include <string>
#include <vector>

#include "snakeopt/common.hpp"
#include "snakeopt/topology.hpp"

namespace snakeopt {

/// Priors of the generative processor model. Every field is overridable from
/// a JSON priors file; the defaults are plausible transmon values, not fitted
/// to any particular device.
struct GenerativeSpec {
  std::uint64_t seed = 0;

  // Maximum qubit frequency, GHz: Normal(mean, sd) truncated to [band_lo, band_hi].
  double fmax_mean_ghz = 6.0;
  double fmax_sd_ghz = 0.1;
  double band_lo_ghz = 5.0;
  double band_hi_ghz = 7.0;

  double eta_ghz = -0.21;

  // Background relaxation time, uniform in [lo, hi] microseconds.
  double t1_bg_lo_us = 20.0;
  double t1_bg_hi_us = 30.0;

  // TLS defects: Poisson count per GHz of spectrum, log-uniform linewidth,
  // log-normal depth (peak extra relaxation rate, 1/us).
  double tls_density_per_ghz = 1.5;
  double tls_width_lo_mhz = 5.0;
  double tls_width_hi_mhz = 40.0;
  double tls_depth_median_per_us = 1.0;
  double tls_depth_sigma = 0.6;

  // Parasitic coupling |Normal(0, sd)| for nearest and next-nearest pairs, MHz.
  double chi_nn_sd_mhz = 1.0;
  double chi_nnn_sd_mhz = 0.5;

  // Readout resonators: Normal(mean, sd) GHz; qubits keep out of
  // [f_r - exclusion, f_r + exclusion].
  double readout_mean_ghz = 4.9;
  double readout_sd_ghz = 0.1;
  double readout_exclusion_ghz = 0.1;

  // Pulse distortion coefficients: log-normal around the medians.
  double delta1_median_per_ghz = 1.0;
  double delta2_median_per_ghz2 = 2.0;
  double delta_sigma = 0.3;

  // Spectrum grid: [band_lo - grid_margin_below, band_hi] at grid_step.
  double grid_margin_below_ghz = 1.0;
  double grid_step_ghz = kGridStepGhz;

  /// Throws std::invalid_argument naming the first bad hyperparameter.
  void validate() const;
};

struct Tls {
  double freq_ghz = 0.0;
  double width_mhz = 0.0;     // full width at half maximum
  double depth_per_us = 0.0;  // extra relaxation rate at the TLS center
};

struct QubitParams {
  double f_max_ghz = 0.0;
  double eta_ghz = 0.0;
  double t1_bg_us = 0.0;
  std::vector<Tls> tls;
  double readout_ghz = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// Parasitic coupling between two qubits (indices into the processor graph).
struct StrayPair {
  int a = 0;
  int b = 0;
  double chi_mhz = 0.0;
  bool nearest = true;  // Manhattan-1 pair; otherwise next-nearest
};

struct ArchitecturalParams {
  std::vector<QubitParams> qubits;  // processor qubit-index order
  std::vector<StrayPair> stray;
};

/// Uniform frequency grid shared by every spectrum of a processor.
struct SpectrumGrid {
  double f0_ghz = 0.0;
  double step_ghz = kGridStepGhz;
  int size = 0;

  double freq(int k) const { return f0_ghz + k * step_ghz; }
  double hi_ghz() const { return freq(size - 1); }
  bool operator==(const SpectrumGrid& o) const {
    return f0_ghz == o.f0_ghz && step_ghz == o.step_ghz && size == o.size;
  }
};

struct QubitCharacterization {
  double f_max_ghz = 0.0;
  double eta_ghz = 0.0;
  double readout_ghz = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::vector<double> t1_inv;   // 1/us on the grid
  std::vector<double> dfdphi;   // GHz per flux quantum on the grid
};

/// Piecewise-linear CZ flux excursion: each qubit ramps from its idle
/// frequency to its interaction point, dwells, and ramps back.
struct CzTrajectory {
  int high = 0;  // qubit index parked at f_ij + |eta|/2
  int low = 0;   // qubit index parked at f_ij - |eta|/2
  double ramp_ns = 5.0;
  double dwell_ns = 24.0;
};

struct CharacterizationData {
  ProcessorGraph processor;
  SpectrumGrid grid;
  double t_sq_ns = 25.0;
  double t_cz_ns = 34.0;
  double readout_exclusion_ghz = 0.1;
  std::vector<QubitCharacterization> qubits;  // processor qubit-index order
  std::vector<StrayPair> stray;
  std::vector<CzTrajectory> trajectories;     // processor coupler order

  /// Linear interpolation of the relaxation spectrum; clamps outside the grid.
  double t1_inv_at(int q, double f_ghz) const;
  /// Linear interpolation of the flux sensitivity with f_max as a zero knot;
  /// exactly 0 at and above f_max.
  double dfdphi_at(int q, double f_ghz) const;
};

/// |df/dphi| of a symmetric transmon f(phi) = f_max sqrt|cos(pi phi)|
/// expressed as a function of frequency; 0 for f >= f_max.
double flux_sensitivity(double f_ghz, double f_max_ghz);

/// Draws one processor's architectural parameters, qubit by qubit and pair
/// by pair in index order. Deterministic in spec.seed.
ArchitecturalParams sample_architecture(const GenerativeSpec& spec,
                                        const ProcessorGraph& graph);

/// Parasitically coupled qubit pairs of a lattice: Manhattan-1 neighbors and
/// the next-nearest offsets (1,1), (1,-1), (2,0), (0,2). Sorted, a < b.
std::vector<std::pair<int, int>> parasitic_pairs(const ProcessorGraph& graph,
                                                 std::vector<bool>* nearest = nullptr);

/// Propagates architectural parameters into spectra and trajectories on the
/// grid defined by `spec`. Throws InputError when arch does not cover graph.
CharacterizationData synthesize_characterization(const ArchitecturalParams& arch,
                                                 const ProcessorGraph& graph,
                                                 const GenerativeSpec& spec = {});

/// Convenience: sample_architecture followed by synthesize_characterization.
CharacterizationData generate_processor(const GenerativeSpec& spec,
                                        const ProcessorGraph& graph);

struct StatisticResult {
  std::string name;
  double statistic = 0.0;  // two-sample KS distance
  double p_value = 1.0;
  bool pass = true;
};

struct StatisticsReport {
  std::vector<StatisticResult> stats;
  double pass_fraction() const;
  bool all_pass() const;
};

/// Two-sample KS p-value (asymptotic Kolmogorov distribution).
double ks_two_sample(std::vector<double> a, std::vector<double> b, double* d_out = nullptr);

/// Compares per-qubit summary statistics of two characterizations: band
/// means and variances of the relaxation spectrum, TLS peak density, and
/// flux sensitivity at fixed detunings. Throws InputError on grid mismatch.
StatisticsReport validate_statistics(const CharacterizationData& real,
                                     const CharacterizationData& simulated,
                                     double alpha = 0.01);

/// Local maxima of the relaxation spectrum rising more than `threshold`
/// (1/us) above the spectrum minimum.
int count_tls_peaks(const QubitCharacterization& q, double threshold_per_us = 0.02);

}  // namespace snakeopt
