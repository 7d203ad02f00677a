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

#include "json.hpp"
#include "snakeopt/benchlab.hpp"
#include "snakeopt/estimator.hpp"
#include "snakeopt/genmodel.hpp"
#include "snakeopt/snake.hpp"
#include "snakeopt/topology.hpp"

namespace snakeopt::io {

using Json = nlohmann::json;

/// Throws InputError when the file is missing or unreadable.
std::string read_file(const std::string& path);
Json read_json(const std::string& path);

/// Writes to a temporary sibling and renames it over `path`, so readers see
/// either the old file or the complete new one. Throws Error on failure.
void write_file_atomic(const std::string& path, const std::string& content);
/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits by `hex64`.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

/// GHz rounded to 6 decimals.
double round_ghz(double ghz);

// Processor graph: {"qubits": [{"id", "x", "y"}], "couplers": [[id, id]],
// "distance"?}.
Json to_json(const ProcessorGraph& p);
ProcessorGraph processor_from_json(const Json& j);

/// Priors: every GenerativeSpec field by name. Missing keys keep their
/// defaults; unknown keys are rejected.
Json to_json(const GenerativeSpec& s);
GenerativeSpec priors_from_json(const Json& j);

/// Characterization: embedded processor, grid, gate lengths, per-qubit
/// parameters and spectra, stray pairs and CZ trajectories (qubits by id).
Json to_json(const CharacterizationData& d);
CharacterizationData characterization_from_json(const Json& j);

/// Weight table: group key -> weight. Loading marks the table trained.
Json to_json(const WeightTable& w);
WeightTable weights_from_json(const Json& j);

Json to_json(const SnakeParams& p);
/// Missing keys keep their defaults. `scope` accepts "max", `seeds` "all".
SnakeParams snake_params_from_json(const Json& j);

/// Frequency configuration: {"frequencies": {name: GHz}, "provenance": {...}}.
Json config_to_json(const GateVariableGraph& g, const std::vector<double>& f,
                    const Json& provenance);
/// Unset variables come back as NaN; unknown names are rejected.
std::vector<double> config_from_json(const Json& j, const GateVariableGraph& g);

/// One JSON object per line: {"config": {name: GHz}, "benchmarks":
/// {"e_sq": {qubit: e}, "e_cycle": {pair: e}}, "tag": "isolated"|"parallel"}.
/// The reader skips lines holding only a "manifest" object.
std::string dataset_to_jsonl(const std::vector<BenchmarkSample>& samples,
                             const GateVariableGraph& g, const ProcessorGraph& p);
std::vector<BenchmarkSample> dataset_from_jsonl(const std::string& text,
                                                const GateVariableGraph& g,
                                                const ProcessorGraph& p);

/// Hash of everything an estimator's value depends on.
std::string estimator_hash(const Estimator& e);

Json to_json(const PercentileReport& r);
Json to_json(const SaturationFit& f);
Json to_json(const RuntimeFit& f);

}  // namespace snakeopt::io
