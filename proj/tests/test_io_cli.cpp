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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "snakeopt/cli.hpp"
#include "snakeopt/io.hpp"
#include "support.hpp"

namespace snakeopt {
namespace {

namespace fs = std::filesystem;
using io::Json;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("snakeopt_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Io, ProcessorRoundTrip) {
  const ProcessorGraph p = build_surface_code_lattice(3);
  EXPECT_EQ(io::processor_from_json(io::to_json(p)), p);
  EXPECT_THROW(io::processor_from_json(Json::parse(R"({"qubits": 3})")), InputError);
}

TEST(Io, CharacterizationRoundTripIsByteStable) {
  const CharacterizationData d = *testing::lattice_data(2, 1);
  const std::string a = io::dump(io::to_json(d));
  const CharacterizationData back = io::characterization_from_json(Json::parse(a));
  EXPECT_EQ(io::dump(io::to_json(back)), a);
  EXPECT_EQ(back.qubits[0].t1_inv, d.qubits[0].t1_inv);
}

TEST(Io, PriorsRejectUnknownKeys) {
  GenerativeSpec s;
  s.tls_density_per_ghz = 3.0;
  EXPECT_EQ(io::priors_from_json(io::to_json(s)).tls_density_per_ghz, 3.0);
  EXPECT_THROW(io::priors_from_json(Json::parse(R"({"tls_density": 1})")), InputError);
  EXPECT_THROW(io::priors_from_json(Json::parse(R"({"eta_ghz": 0.2})")), InputError);
}

TEST(Io, WeightsRoundTripMarksTrained) {
  const WeightTable w = WeightTable::defaults();
  const WeightTable back = io::weights_from_json(io::to_json(w));
  EXPECT_EQ(back.w, w.w);
  EXPECT_TRUE(back.trained);
  Json j = io::to_json(w);
  j.erase("sq.dephasing");
  EXPECT_THROW(io::weights_from_json(j), InputError);
}

TEST(Io, ConfigurationSnapsToGrid) {
  const GateVariableGraph g(build_surface_code_lattice(2));
  std::vector<double> f(g.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = 5.5 + 0.002 * static_cast<double>(v);
  const Json j = io::config_to_json(g, f, Json::object());
  const auto back = io::config_from_json(j, g);
  for (std::size_t v = 0; v < f.size(); ++v) EXPECT_EQ(back[v], snap_to_grid(f[v]));
  Json bad = j;
  bad["frequencies"]["q999"] = 5.0;
  EXPECT_THROW(io::config_from_json(bad, g), InputError);
}

TEST(Io, DatasetRoundTripSkipsManifestLine) {
  const Estimator e =
      build_estimator(testing::lattice_data(2, 3), kAllMechanisms, WeightTable::defaults());
  std::mt19937_64 rng(3);
  const auto b = hard_bounds(e.data(), e.graph());
  std::vector<BenchmarkSample> s{
      synthesize_benchmarks(e, testing::random_config(b, rng), SampleTag::isolated, 0.0, rng),
      synthesize_benchmarks(e, testing::random_config(b, rng), SampleTag::parallel, 0.1, rng)};
  const std::string text = "{\"manifest\":{\"tool\":\"snakeopt\"}}\n" +
                           io::dataset_to_jsonl(s, e.graph(), e.data().processor);
  const auto back = io::dataset_from_jsonl(text, e.graph(), e.data().processor);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].tag, SampleTag::parallel);
  for (std::size_t q = 0; q < s[0].e_sq.size(); ++q) EXPECT_EQ(back[0].e_sq[q], s[0].e_sq[q]);
  EXPECT_THROW(io::dataset_from_jsonl("{\"config\":{}}\n", e.graph(), e.data().processor),
               InputError);
}

TEST(Io, AtomicWriteReplacesWholeFile) {
  TempDir dir;
  const std::string path = dir / "x.json";
  io::write_file_atomic(path, "first\n");
  io::write_file_atomic(path, "second\n");
  EXPECT_EQ(io::read_file(path), "second\n");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir.path())) files += entry.is_regular_file();
  EXPECT_EQ(files, 1u);
}

TEST(Io, Fnv1aKnownVectors) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(Cli, TopoWritesSeventeenQubitsWithManifest) {
  TempDir dir;
  const CliRun r = cli({"topo", "--distance", "3", "--out", dir / "proc.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = io::read_json(dir / "proc.json");
  EXPECT_EQ(j["qubits"].size(), 17u);
  EXPECT_EQ(j["manifest"]["command"], "topo");
  EXPECT_EQ(j["manifest"]["outputs"][0], "proc.json");
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(cli({}).code, kExitBadArguments);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitBadArguments);
  EXPECT_EQ(cli({"topo", "--out", dir / "p.json"}).code, kExitBadArguments);
  EXPECT_EQ(cli({"topo", "--distance", "0", "--out", dir / "p.json"}).code, kExitBadArguments);
  const CliRun missing = cli({"gen", "--proc", dir / "absent.json", "--seed", "1", "--out", dir / "c.json"});
  EXPECT_EQ(missing.code, kExitInputError);
  EXPECT_FALSE(fs::exists(dir / "c.json"));
  std::ofstream(dir / "garbage.json") << "{not json";
  EXPECT_EQ(cli({"gen", "--proc", dir / "garbage.json", "--seed", "1", "--out", dir / "c.json"}).code,
            kExitInputError);
  EXPECT_FALSE(fs::exists(dir / "c.json"));
  // No stray temporaries after failures.
  for (const auto& entry : fs::directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().filename().string().find(".tmp"), std::string::npos);
  }
}

TEST(Cli, SeedIsMandatoryAndEnvironmentOverrides) {
  TempDir dir;
  ASSERT_EQ(cli({"topo", "--distance", "2", "--out", dir / "p.json"}).code, 0);
  ::unsetenv("SNAKEOPT_SEED");
  EXPECT_EQ(cli({"gen", "--proc", dir / "p.json", "--out", dir / "a.json"}).code, kExitBadArguments);
  ASSERT_EQ(cli({"gen", "--proc", dir / "p.json", "--seed", "9", "--out", dir / "a.json"}).code, 0);
  ::setenv("SNAKEOPT_SEED", "9", 1);
  const CliRun r = cli({"gen", "--proc", dir / "p.json", "--seed", "1", "--out", dir / "b.json"});
  ::unsetenv("SNAKEOPT_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  Json a = io::read_json(dir / "a.json"), b = io::read_json(dir / "b.json");
  a.erase("manifest");
  b.erase("manifest");
  EXPECT_EQ(a, b);
}

TEST(Cli, HelpListsFlagsWithUnits) {
  const CliRun top = cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"topo", "gen", "synth", "train", "optimize", "heal", "stitch", "sweep",
                          "report"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
    const CliRun r = cli({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  const CliRun opt = cli({"optimize", "--help"});
  for (const char* flag : {"--scope", "--seeds", "--rule", "--heuristic", "--budget", "--seed",
                           "--char", "--weights", "--out"}) {
    EXPECT_NE(opt.out.find(flag), std::string::npos) << flag;
  }
  EXPECT_NE(opt.out.find("GHz"), std::string::npos);
  EXPECT_NE(cli({"heal", "--help"}).out.find("dimensionless"), std::string::npos);
}

TEST(Cli, PipelineProducesConsistentOutputs) {
  TempDir dir;
  ::setenv("SOURCE_DATE_EPOCH", "0", 1);
  ASSERT_EQ(cli({"topo", "--distance", "2", "--out", dir / "proc.json"}).code, 0);
  ASSERT_EQ(cli({"gen", "--proc", dir / "proc.json", "--seed", "1", "--out", dir / "char.json"}).code, 0);
  ASSERT_EQ(cli({"synth", "--char", dir / "char.json", "--configs", "8", "--seed", "2", "--out",
                 dir / "data.jsonl"}).code, 0);
  const CliRun train = cli({"train", "--char", dir / "char.json", "--data", dir / "data.jsonl",
                         "--seed", "3", "--out", dir / "w.json"});
  ASSERT_EQ(train.code, 0) << train.err;
  const CliRun opt = cli({"optimize", "--char", dir / "char.json", "--weights", dir / "w.json",
                       "--budget", "300", "--seed", "4", "--out", dir / "opt.json"});
  ASSERT_EQ(opt.code, 0) << opt.err;
  const Json cfg = io::read_json(dir / "opt.json");
  EXPECT_EQ(cfg["frequencies"].size(), 15u);  // 7 qubits + 8 couplers
  EXPECT_EQ(cfg["provenance"]["seed"], 4);
  EXPECT_EQ(cfg["provenance"]["untrained_weights"], false);
  EXPECT_FALSE(cfg["provenance"].contains("seconds"));
  ASSERT_EQ(cli({"report", "--char", dir / "char.json", "--weights", dir / "w.json", "--config",
                 dir / "opt.json", "--out", dir / "rep.json"}).code, 0);
  const Json rep = io::read_json(dir / "rep.json");
  EXPECT_EQ(rep["predictions"]["e_cycle"].size(), 8u);
  EXPECT_EQ(rep["manifest"]["inputs"].size(), 3u);
  EXPECT_EQ(rep["manifest"]["timestamp"], "1970-01-01T00:00:00Z");
  const CliRun st = cli({"stitch", "--char", dir / "char.json", "--regions", "2", "--budget",
                          "300", "--seed", "5", "--out", dir / "st.json"});
  ASSERT_EQ(st.code, 0) << st.err;
  EXPECT_NE(st.out.find("warning"), std::string::npos);
  ::unsetenv("SOURCE_DATE_EPOCH");
}

TEST(Cli, SweepWritesResultsTableAndManifest) {
  TempDir dir;
  std::ofstream(dir / "spec.json") << R"({"distance": 2, "seeds": [1, 2], "scopes": [1, 2, "max"],
                                          "snake": {"solver": {"budget": 200}}})";
  const CliRun r = cli({"sweep", "scope", "--spec", dir / "spec.json", "--out", dir / "res"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "res/results.json"));
  EXPECT_TRUE(fs::exists(dir / "res/table.csv"));
  const Json m = io::read_json(dir / "res/manifest.json");
  EXPECT_EQ(m["outputs"].size(), 2u);
  EXPECT_EQ(io::read_json(dir / "res/results.json")["runs"].size(), 6u);
  EXPECT_EQ(cli({"sweep", "bogus", "--spec", dir / "spec.json", "--out", dir / "r2"}).code,
            kExitBadArguments);
}

}  // namespace
}  // namespace snakeopt
