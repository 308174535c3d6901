// Copyright 2026 The MISA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "misa/harness/config.hpp"
#include "misa/harness/experiment.hpp"
#include "misa/harness/matrix_io.hpp"
#include "misa/metrics.hpp"
#include "misa/rng.hpp"

using namespace misa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("misa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig tiny_ica() {
  ExperimentConfig c = preset("custom");
  c.sim.structure = "ica";
  c.sim.V = {8};
  c.sim.C = {4};
  c.sim.N = 2000;
  c.algorithm.reduce = "pre";
  c.algorithm.precision_b = 1e4;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("binary matrix round trip is bitwise exact") {
  Rng rng(1);
  const Matrix A = rng.normal_matrix(10, 7) * 1e3;
  const fs::path dir = scratch("bin");
  io::save_matrix(dir / "a.bin", A);
  const Matrix B = io::load_matrix(dir / "a.bin");
  REQUIRE(B.rows() == 10);
  CHECK(std::memcmp(A.data(), B.data(), sizeof(double) * 70) == 0);
  const std::string bytes = io::encode_binary(A);
  CHECK(bytes.substr(0, 4) == "MISA");
  CHECK(bytes.size() == 12 + 8 * 70);
}

TEST_CASE("csv matrix round trip") {
  Rng rng(2);
  const Matrix A = rng.normal_matrix(4, 3) / 7.0;
  CHECK(io::decode_csv(io::encode_csv(A)) == A);
  const fs::path dir = scratch("csv");
  io::save_matrix(dir / "a.csv", A);
  CHECK(io::load_matrix(dir / "a.csv") == A);
}

TEST_CASE("matrix parse errors") {
  const fs::path dir = scratch("err");
  io::write_file(dir / "empty.bin", "");
  CHECK_THROWS_AS(io::load_matrix(dir / "empty.bin"), ParseError);
  CHECK_THROWS_AS(io::decode_binary("MISB00000000"), ParseError);
  std::string truncated = io::encode_binary(Matrix::Ones(2, 2));
  truncated.pop_back();
  try {
    io::decode_binary(truncated);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  try {
    io::decode_csv("1,2,3\n4,5\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(io::decode_csv(""), ParseError);
  CHECK_THROWS_AS(io::decode_csv("1,x\n"), ParseError);
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({"experiment": "ica1", "seed": 5, "sim": {"N": 100}})");
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.seed == 5);
  CHECK(c.sim.N == 100);
  CHECK(c.sim.V == std::vector<Index>{40});
  try {
    config_from_json(nlohmann::json::parse(R"({"sim": {"bogus": 1}})"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"colour": 1})")), ParseError);
  CHECK_THROWS_AS(preset("nope"), ParseError);
  for (const char* id : {"ica1", "iva1", "iva2", "isa1", "isa2", "isa3", "custom"}) {
    const ExperimentConfig p = preset(id);
    CHECK_NOTHROW(p.validate());
    const ExperimentConfig back = config_from_json(config_to_json(p));
    CHECK(config_to_json(back) == config_to_json(p));
  }
  ExperimentConfig noisy = preset("iva2");
  CHECK(config_to_json(config_from_json(config_to_json(noisy))).dump() == config_to_json(noisy).dump());
}

TEST_CASE("summary aggregation on a 3 x 3 grid") {
  const double grid[3][3] = {{0.30, 0.05, 0.20}, {0.10, 0.40, 0.02}, {0.07, 0.08, 0.09}};
  std::vector<RunRecord> recs;
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 3; ++r) {
      RunRecord rec;
      rec.instance = i;
      rec.replicate = r;
      rec.misi = grid[i][r];
      recs.push_back(rec);
    }
  const Summary s = summarize(recs, 3);
  CHECK(s.best_per_instance == std::vector<double>{0.05, 0.02, 0.07});
  CHECK(s.median_best == 0.05);
  CHECK(s.min_best == 0.02);
  CHECK(s.max_best == 0.07);
  CHECK(s.pass);
  recs[3].misi = recs[4].misi = recs[5].misi = std::nan("");
  CHECK_FALSE(summarize(recs, 3).pass);
}

TEST_CASE("seed derivation") {
  CHECK(instance_seed(1, 0) != instance_seed(1, 1));
  CHECK(replicate_seed(instance_seed(1, 0), 0) != instance_seed(1, 0));
  CHECK(derive_seed(9, 3) == derive_seed(9, 3));
}

TEST_CASE("end-to-end tiny ICA is accurate and reproducible") {
  const ExperimentConfig c = tiny_ica();
  const ExperimentResult a = run_experiment(c);
  REQUIRE(a.records.size() == 1);
  CHECK(a.records[0].misi < kMisiGood);
  REQUIRE(a.records[0].mmse);
  CHECK(*a.records[0].mmse < 0.1);
  const ExperimentResult b = run_experiment(c);
  const fs::path d1 = scratch("run1"), d2 = scratch("run2");
  write_results(a, d1);
  write_results(b, d2);
  for (const char* f : {"records.csv", "summary.json", "config.json"})
    CHECK(io::read_file(d1 / f) == io::read_file(d2 / f));
  CHECK(fs::exists(d1 / "timing.csv"));
}

TEST_CASE("stage failures are recorded and the run continues") {
  ExperimentConfig c = tiny_ica();
  c.replicates = 2;
  c.optim.max_fun_evals = 1;
  c.reduce_optim.max_fun_evals = 1;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.records.size() == 2);
  for (const auto& rec : r.records) CHECK_FALSE(rec.status.empty());
}
