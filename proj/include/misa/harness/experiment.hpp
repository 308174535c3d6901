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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "misa/harness/config.hpp"

namespace misa {

struct RunRecord {
  int instance = 0;
  int replicate = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t replicate_seed = 0;
  double misi = 0.0;
  std::optional<double> mmse;
  double objective = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string status;
};

struct Summary {
  std::vector<double> best_per_instance;  // min MISI over replicates
  double median_best = 0.0;
  double min_best = 0.0;
  double max_best = 0.0;
  std::optional<double> median_mmse;
  bool pass = false;  // median_best < kMisiGood
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> records;  // instance-major, one per replicate
  Summary summary;
};

struct SolveOutput {
  BlockTransform W;  // final unmixing in the original data space
  double objective = 0.0;
  int iterations = 0;
  Status status = Status::ConvergedFun;
};

// Runs the configured reduction and solver chain on one dataset.
SolveOutput solve_instance(const ExperimentConfig& cfg, const MultiDataset& X, const SubspaceAssignment& P,
                           std::uint64_t replicate_seed);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

Summary summarize(const std::vector<RunRecord>& records, int instances);

std::string records_csv(const std::vector<RunRecord>& records);
std::string timing_csv(const std::vector<RunRecord>& records);
std::string summary_json(const ExperimentResult& r);

// Writes records.csv, summary.json, config.json and timing.csv.
void write_results(const ExperimentResult& r, const std::filesystem::path& dir);

std::uint64_t instance_seed(std::uint64_t seed, int instance);
std::uint64_t replicate_seed(std::uint64_t instance_seed, int replicate);

// Thread count from MISA_THREADS when set, else the fallback.
int resolve_threads(int fallback);

}  // namespace misa
