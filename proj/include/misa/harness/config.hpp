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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "misa/fit.hpp"
#include "misa/simgen.hpp"

namespace misa {

struct SimConfig {
  // ica: one dataset of singleton subspaces; iva: sources linked across
  // datasets; isa: one dataset with subspace_dims; labels: explicit labels.
  std::string structure = "ica";
  Index datasets = 1;
  std::vector<Index> V{8};
  std::vector<Index> C{4};
  std::vector<Index> subspace_dims;
  std::vector<Index> labels;
  Index N = 2000;
  std::vector<double> cond{3.0};
  double snr_db = kNoiseless;
  std::vector<double> rho_max{0.0};
  SourceFamily family = SourceFamily::MultivariateLaplace;
};

struct AlgorithmConfig {
  std::string reduce = "pre";   // none | pre | gpca
  std::string solver = "misa";  // misa | misa-gp
  Dispersion dispersion = Dispersion::ScaleControlled;
  int T = 2;
  double precision_b = 80.0;
  std::optional<double> pre_threshold;  // PRE constraint when reduce == none
};

struct ExperimentConfig {
  std::string experiment = "custom";
  std::uint64_t seed = 0;
  int instances = 1;
  int replicates = 1;
  int threads = 1;
  std::string output_dir = "results";
  SimConfig sim;
  AlgorithmConfig algorithm;
  OptimOptions optim;
  OptimOptions reduce_optim = [] {
    OptimOptions o;
    o.memory = 5;
    return o;
  }();

  SubspaceAssignment assignment() const;
  SimSpec sim_spec(std::uint64_t instance_seed) const;
  void validate() const;
};

// Desk-scale defaults for ica1, iva1, iva2, isa1, isa2, isa3 and custom.
ExperimentConfig preset(const std::string& id);

// Applies the keys of j on top of the preset named by j["experiment"]
// (default custom). Unknown keys throw ParseError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);

}  // namespace misa
