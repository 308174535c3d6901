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

#include "misa/harness/config.hpp"

#include <cmath>
#include <set>

#include "misa/harness/matrix_io.hpp"

namespace misa {

using nlohmann::json;

SubspaceAssignment ExperimentConfig::assignment() const {
  const SimConfig& s = sim;
  if (s.structure == "ica") return SubspaceAssignment::singletons({s.C.at(0)});
  if (s.structure == "iva") return SubspaceAssignment::linked(s.datasets, s.C.at(0));
  if (s.structure == "isa") return SubspaceAssignment::consecutive(s.subspace_dims);
  if (s.structure == "labels") return SubspaceAssignment(s.labels, s.C);
  throw ParseError("config: unknown sim.structure \"" + s.structure + "\"");
}

namespace {

template <typename T>
std::vector<T> broadcast(const std::vector<T>& v, std::size_t n) {
  if (v.size() == 1) return std::vector<T>(n, v[0]);
  return v;
}

}  // namespace

SimSpec ExperimentConfig::sim_spec(std::uint64_t instance_seed) const {
  SimSpec s;
  s.assignment = assignment();
  s.V = broadcast(sim.V, s.assignment.num_datasets());
  s.N = sim.N;
  s.cond = sim.cond;
  s.snr_db = sim.snr_db;
  s.rho_max = sim.rho_max;
  s.family = sim.family;
  s.seed = instance_seed;
  return s;
}

void ExperimentConfig::validate() const {
  if (instances < 1 || replicates < 1) throw ParseError("config: instances and replicates must be >= 1");
  if (threads < 1) throw ParseError("config: threads must be >= 1");
  if (algorithm.reduce != "none" && algorithm.reduce != "pre" && algorithm.reduce != "gpca")
    throw ParseError("config: algorithm.reduce must be none, pre or gpca");
  if (algorithm.solver != "misa" && algorithm.solver != "misa-gp")
    throw ParseError("config: algorithm.solver must be misa or misa-gp");
  if (algorithm.T < 0) throw ParseError("config: algorithm.T must be >= 0");
  if (sim.structure == "iva" && sim.datasets < 1) throw ParseError("config: sim.datasets must be >= 1");
  sim_spec(seed).validate();
  optim.validate();
  reduce_optim.validate();
}

ExperimentConfig preset(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  c.optim.tol_fun = 1e-9;
  c.optim.tol_x = 1e-12;
  if (id == "custom") return c;
  if (id == "ica1") {
    c.sim.structure = "ica";
    c.sim.V = {40};
    c.sim.C = {10};
    c.sim.N = 5000;
    c.sim.cond = {3.0};
    c.instances = 10;
    c.replicates = 10;
    c.algorithm.reduce = "pre";
    return c;
  }
  if (id == "iva1") {
    c.sim.structure = "iva";
    c.sim.datasets = 5;
    c.sim.V = {8};
    c.sim.C = {8};
    c.sim.N = 20000;
    c.sim.rho_max = {0.5};
    c.instances = 10;
    c.replicates = 1;
    c.algorithm.reduce = "none";
    return c;
  }
  if (id == "iva2") {
    c.sim.structure = "iva";
    c.sim.datasets = 4;
    c.sim.V = {24};
    c.sim.C = {8};
    c.sim.N = 10000;
    c.sim.rho_max = {0.5};
    c.sim.snr_db = 3.0;
    c.instances = 5;
    c.replicates = 2;
    c.algorithm.reduce = "gpca";
    return c;
  }
  if (id == "isa1" || id == "isa2") {
    c.sim.structure = "isa";
    c.sim.V = {16};
    c.sim.C = {16};
    c.sim.subspace_dims = {4, 4, 4, 4};
    c.sim.N = 8000;
    c.sim.rho_max = {id == "isa1" ? 0.0 : 0.5};
    c.instances = 10;
    c.replicates = 1;
    c.algorithm.reduce = "none";
    c.algorithm.solver = "misa-gp";
    return c;
  }
  if (id == "isa3") {
    c.sim.structure = "isa";
    c.sim.V = {40};
    c.sim.C = {12};
    c.sim.subspace_dims = {1, 2, 3, 2, 2, 2};
    c.sim.N = 5000;
    c.sim.rho_max = {0.3};
    c.instances = 5;
    c.replicates = 2;
    c.algorithm.reduce = "pre";
    c.algorithm.solver = "misa-gp";
    return c;
  }
  throw ParseError("config: unknown experiment \"" + id + "\"");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError("config: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError("config: unknown key \"" + (where.empty() ? "" : where + ".") + it.key() + "\"");
}

double to_snr(const json& v) {
  if (v.is_null()) return kNoiseless;
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kNoiseless;
    throw ParseError("config: sim.snr_db must be a number or \"inf\"");
  }
  return v.get<double>();
}

template <typename T>
std::vector<T> scalar_or_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

void read_optim(const json& j, OptimOptions& o, const std::string& where) {
  check_keys(j, {"lower", "upper", "typical_x", "max_fun_evals", "max_iters", "memory", "tol_fun", "tol_x"}, where);
  if (j.contains("lower")) o.lower = j["lower"].get<double>();
  if (j.contains("upper")) o.upper = j["upper"].get<double>();
  if (j.contains("typical_x")) o.typical_x = j["typical_x"].get<double>();
  if (j.contains("max_fun_evals")) o.max_fun_evals = j["max_fun_evals"].get<int>();
  if (j.contains("max_iters")) o.max_iters = j["max_iters"].get<int>();
  if (j.contains("memory")) o.memory = j["memory"].get<int>();
  if (j.contains("tol_fun")) o.tol_fun = j["tol_fun"].get<double>();
  if (j.contains("tol_x")) o.tol_x = j["tol_x"].get<double>();
}

json optim_json(const OptimOptions& o) {
  return {{"lower", o.lower},     {"upper", o.upper},     {"typical_x", o.typical_x},
          {"max_fun_evals", o.max_fun_evals}, {"max_iters", o.max_iters}, {"memory", o.memory},
          {"tol_fun", o.tol_fun}, {"tol_x", o.tol_x}};
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"experiment", "seed", "instances", "replicates", "threads", "output_dir", "sim", "algorithm", "optim",
                 "reduce_optim"},
             "");
  try {
    ExperimentConfig c = preset(j.value("experiment", std::string("custom")));
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("instances")) c.instances = j["instances"].get<int>();
    if (j.contains("replicates")) c.replicates = j["replicates"].get<int>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("sim")) {
      const json& s = j["sim"];
      check_keys(s, {"structure", "datasets", "V", "C", "subspace_dims", "labels", "N", "cond", "snr_db", "rho_max",
                     "family"},
                 "sim");
      if (s.contains("structure")) c.sim.structure = s["structure"].get<std::string>();
      if (s.contains("datasets")) c.sim.datasets = s["datasets"].get<Index>();
      if (s.contains("V")) c.sim.V = scalar_or_list<Index>(s["V"]);
      if (s.contains("C")) c.sim.C = scalar_or_list<Index>(s["C"]);
      if (s.contains("subspace_dims")) c.sim.subspace_dims = s["subspace_dims"].get<std::vector<Index>>();
      if (s.contains("labels")) c.sim.labels = s["labels"].get<std::vector<Index>>();
      if (s.contains("N")) c.sim.N = s["N"].get<Index>();
      if (s.contains("cond")) c.sim.cond = scalar_or_list<double>(s["cond"]);
      if (s.contains("snr_db")) c.sim.snr_db = to_snr(s["snr_db"]);
      if (s.contains("rho_max")) c.sim.rho_max = scalar_or_list<double>(s["rho_max"]);
      if (s.contains("family")) {
        const std::string f = s["family"].get<std::string>();
        if (f == "mvlaplace") c.sim.family = SourceFamily::MultivariateLaplace;
        else if (f == "copula-laplace") c.sim.family = SourceFamily::CopulaLaplaceMarginals;
        else throw ParseError("config: sim.family must be mvlaplace or copula-laplace");
      }
    }
    if (j.contains("algorithm")) {
      const json& a = j["algorithm"];
      check_keys(a, {"reduce", "solver", "dispersion", "T", "precision_b", "pre_threshold"}, "algorithm");
      if (a.contains("reduce")) c.algorithm.reduce = a["reduce"].get<std::string>();
      if (a.contains("solver")) c.algorithm.solver = a["solver"].get<std::string>();
      if (a.contains("dispersion")) {
        const std::string d = a["dispersion"].get<std::string>();
        if (d == "scale-controlled") c.algorithm.dispersion = Dispersion::ScaleControlled;
        else if (d == "scale-invariant") c.algorithm.dispersion = Dispersion::ScaleInvariant;
        else throw ParseError("config: algorithm.dispersion must be scale-controlled or scale-invariant");
      }
      if (a.contains("T")) c.algorithm.T = a["T"].get<int>();
      if (a.contains("precision_b")) c.algorithm.precision_b = a["precision_b"].get<double>();
      if (a.contains("pre_threshold")) {
        if (a["pre_threshold"].is_null()) c.algorithm.pre_threshold.reset();
        else c.algorithm.pre_threshold = a["pre_threshold"].get<double>();
      }
    }
    if (j.contains("optim")) read_optim(j["optim"], c.optim, "optim");
    if (j.contains("reduce_optim")) read_optim(j["reduce_optim"], c.reduce_optim, "reduce_optim");
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

json config_to_json(const ExperimentConfig& c) {
  json sim = {{"structure", c.sim.structure},
              {"datasets", c.sim.datasets},
              {"V", c.sim.V},
              {"C", c.sim.C},
              {"subspace_dims", c.sim.subspace_dims},
              {"labels", c.sim.labels},
              {"N", c.sim.N},
              {"cond", c.sim.cond},
              {"rho_max", c.sim.rho_max},
              {"family", c.sim.family == SourceFamily::MultivariateLaplace ? "mvlaplace" : "copula-laplace"}};
  if (std::isinf(c.sim.snr_db)) sim["snr_db"] = "inf";
  else sim["snr_db"] = c.sim.snr_db;
  json alg = {{"reduce", c.algorithm.reduce},
              {"solver", c.algorithm.solver},
              {"dispersion",
               c.algorithm.dispersion == Dispersion::ScaleControlled ? "scale-controlled" : "scale-invariant"},
              {"T", c.algorithm.T},
              {"precision_b", c.algorithm.precision_b}};
  if (c.algorithm.pre_threshold) alg["pre_threshold"] = *c.algorithm.pre_threshold;
  else alg["pre_threshold"] = nullptr;
  return {{"experiment", c.experiment}, {"seed", c.seed},
          {"instances", c.instances},   {"replicates", c.replicates},
          {"threads", c.threads},       {"output_dir", c.output_dir},
          {"sim", sim},                 {"algorithm", alg},
          {"optim", optim_json(c.optim)}, {"reduce_optim", optim_json(c.reduce_optim)}};
}

ExperimentConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace misa
