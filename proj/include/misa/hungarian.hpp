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

#include <vector>

#include "misa/linalg.hpp"

namespace misa {

// Optimal linear sum assignment on a square cost matrix. Returns col[i], the
// column assigned to row i.
std::vector<Index> hungarian(const Matrix& cost);

double assignment_cost(const Matrix& cost, const std::vector<Index>& col);

}  // namespace misa
