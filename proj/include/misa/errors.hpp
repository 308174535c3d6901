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

#include <stdexcept>
#include <string>

namespace misa {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// D or a covariance failed Cholesky even after jitter.
struct DefinitenessError : Error {
  using Error::Error;
};

// Parameter outside its admissible range.
struct DomainError : Error {
  using Error::Error;
};

struct RankError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace misa
