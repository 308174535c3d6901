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

#include <filesystem>
#include <string>
#include <string_view>

#include "misa/linalg.hpp"

namespace misa::io {

// Binary layout: "MISA", u32 rows, u32 cols (little endian), then rows*cols
// row-major little-endian f64.
std::string encode_binary(const Matrix& A);
Matrix decode_binary(std::string_view bytes);

// Comma separated, one row per line, 17 significant digits.
std::string encode_csv(const Matrix& A);
Matrix decode_csv(std::string_view text);

// Format chosen by extension: ".csv" is CSV, anything else binary.
void save_matrix(const std::filesystem::path& path, const Matrix& A);
Matrix load_matrix(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Shortest decimal text that round-trips is not needed; %.17g always does.
std::string format_double(double v);

}  // namespace misa::io
