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

#include "misa/harness/matrix_io.hpp"

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace misa::io {

namespace {

constexpr char kMagic[4] = {'M', 'I', 'S', 'A'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view b, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

ParseError parse_error(std::size_t offset, const std::string& msg) {
  return ParseError("parse error at byte " + std::to_string(offset) + ": " + msg);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string encode_binary(const Matrix& A) {
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(A.rows()));
  put_u32(out, static_cast<std::uint32_t>(A.cols()));
  out.reserve(out.size() + 8 * A.size());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(A(i, j)));
  return out;
}

Matrix decode_binary(std::string_view b) {
  if (b.size() < 12) throw parse_error(b.size(), "file too short for the 12-byte header");
  if (std::memcmp(b.data(), kMagic, 4) != 0) throw parse_error(0, "bad magic, expected \"MISA\"");
  const auto rows = static_cast<Index>(get_le(b, 4, 4));
  const auto cols = static_cast<Index>(get_le(b, 8, 4));
  const std::size_t need = 12 + 8 * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (b.size() != need)
    throw parse_error(std::min(b.size(), need), "payload size mismatch for " + std::to_string(rows) + "x" +
                                                     std::to_string(cols) + " (expected " + std::to_string(need) +
                                                     " bytes, got " + std::to_string(b.size()) + ")");
  Matrix A(rows, cols);
  std::size_t at = 12;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j, at += 8) A(i, j) = std::bit_cast<double>(get_le(b, at, 8));
  return A;
}

std::string encode_csv(const Matrix& A) {
  std::string out;
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      if (j) out.push_back(',');
      out += format_double(A(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

Matrix decode_csv(std::string_view text) {
  if (text.empty()) throw parse_error(0, "empty CSV");
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::vector<double> row;
      std::size_t f = 0;
      while (true) {
        std::size_t comma = line.find(',', f);
        const std::string field(line.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
        char* stop = nullptr;
        errno = 0;
        const double v = std::strtod(field.c_str(), &stop);
        std::size_t used = static_cast<std::size_t>(stop - field.c_str());
        while (used < field.size() && (field[used] == ' ' || field[used] == '\t')) ++used;
        if (field.empty() || used != field.size() || errno == ERANGE)
          throw parse_error(pos + f, "row " + std::to_string(rows.size() + 1) + ": invalid number \"" + field + "\"");
        row.push_back(v);
        if (comma == std::string_view::npos) break;
        f = comma + 1;
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw parse_error(pos, "row " + std::to_string(rows.size() + 1) + " has " + std::to_string(row.size()) +
                                   " fields, expected " + std::to_string(rows.front().size()));
      rows.push_back(std::move(row));
    }
    pos = end + 1;
  }
  if (rows.empty()) throw parse_error(0, "CSV has no rows");
  Matrix A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rows[i][j];
  return A;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

void save_matrix(const std::filesystem::path& path, const Matrix& A) {
  write_file(path, path.extension() == ".csv" ? encode_csv(A) : encode_binary(A));
}

Matrix load_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return path.extension() == ".csv" ? decode_csv(bytes) : decode_binary(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace misa::io
