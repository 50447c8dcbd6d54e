// Copyright 2026 The Compass Authors.
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

#include "compass/binary_io.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "compass/errors.h"

namespace compass {
namespace {

template <typename T>
std::vector<T> decode_le(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  if (bytes.size() % sizeof(T) != 0) {
    throw FormatError(path.string() + ": length " + std::to_string(bytes.size()) +
                      " is not a multiple of " + std::to_string(sizeof(T)));
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    T v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      v |= static_cast<T>(bytes[i * sizeof(T) + b]) << (8 * b);
    }
    out[i] = v;
  }
  return out;
}

template <typename T>
void encode_le(const std::filesystem::path& path, std::span<const T> values) {
  std::vector<unsigned char> bytes(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bytes[i * sizeof(T) + b] = static_cast<unsigned char>(values[i] >> (8 * b));
    }
  }
  write_bytes(path, bytes);
}

}  // namespace

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

std::vector<double> read_f32(const std::filesystem::path& path, std::size_t count) {
  const std::vector<std::uint32_t> raw = decode_le<std::uint32_t>(path);
  if (raw.size() != count) {
    throw FormatError(path.string() + ": holds " + std::to_string(raw.size()) +
                      " float32 values, expected " + std::to_string(count));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float f = std::bit_cast<float>(raw[i]);
    if (!std::isfinite(f)) {
      throw FormatError(path.string() + ": non-finite value at index " + std::to_string(i));
    }
    out[i] = f;
  }
  return out;
}

void write_f32(const std::filesystem::path& path, std::span<const double> values) {
  std::vector<std::uint32_t> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    raw[i] = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
  }
  encode_le<std::uint32_t>(path, raw);
}

std::vector<std::uint32_t> read_u32(const std::filesystem::path& path) {
  return decode_le<std::uint32_t>(path);
}

void write_u32(const std::filesystem::path& path, std::span<const std::uint32_t> values) {
  encode_le<std::uint32_t>(path, values);
}

std::vector<std::uint64_t> read_u64(const std::filesystem::path& path) {
  return decode_le<std::uint64_t>(path);
}

void write_u64(const std::filesystem::path& path, std::span<const std::uint64_t> values) {
  encode_le<std::uint64_t>(path, values);
}

nlohmann::ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace compass
