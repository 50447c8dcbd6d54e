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

#pragma once

// Little-endian blob and JSON helpers shared by the on-disk formats.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace compass {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

// Float32 values widened to double. Throws FormatError unless the file holds
// exactly `count` values.
std::vector<double> read_f32(const std::filesystem::path& path, std::size_t count);
void write_f32(const std::filesystem::path& path, std::span<const double> values);

std::vector<std::uint32_t> read_u32(const std::filesystem::path& path);
void write_u32(const std::filesystem::path& path, std::span<const std::uint32_t> values);
std::vector<std::uint64_t> read_u64(const std::filesystem::path& path);
void write_u64(const std::filesystem::path& path, std::span<const std::uint64_t> values);

nlohmann::ordered_json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace compass
