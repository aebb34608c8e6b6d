// Copyright 2026 The AGH Authors.
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

// Readers and writers for the on-disk formats:
//
//   fvecs / ivecs   per record: little-endian int32 dim, then dim float32
//                   (or int32) values.
//   code file       "AGH1", u32 code length L, u64 count, then count codes of
//                   ceil(L/8) bytes each. Bit k of a code lives in bit (k % 8)
//                   of byte k / 8; +1 is stored as 1 and -1 as 0.
//   manifest        text; header "D m", then m lines "start n_i" indexing a
//                   backing fvecs file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "agh/types.hpp"

namespace agh {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// fvecs. Values are widened to double on read and narrowed to float on write.
// An empty file yields a matrix with `expected_dim` rows (0 if unknown) and no
// columns.
DataMatrix read_fvecs(const std::filesystem::path& path,
                      std::optional<int> expected_dim = std::nullopt);
void write_fvecs(const DataMatrix& matrix, const std::filesystem::path& path);

IntMatrix read_ivecs(const std::filesystem::path& path,
                     std::optional<int> expected_dim = std::nullopt);
void write_ivecs(const IntMatrix& matrix, const std::filesystem::path& path);

inline std::size_t code_bytes(int code_length) {
  return (static_cast<std::size_t>(code_length) + 7) / 8;
}

std::vector<std::uint8_t> pack_codes(const BinaryCodeMatrix& codes);
BinaryCodeMatrix unpack_codes(std::span<const std::uint8_t> payload,
                              int code_length, std::size_t count);

struct PackedCodes {
  int code_length = 0;
  std::size_t count = 0;
  std::vector<std::uint8_t> payload;
};

void write_code_file(const BinaryCodeMatrix& codes,
                     const std::filesystem::path& path);
PackedCodes read_code_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::int64_t start = 0;
  std::int64_t count = 0;
};

struct LocalFeatureManifest {
  int dim = 0;
  std::vector<ManifestEntry> images;
};

LocalFeatureManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const LocalFeatureManifest& manifest,
                    const std::filesystem::path& path);

/// Backing feature file of a manifest: same path with extension ".fvecs".
std::filesystem::path manifest_backing_file(
    const std::filesystem::path& manifest_path);

/// Checks contiguity, n_i >= 1, and that the entries cover exactly
/// `backing_count` vectors.
void validate_manifest(const LocalFeatureManifest& manifest,
                       std::int64_t backing_count);

std::vector<LocalFeatureSet> load_local_features(
    const std::filesystem::path& manifest_path);
std::vector<LocalFeatureSet> load_local_features(
    const std::filesystem::path& manifest_path,
    const std::filesystem::path& features_path);

/// Writes `sets` as a manifest plus its backing fvecs file.
void save_local_features(const std::vector<LocalFeatureSet>& sets,
                         const std::filesystem::path& manifest_path);

}  // namespace agh
