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

#include "agh/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

namespace agh {
namespace {

constexpr char kCodeMagic[4] = {'A', 'G', 'H', '1'};

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path,
               const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t load_u64(const std::uint8_t* p) {
  return static_cast<std::uint64_t>(load_u32(p)) |
         (static_cast<std::uint64_t>(load_u32(p + 4)) << 32);
}

void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void store_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  store_u32(out, static_cast<std::uint32_t>(v));
  store_u32(out, static_cast<std::uint32_t>(v >> 32));
}

// Shared record walker for fvecs/ivecs. `Convert` maps the 4 payload bytes
// (as u32) to the element type.
template <typename Scalar, typename Convert>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> read_vecs(
    const std::filesystem::path& path, std::optional<int> expected_dim,
    Convert convert) {
  const auto bytes = read_all(path);
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (bytes.empty()) return Result(expected_dim.value_or(0), 0);
  if (bytes.size() < 4) throw FormatError(path.string() + ": truncated header");

  const auto dim = static_cast<std::int32_t>(load_u32(bytes.data()));
  if (dim <= 0)
    throw FormatError(path.string() + ": non-positive dimension " +
                      std::to_string(dim));
  if (expected_dim && *expected_dim != dim)
    throw FormatError(path.string() + ": dimension " + std::to_string(dim) +
                      " does not match expected " +
                      std::to_string(*expected_dim));
  const std::size_t record = 4 + 4 * static_cast<std::size_t>(dim);
  if (bytes.size() % record != 0)
    throw FormatError(path.string() + ": truncated file (" +
                      std::to_string(bytes.size()) +
                      " bytes is not a multiple of record size " +
                      std::to_string(record) + ")");
  const std::size_t count = bytes.size() / record;

  Result out(dim, static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const std::uint8_t* rec = bytes.data() + j * record;
    const auto d = static_cast<std::int32_t>(load_u32(rec));
    if (d != dim)
      throw FormatError(path.string() + ": record " + std::to_string(j) +
                        " has dimension " + std::to_string(d) + ", expected " +
                        std::to_string(dim));
    for (std::int32_t i = 0; i < dim; ++i)
      out(i, static_cast<Eigen::Index>(j)) = convert(load_u32(rec + 4 + 4 * i));
  }
  return out;
}

template <typename Derived, typename Convert>
void write_vecs(const Eigen::MatrixBase<Derived>& m,
                const std::filesystem::path& path, Convert convert) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(m.cols()) *
                (4 + 4 * static_cast<std::size_t>(m.rows())));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    store_u32(bytes, static_cast<std::uint32_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) store_u32(bytes, convert(m(i, j)));
  }
  write_all(path, bytes);
}

}  // namespace

DataMatrix read_fvecs(const std::filesystem::path& path,
                      std::optional<int> expected_dim) {
  return read_vecs<double>(path, expected_dim, [](std::uint32_t raw) {
    return static_cast<double>(std::bit_cast<float>(raw));
  });
}

void write_fvecs(const DataMatrix& matrix, const std::filesystem::path& path) {
  if (matrix.cols() > 0 && matrix.rows() == 0)
    throw FormatError("cannot write zero-dimensional vectors");
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
      const double v = matrix(i, j);
      if (!std::isfinite(v))
        throw FormatError("non-finite value at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
      if (!std::isfinite(static_cast<float>(v)))
        throw FormatError("value at (" + std::to_string(i) + ", " +
                          std::to_string(j) +
                          ") is not representable as a 32-bit float");
    }
  }
  write_vecs(matrix, path, [](double v) {
    return std::bit_cast<std::uint32_t>(static_cast<float>(v));
  });
}

IntMatrix read_ivecs(const std::filesystem::path& path,
                     std::optional<int> expected_dim) {
  return read_vecs<std::int32_t>(path, expected_dim, [](std::uint32_t raw) {
    return static_cast<std::int32_t>(raw);
  });
}

void write_ivecs(const IntMatrix& matrix, const std::filesystem::path& path) {
  if (matrix.cols() > 0 && matrix.rows() == 0)
    throw FormatError("cannot write zero-dimensional vectors");
  write_vecs(matrix, path,
             [](std::int32_t v) { return static_cast<std::uint32_t>(v); });
}

std::vector<std::uint8_t> pack_codes(const BinaryCodeMatrix& codes) {
  const auto L = static_cast<int>(codes.rows());
  const std::size_t stride = code_bytes(L);
  std::vector<std::uint8_t> payload(stride * static_cast<std::size_t>(codes.cols()), 0);
  for (Eigen::Index j = 0; j < codes.cols(); ++j) {
    std::uint8_t* code = payload.data() + static_cast<std::size_t>(j) * stride;
    for (int k = 0; k < L; ++k) {
      const double v = codes(k, j);
      if (v == 1.0) {
        code[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
      } else if (v != -1.0) {
        throw FormatError("code entry (" + std::to_string(k) + ", " +
                          std::to_string(j) + ") is not in {-1,+1}");
      }
    }
  }
  return payload;
}

BinaryCodeMatrix unpack_codes(std::span<const std::uint8_t> payload,
                              int code_length, std::size_t count) {
  if (code_length <= 0) throw FormatError("code length must be positive");
  const std::size_t stride = code_bytes(code_length);
  if (payload.size() != stride * count)
    throw FormatError("payload size " + std::to_string(payload.size()) +
                      " does not match " + std::to_string(count) +
                      " codes of length " + std::to_string(code_length));
  BinaryCodeMatrix codes(code_length, static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const std::uint8_t* code = payload.data() + j * stride;
    for (int k = 0; k < code_length; ++k)
      codes(k, static_cast<Eigen::Index>(j)) = (code[k / 8] >> (k % 8)) & 1u ? 1.0 : -1.0;
    if (code_length % 8 != 0 &&
        (code[stride - 1] >> (code_length % 8)) != 0)
      throw FormatError("code " + std::to_string(j) +
                        " has nonzero padding bits");
  }
  return codes;
}

void write_code_file(const BinaryCodeMatrix& codes,
                     const std::filesystem::path& path) {
  if (codes.rows() <= 0) throw FormatError("code length must be positive");
  std::vector<std::uint8_t> bytes(kCodeMagic, kCodeMagic + 4);
  store_u32(bytes, static_cast<std::uint32_t>(codes.rows()));
  store_u64(bytes, static_cast<std::uint64_t>(codes.cols()));
  const auto payload = pack_codes(codes);
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  write_all(path, bytes);
}

PackedCodes read_code_file(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCodeMagic, 4) != 0)
    throw FormatError(path.string() + ": not a code file (bad magic)");
  PackedCodes out;
  out.code_length = static_cast<int>(load_u32(bytes.data() + 4));
  out.count = load_u64(bytes.data() + 8);
  if (out.code_length <= 0)
    throw FormatError(path.string() + ": code length must be positive");
  out.payload.assign(bytes.begin() + 16, bytes.end());
  if (out.payload.size() != out.count * code_bytes(out.code_length))
    throw FormatError(path.string() + ": payload size mismatch");
  return out;
}

LocalFeatureManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  LocalFeatureManifest manifest;
  std::int64_t m = 0;
  if (!(in >> manifest.dim >> m) || manifest.dim <= 0 || m <= 0)
    throw FormatError(path.string() + ": bad header, expected \"D m\"");
  manifest.images.resize(static_cast<std::size_t>(m));
  for (auto& entry : manifest.images) {
    if (!(in >> entry.start >> entry.count))
      throw FormatError(path.string() + ": expected " + std::to_string(m) +
                        " entries");
  }
  std::string extra;
  if (in >> extra) throw FormatError(path.string() + ": trailing content");
  return manifest;
}

void write_manifest(const LocalFeatureManifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << manifest.dim << ' ' << manifest.images.size() << '\n';
  for (const auto& e : manifest.images) out << e.start << ' ' << e.count << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

std::filesystem::path manifest_backing_file(
    const std::filesystem::path& manifest_path) {
  auto p = manifest_path;
  p.replace_extension(".fvecs");
  return p;
}

void validate_manifest(const LocalFeatureManifest& manifest,
                       std::int64_t backing_count) {
  std::int64_t expected_start = 0;
  for (std::size_t i = 0; i < manifest.images.size(); ++i) {
    const auto& e = manifest.images[i];
    if (e.count < 1)
      throw FormatError("manifest image " + std::to_string(i) +
                        " has no local features");
    if (e.start != expected_start)
      throw FormatError("manifest image " + std::to_string(i) + " starts at " +
                        std::to_string(e.start) + ", expected " +
                        std::to_string(expected_start) + " (gap or overlap)");
    expected_start += e.count;
  }
  if (expected_start != backing_count)
    throw FormatError("manifest covers " + std::to_string(expected_start) +
                      " vectors but backing file has " +
                      std::to_string(backing_count));
}

std::vector<LocalFeatureSet> load_local_features(
    const std::filesystem::path& manifest_path) {
  return load_local_features(manifest_path,
                             manifest_backing_file(manifest_path));
}

std::vector<LocalFeatureSet> load_local_features(
    const std::filesystem::path& manifest_path,
    const std::filesystem::path& features_path) {
  const auto manifest = read_manifest(manifest_path);
  const auto features = read_fvecs(features_path, manifest.dim);
  validate_manifest(manifest, features.cols());
  std::vector<LocalFeatureSet> sets;
  sets.reserve(manifest.images.size());
  for (const auto& e : manifest.images)
    sets.emplace_back(features.middleCols(e.start, e.count));
  return sets;
}

void save_local_features(const std::vector<LocalFeatureSet>& sets,
                         const std::filesystem::path& manifest_path) {
  if (sets.empty()) throw FormatError("cannot save an empty dataset");
  LocalFeatureManifest manifest;
  manifest.dim = static_cast<int>(sets.front().rows());
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].rows() != manifest.dim)
      throw FormatError("image " + std::to_string(i) + " has dimension " +
                        std::to_string(sets[i].rows()) + ", expected " +
                        std::to_string(manifest.dim));
    manifest.images.push_back({total, sets[i].cols()});
    total += sets[i].cols();
  }
  validate_manifest(manifest, total);
  DataMatrix all(manifest.dim, total);
  for (std::size_t i = 0; i < sets.size(); ++i)
    all.middleCols(manifest.images[i].start, sets[i].cols()) = sets[i];
  write_fvecs(all, manifest_backing_file(manifest_path));
  write_manifest(manifest, manifest_path);
}

}  // namespace agh
