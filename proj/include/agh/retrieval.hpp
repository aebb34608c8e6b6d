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

// Evaluation protocol: ground truth is the k exact Euclidean nearest
// neighbors of each query; database items are ranked by Hamming distance of
// their codes (ties by ascending index); quality is mean average precision
// over the (optionally truncated) rankings.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "agh/types.hpp"

namespace agh {

struct GroundTruth {
  int k = 0;
  std::vector<std::vector<std::int32_t>> neighbors;  // per query, nearest first
};

GroundTruth build_ground_truth(const DataMatrix& queries,
                               const DataMatrix& database, int k,
                               int threads = 1);

/// Each list must hold exactly k distinct indices in [0, database_size).
void validate_ground_truth(const GroundTruth& gt, std::size_t database_size);

/// k x q matrix (one ivecs record per query) and back.
IntMatrix ground_truth_to_ivecs(const GroundTruth& gt);
GroundTruth ground_truth_from_ivecs(const IntMatrix& records);

/// Codes packed into 64-bit words for popcount distances.
class PackedCodeSet {
 public:
  explicit PackedCodeSet(const BinaryCodeMatrix& codes);

  int code_length() const { return code_length_; }
  std::size_t size() const { return count_; }
  int distance(std::size_t a, const PackedCodeSet& other, std::size_t b) const;

 private:
  int code_length_;
  std::size_t count_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

/// Distances, db_count x query_count.
IntMatrix hamming_distances(const BinaryCodeMatrix& query_codes,
                            const BinaryCodeMatrix& db_codes);

struct RankingResult {
  /// Truncation length K, 0 when rankings are complete.
  std::size_t truncation = 0;
  std::vector<std::vector<std::int32_t>> lists;
};

/// Ranks the database for every query. `truncation` 0 keeps the full list.
/// When `self_ids` is non-empty, database item self_ids[q] is dropped from the
/// ranking of query q.
RankingResult hamming_rank(const BinaryCodeMatrix& query_codes,
                           const BinaryCodeMatrix& db_codes,
                           std::size_t truncation,
                           std::span<const std::int32_t> self_ids = {},
                           int threads = 1);

IntMatrix rankings_to_ivecs(const RankingResult& ranking);

/// Sum of precision@r over relevant items retrieved within the truncation,
/// divided by min(|relevant|, truncation) (|relevant| when untruncated).
double average_precision(std::span<const std::int32_t> ranking,
                         std::span<const std::int32_t> relevant,
                         std::size_t truncation);

std::vector<double> average_precisions(const RankingResult& ranking,
                                       const GroundTruth& gt);

double mean_average_precision(const RankingResult& ranking,
                              const GroundTruth& gt);

}  // namespace agh
