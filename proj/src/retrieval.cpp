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

#include "agh/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace agh {

GroundTruth build_ground_truth(const DataMatrix& queries,
                               const DataMatrix& database, int k, int threads) {
  if (queries.rows() != database.rows())
    throw std::invalid_argument("ground truth: query and database dimensions differ");
  if (k < 1) throw std::invalid_argument("ground truth: k must be positive");
  if (k > database.cols())
    throw std::invalid_argument("ground truth: k=" + std::to_string(k) +
                                " exceeds database size " +
                                std::to_string(database.cols()));
  GroundTruth gt;
  gt.k = k;
  gt.neighbors.resize(static_cast<std::size_t>(queries.cols()));
  const Eigen::Index n = database.cols();
  parallel_for(gt.neighbors.size(), threads, [&](std::size_t q) {
    const auto query = queries.col(static_cast<Eigen::Index>(q));
    std::vector<std::pair<double, std::int32_t>> scored(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
      scored[static_cast<std::size_t>(j)] = {(database.col(j) - query).squaredNorm(),
                                             static_cast<std::int32_t>(j)};
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
    auto& out = gt.neighbors[q];
    out.reserve(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) out.push_back(scored[static_cast<std::size_t>(r)].second);
  });
  return gt;
}

void validate_ground_truth(const GroundTruth& gt, std::size_t database_size) {
  if (gt.k < 1) throw std::invalid_argument("ground truth: k must be positive");
  for (std::size_t q = 0; q < gt.neighbors.size(); ++q) {
    const auto& list = gt.neighbors[q];
    if (list.size() != static_cast<std::size_t>(gt.k))
      throw std::invalid_argument("ground truth: query " + std::to_string(q) +
                                  " has " + std::to_string(list.size()) +
                                  " neighbors, expected " + std::to_string(gt.k));
    std::vector<std::int32_t> sorted = list;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0 ||
        static_cast<std::size_t>(sorted.back()) >= database_size)
      throw std::invalid_argument("ground truth: query " + std::to_string(q) +
                                  " has an index outside [0, " +
                                  std::to_string(database_size) + ")");
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("ground truth: query " + std::to_string(q) +
                                  " has duplicate neighbors");
  }
}

IntMatrix ground_truth_to_ivecs(const GroundTruth& gt) {
  IntMatrix out(gt.k, static_cast<Eigen::Index>(gt.neighbors.size()));
  for (std::size_t q = 0; q < gt.neighbors.size(); ++q) {
    if (gt.neighbors[q].size() != static_cast<std::size_t>(gt.k))
      throw std::invalid_argument("ground truth: ragged neighbor lists");
    for (int r = 0; r < gt.k; ++r)
      out(r, static_cast<Eigen::Index>(q)) = gt.neighbors[q][static_cast<std::size_t>(r)];
  }
  return out;
}

GroundTruth ground_truth_from_ivecs(const IntMatrix& records) {
  GroundTruth gt;
  gt.k = static_cast<int>(records.rows());
  gt.neighbors.resize(static_cast<std::size_t>(records.cols()));
  for (Eigen::Index q = 0; q < records.cols(); ++q)
    gt.neighbors[static_cast<std::size_t>(q)].assign(records.col(q).data(),
                                                     records.col(q).data() + records.rows());
  return gt;
}

PackedCodeSet::PackedCodeSet(const BinaryCodeMatrix& codes)
    : code_length_(static_cast<int>(codes.rows())),
      count_(static_cast<std::size_t>(codes.cols())),
      words_((static_cast<std::size_t>(codes.rows()) + 63) / 64),
      bits_(words_ * count_, 0) {
  if (!is_binary(codes)) throw std::invalid_argument("codes have entries outside {-1,+1}");
  for (std::size_t j = 0; j < count_; ++j)
    for (int k = 0; k < code_length_; ++k)
      if (codes(k, static_cast<Eigen::Index>(j)) > 0.0)
        bits_[j * words_ + static_cast<std::size_t>(k) / 64] |= std::uint64_t{1} << (k % 64);
}

int PackedCodeSet::distance(std::size_t a, const PackedCodeSet& other,
                            std::size_t b) const {
  const std::uint64_t* x = bits_.data() + a * words_;
  const std::uint64_t* y = other.bits_.data() + b * other.words_;
  int d = 0;
  for (std::size_t w = 0; w < words_; ++w) d += std::popcount(x[w] ^ y[w]);
  return d;
}

IntMatrix hamming_distances(const BinaryCodeMatrix& query_codes,
                            const BinaryCodeMatrix& db_codes) {
  if (query_codes.rows() != db_codes.rows())
    throw std::invalid_argument("Hamming distance: code lengths differ");
  const PackedCodeSet queries(query_codes);
  const PackedCodeSet db(db_codes);
  IntMatrix out(static_cast<Eigen::Index>(db.size()),
                static_cast<Eigen::Index>(queries.size()));
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t j = 0; j < db.size(); ++j)
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) =
          db.distance(j, queries, q);
  return out;
}

RankingResult hamming_rank(const BinaryCodeMatrix& query_codes,
                           const BinaryCodeMatrix& db_codes,
                           std::size_t truncation,
                           std::span<const std::int32_t> self_ids, int threads) {
  if (query_codes.rows() != db_codes.rows())
    throw std::invalid_argument("Hamming ranking: query code length " +
                                std::to_string(query_codes.rows()) +
                                " differs from database code length " +
                                std::to_string(db_codes.rows()));
  if (!self_ids.empty() && self_ids.size() != static_cast<std::size_t>(query_codes.cols()))
    throw std::invalid_argument("Hamming ranking: one self id per query required");
  const PackedCodeSet queries(query_codes);
  const PackedCodeSet db(db_codes);
  const int L = queries.code_length();

  RankingResult result;
  result.truncation = truncation;
  result.lists.resize(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    const std::int32_t skip = self_ids.empty() ? -1 : self_ids[q];
    // Counting sort on distance; scanning the database in index order keeps
    // ties in ascending index order.
    std::vector<std::vector<std::int32_t>> buckets(static_cast<std::size_t>(L) + 1);
    for (std::size_t j = 0; j < db.size(); ++j) {
      if (static_cast<std::int32_t>(j) == skip) continue;
      buckets[static_cast<std::size_t>(db.distance(j, queries, q))].push_back(
          static_cast<std::int32_t>(j));
    }
    auto& list = result.lists[q];
    const std::size_t limit = truncation == 0 ? db.size() : truncation;
    for (const auto& bucket : buckets) {
      for (std::int32_t j : bucket) {
        if (list.size() == limit) return;
        list.push_back(j);
      }
    }
  });
  return result;
}

IntMatrix rankings_to_ivecs(const RankingResult& ranking) {
  if (ranking.lists.empty()) return IntMatrix(0, 0);
  const std::size_t len = ranking.lists.front().size();
  IntMatrix out(static_cast<Eigen::Index>(len),
                static_cast<Eigen::Index>(ranking.lists.size()));
  for (std::size_t q = 0; q < ranking.lists.size(); ++q) {
    if (ranking.lists[q].size() != len)
      throw std::invalid_argument("rankings have different lengths");
    for (std::size_t r = 0; r < len; ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) = ranking.lists[q][r];
  }
  return out;
}

double average_precision(std::span<const std::int32_t> ranking,
                         std::span<const std::int32_t> relevant,
                         std::size_t truncation) {
  if (relevant.empty()) throw std::invalid_argument("AP: empty relevant set");
  std::vector<std::int32_t> sorted(relevant.begin(), relevant.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t depth =
      truncation == 0 ? ranking.size() : std::min(truncation, ranking.size());
  const std::size_t denominator =
      truncation == 0 ? sorted.size() : std::min(sorted.size(), truncation);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (std::binary_search(sorted.begin(), sorted.end(), ranking[r])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(denominator);
}

std::vector<double> average_precisions(const RankingResult& ranking,
                                       const GroundTruth& gt) {
  if (ranking.lists.empty()) throw std::invalid_argument("mAP: empty query set");
  if (ranking.lists.size() != gt.neighbors.size())
    throw std::invalid_argument("mAP: " + std::to_string(ranking.lists.size()) +
                                " rankings but " +
                                std::to_string(gt.neighbors.size()) +
                                " ground-truth lists");
  std::vector<double> aps(ranking.lists.size());
  for (std::size_t q = 0; q < aps.size(); ++q)
    aps[q] = average_precision(ranking.lists[q], gt.neighbors[q], ranking.truncation);
  return aps;
}

double mean_average_precision(const RankingResult& ranking,
                              const GroundTruth& gt) {
  const auto aps = average_precisions(ranking, gt);
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

}  // namespace agh
