#ifndef SADIH_INDEX_HPP_
#define SADIH_INDEX_HPP_

// Exhaustive Hamming ranking over packed codes.

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "sadih/encoder.hpp"

namespace sadih {

using CodeView = std::span<const std::uint64_t>;

inline int hamming(CodeView a, CodeView b) {
  if (a.size() != b.size()) {
    throw DataError("hamming: code word counts differ (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  int distance = 0;
  for (std::size_t w = 0; w < a.size(); ++w) distance += std::popcount(a[w] ^ b[w]);
  return distance;
}

inline void check_same_length(const PackedCodes& a, const PackedCodes& b) {
  if (a.bits() != b.bits()) {
    throw DataError("code length mismatch: " + std::to_string(a.bits()) + " vs " +
                    std::to_string(b.bits()) + " bits");
  }
}

inline int hamming(const PackedCodes& a, Index i, const PackedCodes& b, Index j) {
  check_same_length(a, b);
  return hamming(a.code(i), b.code(j));
}

inline std::vector<int> hamming_distances(CodeView query, const PackedCodes& db) {
  if (query.size() != db.words_per_code()) throw DataError("query code length does not match database");
  std::vector<int> dist(static_cast<std::size_t>(db.size()));
  for (Index i = 0; i < db.size(); ++i) dist[static_cast<std::size_t>(i)] = hamming(query, db.code(i));
  return dist;
}

// Database indices by ascending distance, ties by ascending index. Counting
// sort over the distance range [0, l].
inline std::vector<Index> rank(CodeView query, const PackedCodes& db) {
  const std::vector<int> dist = hamming_distances(query, db);
  std::vector<Index> offsets(static_cast<std::size_t>(db.bits()) + 2, 0);
  for (int d : dist) ++offsets[static_cast<std::size_t>(d) + 1];
  for (std::size_t b = 1; b < offsets.size(); ++b) offsets[b] += offsets[b - 1];
  std::vector<Index> order(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    order[static_cast<std::size_t>(offsets[static_cast<std::size_t>(dist[i])]++)] =
        static_cast<Index>(i);
  }
  return order;
}

inline std::vector<Index> rank(const PackedCodes& queries, Index q, const PackedCodes& db) {
  check_same_length(queries, db);
  return rank(queries.code(q), db);
}

struct Neighbor {
  Index index = 0;
  int distance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

inline std::vector<Neighbor> top_k(CodeView query, const PackedCodes& db, Index k) {
  std::vector<Neighbor> out;
  if (k <= 0) return out;
  const std::vector<Index> order = rank(query, db);
  const auto take = static_cast<std::size_t>(std::min<Index>(k, db.size()));
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) out.push_back({order[r], hamming(query, db.code(order[r]))});
  return out;
}

inline std::vector<Neighbor> top_k(const PackedCodes& queries, Index q, const PackedCodes& db,
                                   Index k) {
  check_same_length(queries, db);
  return top_k(queries.code(q), db, k);
}

}  // namespace sadih

#endif  // SADIH_INDEX_HPP_
