#ifndef SADIH_DATASET_HPP_
#define SADIH_DATASET_HPP_

// Feature/label ingestion, normalization and RBF anchor embedding.
//
// SDM1 matrix files: magic "SDM1", u32 LE d, u32 LE n, then d*n float32 LE
// values in column-major order (one sample contiguous).

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sadih/binary_io.hpp"
#include "sadih/error.hpp"
#include "sadih/types.hpp"

namespace sadih {

inline constexpr char kFeatureMagic[4] = {'S', 'D', 'M', '1'};
inline constexpr double kNormFloor = 1e-12;

struct NormalizationStats {
  Vector mean;
  Vector scale;
};

struct AnchorSet {
  Matrix anchors;  // d_raw x m
  double sigma = 1.0;
};

namespace detail {

inline std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void append_u32_le(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

}  // namespace detail

inline FeatureMatrix parse_features(const std::vector<unsigned char>& bytes,
                                    const std::string& source = "<memory>") {
  if (bytes.size() < 12) {
    throw DataError(source + ": malformed header: " + std::to_string(bytes.size()) +
                    " bytes, need 12 (byte offset " + std::to_string(bytes.size()) + ")");
  }
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw DataError(source + ": malformed header: bad magic at byte offset 0");
  }
  const std::uint32_t d = detail::read_u32_le(bytes.data() + 4);
  const std::uint32_t n = detail::read_u32_le(bytes.data() + 8);
  if (d == 0 || n == 0) {
    throw DataError(source + ": malformed header: empty matrix (d=" + std::to_string(d) +
                    ", n=" + std::to_string(n) + ") at byte offset 4");
  }
  const std::uint64_t expected = 12 + 4ull * d * n;
  if (bytes.size() < expected) {
    throw DataError(source + ": truncated payload: header promises " + std::to_string(d) + "x" +
                    std::to_string(n) + " values (" + std::to_string(expected) +
                    " bytes) but file ends at byte offset " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw DataError(source + ": " + std::to_string(bytes.size() - expected) +
                    " trailing bytes after payload at byte offset " + std::to_string(expected));
  }
  FeatureMatrix x(d, n);
  const unsigned char* p = bytes.data() + 12;
  for (std::uint64_t e = 0; e < std::uint64_t{d} * n; ++e, p += 4) {
    const float value = std::bit_cast<float>(detail::read_u32_le(p));
    if (!std::isfinite(value)) {
      throw DataError(source + ": non-finite value at entry " + std::to_string(e) + " (row " +
                      std::to_string(e % d) + ", column " + std::to_string(e / d) +
                      ", byte offset " + std::to_string(12 + 4 * e) + ")");
    }
    x(static_cast<Index>(e % d), static_cast<Index>(e / d)) = value;
  }
  return x;
}

inline FeatureMatrix load_features(const std::string& path) {
  return parse_features(io::read_file(path), path);
}

inline std::string serialize_features(const FeatureMatrix& x) {
  std::string out(kFeatureMagic, 4);
  detail::append_u32_le(out, static_cast<std::uint32_t>(x.rows()));
  detail::append_u32_le(out, static_cast<std::uint32_t>(x.cols()));
  out.reserve(out.size() + 4 * static_cast<std::size_t>(x.size()));
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      detail::append_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(x(i, j))));
    }
  }
  return out;
}

inline void write_features(const std::string& path, const FeatureMatrix& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  const std::string bytes = serialize_features(x);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Label text: either one class id per line, or CSV "index,class" lines with
// an optional "index,class" header. Multiple labels per sample are rejected.
inline LabelSet parse_labels(std::istream& in, const std::string& source = "<stream>") {
  std::vector<int> plain;
  std::vector<std::pair<long, int>> indexed;
  std::string line;
  long line_no = 0;
  auto parse_int = [&](const std::string& token, const char* what) {
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || token.empty()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": invalid " + what + " '" +
                      token + "'");
    }
    return value;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line == "index,class") continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() == 1 && fields[0].find_first_of(" \t") != std::string::npos) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": multiple labels per sample are not supported");
    }
    if (fields.size() > 2) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": multiple labels per sample are not supported");
    }
    if (fields.size() == 1) {
      plain.push_back(static_cast<int>(parse_int(fields[0], "class id")));
    } else {
      indexed.emplace_back(parse_int(fields[0], "index"),
                           static_cast<int>(parse_int(fields[1], "class id")));
    }
  }
  if (!plain.empty() && !indexed.empty()) {
    throw DataError(source + ": mixes plain and index,class label lines");
  }
  if (!indexed.empty()) {
    plain.assign(indexed.size(), -1);
    for (const auto& [index, k] : indexed) {
      if (index < 0 || index >= static_cast<long>(indexed.size())) {
        throw DataError(source + ": sample index " + std::to_string(index) + " out of range");
      }
      if (plain[static_cast<std::size_t>(index)] != -1) {
        throw DataError(source + ": sample index " + std::to_string(index) + " repeated");
      }
      plain[static_cast<std::size_t>(index)] = k;
    }
  }
  if (plain.empty()) throw DataError(source + ": no labels");
  for (std::size_t i = 0; i < plain.size(); ++i) {
    if (plain[i] < 0) {
      throw DataError(source + ": negative class id for sample " + std::to_string(i));
    }
  }
  return LabelSet(std::move(plain));
}

inline LabelSet load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file '" + path + "'");
  return parse_labels(in, path);
}

inline void write_labels(const std::string& path, const LabelSet& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (int k : labels.class_of()) out << k << '\n';
}

inline FeatureMatrix apply_normalization(const FeatureMatrix& x, const NormalizationStats& stats) {
  if (x.rows() != stats.mean.size()) {
    throw DataError("feature dimension " + std::to_string(x.rows()) +
                    " does not match normalization dimension " +
                    std::to_string(stats.mean.size()));
  }
  return (x.colwise() - stats.mean).array().colwise() / stats.scale.array();
}

// Per-dimension zero mean / unit variance (population variance). Dimensions
// whose variance is at or below kNormFloor keep scale 1 and map to zero.
inline std::pair<FeatureMatrix, NormalizationStats> normalize_features(const FeatureMatrix& x) {
  NormalizationStats stats;
  stats.mean = x.rowwise().mean();
  stats.scale.resize(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    const double var = (x.row(r).array() - stats.mean(r)).square().mean();
    stats.scale(r) = var > kNormFloor ? std::sqrt(var) : 1.0;
  }
  return {apply_normalization(x, stats), stats};
}

// Entry (j, i) = exp(-||x_i - a_j||^2 / sigma).
inline FeatureMatrix anchor_embed(const FeatureMatrix& x, const AnchorSet& a) {
  if (x.rows() != a.anchors.rows()) {
    throw DataError("anchor dimension " + std::to_string(a.anchors.rows()) +
                    " does not match feature dimension " + std::to_string(x.rows()));
  }
  if (!(a.sigma > 0.0)) throw ConfigError("sigma must be positive");
  FeatureMatrix out(a.anchors.cols(), x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    for (Index j = 0; j < a.anchors.cols(); ++j) {
      out(j, i) = std::exp(-(x.col(i) - a.anchors.col(j)).squaredNorm() / a.sigma);
    }
  }
  return out;
}

// Mean squared distance over distinct anchor pairs; 1 when undefined.
inline double default_sigma(const Matrix& anchors) {
  const Index m = anchors.cols();
  if (m < 2) return 1.0;
  double total = 0.0;
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) total += (anchors.col(a) - anchors.col(b)).squaredNorm();
  }
  const double mean = total / (0.5 * static_cast<double>(m) * static_cast<double>(m - 1));
  return mean > 0.0 ? mean : 1.0;
}

// Indices of m columns drawn uniformly without replacement.
inline std::vector<Index> sample_anchor_indices(Index n, Index m, std::uint64_t seed) {
  if (m < 1 || m > n) {
    throw ConfigError("anchor count " + std::to_string(m) + " must be in [1, " +
                      std::to_string(n) + "]");
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  perm.resize(static_cast<std::size_t>(m));
  return perm;
}

// sigma <= 0 selects default_sigma.
inline AnchorSet sample_anchors(const FeatureMatrix& x, Index m, std::uint64_t seed,
                                double sigma = 0.0) {
  const auto idx = sample_anchor_indices(x.cols(), m, seed);
  AnchorSet set;
  set.anchors.resize(x.rows(), m);
  for (Index j = 0; j < m; ++j) set.anchors.col(j) = x.col(idx[static_cast<std::size_t>(j)]);
  set.sigma = sigma > 0.0 ? sigma : default_sigma(set.anchors);
  return set;
}

}  // namespace sadih

#endif  // SADIH_DATASET_HPP_
