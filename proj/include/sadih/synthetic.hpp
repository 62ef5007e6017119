#ifndef SADIH_SYNTHETIC_HPP_
#define SADIH_SYNTHETIC_HPP_

// Labeled Gaussian clusters for demos and tests.

#include <random>

#include "sadih/types.hpp"

namespace sadih {

struct LabeledData {
  FeatureMatrix x;
  LabelSet labels;
};

// Sample i belongs to class i % classes. Centers ~ N(0, separation^2 I),
// points = center + N(0, I).
inline LabeledData make_clusters(int classes, Index dim, Index n, double separation,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix centers(dim, classes);
  for (Index j = 0; j < centers.cols(); ++j) {
    for (Index i = 0; i < dim; ++i) centers(i, j) = separation * gauss(rng);
  }
  LabeledData out;
  out.x.resize(dim, n);
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) {
    const int k = static_cast<int>(s % classes);
    ids[static_cast<std::size_t>(s)] = k;
    for (Index i = 0; i < dim; ++i) out.x(i, s) = centers(i, k) + gauss(rng);
  }
  out.labels = LabelSet(std::move(ids), classes);
  return out;
}

// Columns [begin, end) of a labeled set.
inline LabeledData slice(const LabeledData& data, Index begin, Index end) {
  LabeledData out;
  out.x = data.x.middleCols(begin, end - begin);
  std::vector<int> ids(data.labels.class_of().begin() + begin, data.labels.class_of().begin() + end);
  out.labels = LabelSet(std::move(ids), data.labels.num_classes());
  return out;
}

}  // namespace sadih

#endif  // SADIH_SYNTHETIC_HPP_
