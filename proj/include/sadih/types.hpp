#ifndef SADIH_TYPES_HPP_
#define SADIH_TYPES_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sadih/error.hpp"

namespace sadih {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// d x n, one sample per column.
using FeatureMatrix = Matrix;

// l x n with entries exactly -1 or +1.
using HashCodeMatrix = Matrix;

// Sign with the tie rule sgn(0) = +1.
inline double sign_code(double value) {
#ifdef SADIH_MUTATE_SIGN_TIE
  return value > 0.0 ? 1.0 : -1.0;
#else
  return value >= 0.0 ? 1.0 : -1.0;
#endif
}

template <typename Derived>
Matrix sign_codes(const Eigen::MatrixBase<Derived>& values) {
  return values.unaryExpr([](double v) { return sign_code(v); });
}

inline bool is_binary_codes(const Matrix& codes) {
  return (codes.array().abs() == 1.0).all();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// Single-label class assignment. The one-hot c x n matrix Y is implied by
// class_of and never stored densely.
class LabelSet {
 public:
  LabelSet() = default;

  // num_classes < 0 infers c = max id + 1.
  explicit LabelSet(std::vector<int> class_of, int num_classes = -1)
      : class_of_(std::move(class_of)) {
    int max_id = -1;
    for (std::size_t i = 0; i < class_of_.size(); ++i) {
      if (class_of_[i] < 0) {
        throw DataError("label " + std::to_string(i) + " is negative");
      }
      max_id = std::max(max_id, class_of_[i]);
    }
    num_classes_ = num_classes < 0 ? max_id + 1 : num_classes;
    if (max_id >= num_classes_) {
      throw DataError("class id " + std::to_string(max_id) +
                      " out of range for " + std::to_string(num_classes_) +
                      " classes");
    }
    counts_.assign(static_cast<std::size_t>(num_classes_), 0);
    for (int k : class_of_) ++counts_[static_cast<std::size_t>(k)];
  }

  Index size() const { return static_cast<Index>(class_of_.size()); }
  int num_classes() const { return num_classes_; }
  int operator[](Index i) const { return class_of_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& class_of() const { return class_of_; }
  const std::vector<Index>& counts() const { return counts_; }
  Index count(int k) const { return counts_[static_cast<std::size_t>(k)]; }

  Vector count_vector() const {
    Vector v(num_classes_);
    for (int k = 0; k < num_classes_; ++k) v(k) = static_cast<double>(counts_[k]);
    return v;
  }

  bool all_classes_present() const {
    for (Index c : counts_) {
      if (c == 0) return false;
    }
    return true;
  }

  // Y as a dense matrix. Only for small problems and oracles.
  Matrix one_hot() const {
    Matrix y = Matrix::Zero(num_classes_, size());
    for (Index i = 0; i < size(); ++i) y((*this)[i], i) = 1.0;
    return y;
  }

 private:
  std::vector<int> class_of_;
  int num_classes_ = 0;
  std::vector<Index> counts_;
};

// Columns summed per class: returns rows x c, column k = sum of columns of
// `m` whose sample belongs to class k (that is m * Y^T).
inline Matrix sum_by_class(const Matrix& m, const LabelSet& labels) {
  Matrix sums = Matrix::Zero(m.rows(), labels.num_classes());
  for (Index i = 0; i < m.cols(); ++i) sums.col(labels[i]) += m.col(i);
  return sums;
}

// Expand a rows x c class-level matrix into rows x n (that is m * Y).
inline Matrix expand_by_class(const Matrix& per_class, const LabelSet& labels) {
  Matrix out(per_class.rows(), labels.size());
  for (Index i = 0; i < labels.size(); ++i) out.col(i) = per_class.col(labels[i]);
  return out;
}

}  // namespace sadih

#endif  // SADIH_TYPES_HPP_
