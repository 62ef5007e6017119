#ifndef SADIH_SIMILARITY_HPP_
#define SADIH_SIMILARITY_HPP_

// Algebra with the pairwise similarity S (s_ij = +1 for same class, -1
// otherwise) that never materializes an n x n matrix. Under single labels
// S = 2 Y^T Y - 1 1^T, every residual row depends only on the class of its
// sample, and the IRLS weights collapse to one value per class.

#include <cmath>
#include <string>

#include "sadih/error.hpp"
#include "sadih/types.hpp"

namespace sadih {

inline constexpr double kIrlsGuard = 1e-8;

// The distinct diagonal values of the IRLS matrix D; sample i uses
// weights[class_of[i]].
struct ClassWeights {
  Vector weights;

  static ClassWeights identity(int num_classes) { return {Vector::Ones(num_classes)}; }

  Vector per_sample(const LabelSet& labels) const {
    Vector d(labels.size());
    for (Index i = 0; i < labels.size(); ++i) d(i) = weights(labels[i]);
    return d;
  }
};

// Q = l * Y * S, c x n. Q(k, j) = l * n_k * (2 [class_j == k] - 1).
inline Matrix compute_Q(const LabelSet& labels, int code_length) {
  const int c = labels.num_classes();
  Matrix q(c, labels.size());
  for (Index j = 0; j < labels.size(); ++j) {
    for (int k = 0; k < c; ++k) {
      const double s = labels[j] == k ? 1.0 : -1.0;
      q(k, j) = code_length * static_cast<double>(labels.count(k)) * s;
    }
  }
  return q;
}

// ||u_k|| for the residual rows of l S - Y^T W B, one value per class.
inline Vector row_norms_per_class(const HashCodeMatrix& codes, const Matrix& w,
                                  const LabelSet& labels) {
  const double l = static_cast<double>(codes.rows());
  const double n = static_cast<double>(codes.cols());
  const Matrix gram = codes * codes.transpose();
  const Matrix class_sums = sum_by_class(codes, labels);
  const Vector total = codes.rowwise().sum();
  const double scale = std::max(1.0, l * l * n);

  Vector norms(labels.num_classes());
  for (int k = 0; k < labels.num_classes(); ++k) {
    const Vector v = w.row(k).transpose();
    const Vector s_times_codes = 2.0 * class_sums.col(k) - total;  // B s_k
    double sq = l * l * n - 2.0 * l * s_times_codes.dot(v) + v.dot(gram * v);
    if (sq < -1e-6 * scale) {
      throw NumericalError("negative squared residual norm " + std::to_string(sq) +
                           " for class " + std::to_string(k));
    }
    norms(k) = std::sqrt(std::max(sq, 0.0));
  }
  return norms;
}

inline ClassWeights compute_D(const Vector& norms, double eps = kIrlsGuard) {
  ClassWeights d;
  d.weights = norms.unaryExpr([eps](double u) { return 1.0 / (2.0 * std::max(u, eps)); });
  return d;
}

// Class-level columns of M = l R D S with R = W^T Y: column k equals
// l * (2 n_k d_k v_k - sum_m n_m d_m v_m).
inline Matrix class_level_M(const Matrix& w, const LabelSet& labels, const ClassWeights& d,
                            int code_length) {
  const Vector nd = labels.count_vector().cwiseProduct(d.weights);
  const Matrix weighted = w.transpose() * nd.asDiagonal();  // l x c, column k = n_k d_k v_k
  const Vector total = weighted.rowwise().sum();
  return static_cast<double>(code_length) * ((2.0 * weighted).colwise() - total);
}

// M = l R D S (l x n), the cross-term coefficient of the IRLS surrogate.
inline Matrix compute_M(const Matrix& w, const LabelSet& labels, const ClassWeights& d,
                        int code_length) {
  return expand_by_class(class_level_M(w, labels, d, code_length), labels);
}

// ||l S - V^T B||_21.
inline double l21_residual(const HashCodeMatrix& codes, const Matrix& w, const LabelSet& labels) {
  const Vector norms = row_norms_per_class(codes, w, labels);
  return labels.count_vector().dot(norms);
}

// ||l S - V^T B||_1.
inline double l1_residual(const HashCodeMatrix& codes, const Matrix& w, const LabelSet& labels) {
  const double l = static_cast<double>(codes.rows());
  const Matrix projections = w * codes;  // c x n, row k = v_k^T B
  double total = 0.0;
  for (Index j = 0; j < codes.cols(); ++j) {
    for (int k = 0; k < labels.num_classes(); ++k) {
      const double s = labels[j] == k ? l : -l;
      total += static_cast<double>(labels.count(k)) * std::abs(s - projections(k, j));
    }
  }
  return total;
}

}  // namespace sadih

#endif  // SADIH_SIMILARITY_HPP_
