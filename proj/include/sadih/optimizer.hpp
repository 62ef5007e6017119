#ifndef SADIH_OPTIMIZER_HPP_
#define SADIH_OPTIMIZER_HPP_

// Alternating discrete optimization of
//
//   ||l S - (W^T Y)^T B||_{21 or 1} + alpha ||X - P2 W^T Y||^2
//     + beta ||W^T Y - P1 X||^2 + gamma (||P2||^2 + ||W^T Y||^2)
//
// over B in {-1,+1}^{l x n}, W (c x l), row-orthonormal P1 (l x d) and
// P2 (d x l). Every step works with class-level quantities so the cost is
// linear in n.

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sadih/error.hpp"
#include "sadih/similarity.hpp"
#include "sadih/types.hpp"

namespace sadih {

enum class Variant { kL21, kL1 };
enum class WeightMode { kIdentity, kIrls };

inline std::string to_string(Variant v) { return v == Variant::kL1 ? "L1" : "L21"; }

inline Variant parse_variant(const std::string& s) {
  if (s == "L1" || s == "l1") return Variant::kL1;
  if (s == "L21" || s == "l21") return Variant::kL21;
  throw ConfigError("variant: expected L1 or L21, got '" + s + "'");
}

struct Hyperparams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1e-3;
  int bits = 16;
  Variant variant = Variant::kL1;
  int max_iters = 5;
  double irls_eps = kIrlsGuard;
  std::uint64_t seed = 0;
  // Early stop when the relative objective improvement of an outer
  // iteration drops below this. Zero disables early stopping.
  double tolerance = 1e-5;
  int max_sweeps = 10;

  void validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");
    if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (bits < 1) throw ConfigError("bits must be at least 1");
    if (max_iters < 1) throw ConfigError("iters must be at least 1");
    if (!(irls_eps > 0.0)) throw ConfigError("irls eps must be positive");
    if (max_sweeps < 1) throw ConfigError("max sweeps must be at least 1");
  }
};

struct ModelParams {
  Matrix w;   // c x l
  Matrix p1;  // l x d, row-orthonormal
  Matrix p2;  // d x l
};

struct ObjectiveTerms {
  double similarity = 0.0;      // l21 or l1 residual
  double reconstruction = 0.0;  // alpha ||X - P2 V||^2
  double embedding = 0.0;       // beta ||V - P1 X||^2
  double regularization = 0.0;  // gamma (||P2||^2 + ||V||^2)

  double total() const { return similarity + reconstruction + embedding + regularization; }
};

struct IterationRecord {
  int iteration = 0;
  ObjectiveTerms terms;
  double objective = 0.0;
  double seconds = 0.0;
  int guard_rejections = 0;
  unsigned rejected_steps = 0;  // bit set of StepKind values
  int dcc_sweeps = 0;
  Index bit_flips = 0;
};

enum StepKind : unsigned { kStepB = 1, kStepW = 2, kStepP1 = 4, kStepP2 = 8 };

inline std::string describe_steps(unsigned mask) {
  std::string out;
  for (auto [bit, name] : {std::pair{kStepB, "B"}, {kStepW, "W"}, {kStepP1, "P1"}, {kStepP2, "P2"}}) {
    if (mask & bit) out += (out.empty() ? "" : "|") + std::string(name);
  }
  return out;
}

struct TrainTrace {
  std::vector<IterationRecord> iterations;  // entry 0 is the initial state
  bool converged = false;

  int guard_rejections() const {
    int total = 0;
    for (const auto& it : iterations) total += it.guard_rejections;
    return total;
  }
};

struct TrainResult {
  ModelParams params;
  HashCodeMatrix codes;
  TrainTrace trace;
};

// ---------------------------------------------------------------------------
// Objective

inline ObjectiveTerms evaluate_objective(const FeatureMatrix& x, const LabelSet& labels,
                                         const HashCodeMatrix& codes, const ModelParams& p,
                                         const Hyperparams& h) {
  ObjectiveTerms t;
  t.similarity = h.variant == Variant::kL21 ? l21_residual(codes, p.w, labels)
                                            : l1_residual(codes, p.w, labels);
  const Matrix prototypes = p.w.transpose();  // l x c
  const Matrix decoded = p.p2 * prototypes;   // d x c
  const Matrix projected = p.p1 * x;          // l x n
  double recon = 0.0;
  double embed = 0.0;
  for (Index i = 0; i < x.cols(); ++i) {
    const int k = labels[i];
    recon += (x.col(i) - decoded.col(k)).squaredNorm();
    embed += (prototypes.col(k) - projected.col(i)).squaredNorm();
  }
  t.reconstruction = h.alpha * recon;
  t.embedding = h.beta * embed;
  const double v_norm = labels.count_vector().dot(p.w.rowwise().squaredNorm());
  t.regularization = h.gamma * (p.p2.squaredNorm() + v_norm);
  return t;
}

// ---------------------------------------------------------------------------
// B-step

// B = sgn(W^T Q). All samples of a class receive the same code.
inline HashCodeMatrix update_B_l1(const Matrix& w, const LabelSet& labels, int code_length) {
  const Matrix per_class =
      class_level_M(w, labels, ClassWeights::identity(labels.num_classes()), code_length);
  return expand_by_class(sign_codes(per_class), labels);
}

// G = R D R^T = sum_k n_k d_k v_k v_k^T.
inline Matrix weighted_prototype_gram(const Matrix& w, const LabelSet& labels,
                                      const ClassWeights& d) {
  const Vector nd = labels.count_vector().cwiseProduct(d.weights);
  return w.transpose() * nd.asDiagonal() * w;
}

namespace detail {

inline RowVector dcc_row(int k, const HashCodeMatrix& codes, const Matrix& gram, const Matrix& m) {
  Vector coupling = gram.col(k);
  coupling(k) = 0.0;
  const RowVector field = m.row(k) - coupling.transpose() * codes;
  return sign_codes(field);
}

}  // namespace detail

// Row k of B minimizing the IRLS surrogate with every other row fixed:
// b = sgn(q - Bbar^T Rbar D r), where q is row k of M.
inline RowVector dcc_row_update(int k, const HashCodeMatrix& codes, const Matrix& w,
                                const Matrix& m, const ClassWeights& d, const LabelSet& labels) {
  return detail::dcc_row(k, codes, weighted_prototype_gram(w, labels, d), m);
}

// Value of Tr(B^T R D R^T B) - 2 tr(B^T M): the IRLS objective without its
// B-independent constant.
inline double irls_surrogate(const HashCodeMatrix& codes, const Matrix& w, const LabelSet& labels,
                             const ClassWeights& d) {
  const int l = static_cast<int>(codes.rows());
  const Matrix gram = weighted_prototype_gram(w, labels, d);
  const Matrix m = class_level_M(w, labels, d, l);
  double cross = 0.0;
  for (Index j = 0; j < codes.cols(); ++j) cross += m.col(labels[j]).dot(codes.col(j));
  return (gram.cwiseProduct(codes * codes.transpose())).sum() - 2.0 * cross;
}

// Tr((l S - Y^T W B)^T D (l S - Y^T W B)) evaluated without n x n terms.
inline double irls_objective(const HashCodeMatrix& codes, const Matrix& w, const LabelSet& labels,
                             const ClassWeights& d) {
  const double l = static_cast<double>(codes.rows());
  const double n = static_cast<double>(codes.cols());
  const double constant = l * l * n * labels.count_vector().dot(d.weights);
  return constant + irls_surrogate(codes, w, labels, d);
}

struct BStepResult {
  HashCodeMatrix codes;
  ClassWeights weights;
  int sweeps = 0;
  Index flips = 0;
};

// IRLS weights from the current iterate, then cyclic row sweeps until no
// bit flips or max_sweeps.
inline BStepResult update_B_l21(const HashCodeMatrix& codes, const Matrix& w,
                                const LabelSet& labels, const Hyperparams& h) {
  const int l = static_cast<int>(codes.rows());
  BStepResult out;
  out.weights = compute_D(row_norms_per_class(codes, w, labels), h.irls_eps);
  out.codes = codes;
  const Matrix gram = weighted_prototype_gram(w, labels, out.weights);
  const Matrix m = compute_M(w, labels, out.weights, l);
  for (out.sweeps = 1; out.sweeps <= h.max_sweeps; ++out.sweeps) {
    Index flips = 0;
    for (int k = 0; k < l; ++k) {
      const RowVector row = detail::dcc_row(k, out.codes, gram, m);
      flips += (row.array() != out.codes.row(k).array()).count();
      out.codes.row(k) = row;
    }
    out.flips += flips;
    if (flips == 0) break;
  }
  out.sweeps = std::min(out.sweeps, h.max_sweeps);
  return out;
}

// ---------------------------------------------------------------------------
// W-step

// Value of the W-step objective
//   Tr(U^T D U) + alpha ||X - P2 W^T Y||^2 + beta ||W^T Y - P1 X||^2 + gamma ||W^T Y||^2.
inline double w_step_objective(const HashCodeMatrix& codes, const Matrix& w,
                               const LabelSet& labels, const FeatureMatrix& x, const Matrix& p1,
                               const Matrix& p2, const ClassWeights& d, const Hyperparams& h) {
  const ObjectiveTerms t = evaluate_objective(x, labels, codes, {w, p1, p2}, h);
  const double v_norm = labels.count_vector().dot(w.rowwise().squaredNorm());
  return irls_objective(codes, w, labels, d) + t.reconstruction + t.embedding + h.gamma * v_norm;
}

// Exact minimizer of the W-step objective. Because Y D Y^T and Y Y^T are
// diagonal, the stationarity equation
//   (Y D Y^T) W (B B^T) + (Y Y^T) W (alpha P2^T P2 + (beta + gamma) I)
//     = l Y D S B^T + Y X^T (alpha P2 + beta P1^T)
// decouples into one l x l system per class.
inline Matrix update_W(const HashCodeMatrix& codes, const LabelSet& labels,
                       const FeatureMatrix& x, const Matrix& p1, const Matrix& p2,
                       const ClassWeights& d, const Hyperparams& h) {
  const int c = labels.num_classes();
  const Index l = codes.rows();
  for (int k = 0; k < c; ++k) {
    if (labels.count(k) == 0) {
      throw DataError("class " + std::to_string(k) +
                      " has no training samples; relabel classes to a contiguous range");
    }
  }
  const Matrix gram = codes * codes.transpose();
  const Matrix code_sums = sum_by_class(codes, labels);  // B Y^T
  const Vector code_total = codes.rowwise().sum();
  const Matrix feature_sums = sum_by_class(x, labels);  // X Y^T
  const Vector counts = labels.count_vector();

  // rhs^T, l x c.
  Matrix rhs = static_cast<double>(l) * ((2.0 * code_sums).colwise() - code_total) *
               counts.cwiseProduct(d.weights).asDiagonal();
  rhs += (h.alpha * p2 + h.beta * p1.transpose()).transpose() * feature_sums;

  const Matrix ridge =
      h.alpha * p2.transpose() * p2 + (h.beta + h.gamma) * Matrix::Identity(l, l);
  Matrix w(c, l);
  for (int k = 0; k < c; ++k) {
    const Matrix lhs = counts(k) * (d.weights(k) * gram + ridge);
    w.row(k) = lhs.ldlt().solve(rhs.col(k)).transpose();
  }
  return w;
}

inline Matrix update_W(const HashCodeMatrix& codes, const LabelSet& labels,
                       const FeatureMatrix& x, const Matrix& p1, const Matrix& p2,
                       WeightMode mode, const Matrix& current_w, const Hyperparams& h) {
  const ClassWeights d =
      mode == WeightMode::kIdentity
          ? ClassWeights::identity(labels.num_classes())
          : compute_D(row_norms_per_class(codes, current_w, labels), h.irls_eps);
  return update_W(codes, labels, x, p1, p2, d, h);
}

// ---------------------------------------------------------------------------
// P1-step

// Orthogonal Procrustes: P1 = U V^T from the compact SVD of W^T Y X^T,
// maximizing Tr(P1 X Y^T W) over row-orthonormal P1.
inline Matrix update_P1(const Matrix& w, const LabelSet& labels, const FeatureMatrix& x,
                        const Matrix& previous) {
  const Matrix target = w.transpose() * sum_by_class(x, labels).transpose();  // l x d
  if (target.squaredNorm() == 0.0) {
    log::warn("P1-step: W^T Y X^T is zero; keeping previous encoder");
    return previous;
  }
  Eigen::JacobiSVD<Matrix> svd(target, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// ---------------------------------------------------------------------------
// P2-step

// Stationary point of alpha ||X - P2 V||^2 + gamma ||P2||^2:
// P2 = alpha X V^T (alpha V V^T + gamma I)^{-1}.
inline Matrix update_P2(const Matrix& w, const LabelSet& labels, const FeatureMatrix& x,
                        const Hyperparams& h) {
  const Index l = w.cols();
  const Matrix vvt = w.transpose() * labels.count_vector().asDiagonal() * w;
  const Matrix xvt = sum_by_class(x, labels) * w;  // d x l
  const Matrix system = h.alpha * vvt + h.gamma * Matrix::Identity(l, l);
  return system.ldlt().solve(h.alpha * xvt.transpose()).transpose();
}

// The closed form as printed with the method description,
// (alpha X X^T + gamma I)^{-1} X Y^T W. Kept for comparison only.
inline Matrix update_P2_printed(const Matrix& w, const LabelSet& labels, const FeatureMatrix& x,
                                const Hyperparams& h) {
  const Index d = x.rows();
  const Matrix system = h.alpha * x * x.transpose() + h.gamma * Matrix::Identity(d, d);
  return system.ldlt().solve(sum_by_class(x, labels) * w);
}

inline double p2_step_objective(const Matrix& p2, const Matrix& w, const LabelSet& labels,
                                const FeatureMatrix& x, const Hyperparams& h) {
  const Matrix decoded = p2 * w.transpose();
  double recon = 0.0;
  for (Index i = 0; i < x.cols(); ++i) recon += (x.col(i) - decoded.col(labels[i])).squaredNorm();
  return h.alpha * recon + h.gamma * p2.squaredNorm();
}

// ---------------------------------------------------------------------------
// Initialization and training

inline std::pair<ModelParams, HashCodeMatrix> init_params(const FeatureMatrix& x,
                                                          const LabelSet& labels,
                                                          const Hyperparams& h) {
  const Index d = x.rows();
  const Index n = x.cols();
  const Index l = h.bits;
  if (l > d) {
    throw ConfigError("bits (" + std::to_string(l) + ") exceeds feature dimension (" +
                      std::to_string(d) + "); a row-orthonormal encoder needs bits <= d");
  }
  std::mt19937_64 rng(h.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
    }
    return m;
  };

  ModelParams p;
  const Matrix basis = draw(d, l);
  Eigen::HouseholderQR<Matrix> qr(basis);
  p.p1 = (qr.householderQ() * Matrix::Identity(d, l)).transpose();
  HashCodeMatrix codes = sign_codes(draw(l, n));
  p.p2 = Matrix::Zero(d, l);
  p.w = update_W(codes, labels, x, p.p1, p.p2, ClassWeights::identity(labels.num_classes()), h);
  p.p2 = update_P2(p.w, labels, x, h);
  return {std::move(p), std::move(codes)};
}

using IterationCallback = std::function<void(const IterationRecord&)>;

inline constexpr double kGuardSlack = 1e-9;

inline TrainResult train(const FeatureMatrix& x, const LabelSet& labels, const Hyperparams& h,
                         const IterationCallback& on_iteration = {}) {
  h.validate();
  if (x.cols() != labels.size()) {
    throw DataError("feature matrix has " + std::to_string(x.cols()) + " samples but " +
                    std::to_string(labels.size()) + " labels were given");
  }
  if (!x.allFinite()) throw DataError("training features contain non-finite values");
  using Clock = std::chrono::steady_clock;

  auto [params, codes] = init_params(x, labels, h);
  TrainResult result;
  ObjectiveTerms terms = evaluate_objective(x, labels, codes, params, h);
  double current = terms.total();
  if (!std::isfinite(current)) throw NumericalError("initial objective is not finite");

  IterationRecord initial;
  initial.terms = terms;
  initial.objective = current;
  result.trace.iterations.push_back(initial);
  if (on_iteration) on_iteration(initial);

  for (int t = 1; t <= h.max_iters; ++t) {
    const auto start = Clock::now();
    IterationRecord rec;
    rec.iteration = t;

    // Accepts a candidate state if it does not increase the objective.
    auto guarded = [&](StepKind step, const HashCodeMatrix& cand_codes, const ModelParams& cand) {
      const ObjectiveTerms cand_terms = evaluate_objective(x, labels, cand_codes, cand, h);
      const double value = cand_terms.total();
      if (std::isfinite(value) && value <= current + kGuardSlack * std::abs(current)) {
        codes = cand_codes;
        params = cand;
        terms = cand_terms;
        current = value;
      } else {
        ++rec.guard_rejections;
        rec.rejected_steps |= step;
      }
    };

    if (h.variant == Variant::kL1) {
      guarded(kStepB, update_B_l1(params.w, labels, h.bits), params);
    } else {
      BStepResult b = update_B_l21(codes, params.w, labels, h);
      rec.dcc_sweeps = b.sweeps;
      rec.bit_flips = b.flips;
      guarded(kStepB, b.codes, params);
    }

    ModelParams cand = params;
    cand.w = update_W(codes, labels, x, params.p1, params.p2,
                      h.variant == Variant::kL1 ? WeightMode::kIdentity : WeightMode::kIrls,
                      params.w, h);
    guarded(kStepW, codes, cand);

    cand = params;
    cand.p1 = update_P1(params.w, labels, x, params.p1);
    guarded(kStepP1, codes, cand);

    cand = params;
    cand.p2 = update_P2(params.w, labels, x, h);
    guarded(kStepP2, codes, cand);

    const double previous = result.trace.iterations.back().objective;
    rec.terms = terms;
    rec.objective = current;
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.trace.iterations.push_back(rec);
    if (on_iteration) on_iteration(rec);

    const double improvement = (previous - current) / std::max(std::abs(previous), 1e-300);
    if (improvement < h.tolerance) {
      result.trace.converged = true;
      break;
    }
  }
  result.params = std::move(params);
  result.codes = std::move(codes);
  return result;
}

}  // namespace sadih

#endif  // SADIH_OPTIMIZER_HPP_
