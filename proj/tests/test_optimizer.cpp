#include <gtest/gtest.h>

#include <random>

#include "sadih/dataset.hpp"
#include "sadih/optimizer.hpp"
#include "sadih/synthetic.hpp"
#include "sadih/testing/dense_oracle.hpp"

namespace sadih {
namespace {

double rel(const Matrix& got, const Matrix& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

Hyperparams small_hyper(Variant v = Variant::kL1) {
  Hyperparams h;
  h.variant = v;
  h.bits = 4;
  h.max_iters = 4;
  h.seed = 11;
  return h;
}

LabeledData small_data(std::uint64_t seed = 5) {
  auto data = make_clusters(3, 6, 60, 3.0, seed);
  data.x = normalize_features(data.x).first;
  return data;
}

// init

TEST(InitParams, EncoderIsRowOrthonormal) {
  auto data = small_data();
  auto [p, codes] = init_params(data.x, data.labels, small_hyper());
  EXPECT_LE((p.p1 * p.p1.transpose() - Matrix::Identity(4, 4)).norm(), 1e-12);
  EXPECT_EQ(p.w.rows(), 3);
  EXPECT_EQ(p.w.cols(), 4);
  EXPECT_EQ(p.p2.rows(), 6);
  EXPECT_TRUE(is_binary_codes(codes));
}

TEST(InitParams, DeterministicPerSeed) {
  auto data = small_data();
  auto a = init_params(data.x, data.labels, small_hyper());
  auto b = init_params(data.x, data.labels, small_hyper());
  EXPECT_EQ(a.first.p1, b.first.p1);
  EXPECT_EQ(a.second, b.second);
  Hyperparams other = small_hyper();
  other.seed = 12;
  EXPECT_NE(init_params(data.x, data.labels, other).first.p1, a.first.p1);
}

TEST(InitParams, SquareEncoderAndTooManyBits) {
  auto data = small_data();
  Hyperparams h = small_hyper();
  h.bits = 6;
  auto [p, codes] = init_params(data.x, data.labels, h);
  EXPECT_LE((p.p1.transpose() * p.p1 - Matrix::Identity(6, 6)).norm(), 1e-12);
  h.bits = 7;
  EXPECT_THROW(init_params(data.x, data.labels, h), ConfigError);
}

// B-step, L1

TEST(UpdateBL1, SignOfPrototypeProjection) {
  // v_0 = (1, -1), v_1 = (2, 1); n = (2, 1), l = 2.
  LabelSet labels({0, 1, 0});
  Matrix w(2, 2);
  w << 1, -1, 2, 1;
  const HashCodeMatrix b = update_B_l1(w, labels, 2);
  // column for class 0: sum_k Q[k][j] v_k = l(n_0 v_0 - n_1 v_1) = 2((2,-2) - (2,1)) = (0,-6)
  // column for class 1: 2(-(2,-2) + (2,1)) = (0, 6)
  Matrix want(2, 3);
  want << 1, 1, 1, -1, 1, -1;
  EXPECT_EQ(b, want);
}

TEST(UpdateBL1, MatchesDenseSign) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 40; ++t) {
    auto inst = oracle::random_instance(9, 3, 4, 5, rng);
    const Matrix field = inst.params.w.transpose() * oracle::Q(inst.labels, 4);
    EXPECT_EQ(update_B_l1(inst.params.w, inst.labels, 4), sign_codes(field));
  }
}

TEST(UpdateBL1, ZeroPrototypesGiveAllPlusOne) {
  LabelSet labels({0, 1, 1});
  EXPECT_EQ(update_B_l1(Matrix::Zero(2, 3), labels, 3), HashCodeMatrix::Ones(3, 3));
}

// DCC

TEST(Dcc, RowMatchesExhaustiveMinimum) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 25; ++t) {
    auto inst = oracle::random_instance(7, 2, 3, 3, rng);
    const auto& w = inst.params.w;
    const ClassWeights d = compute_D(row_norms_per_class(inst.codes, w, inst.labels));
    const Matrix d_full = oracle::expand_weights(d, inst.labels);
    const Matrix m = compute_M(w, inst.labels, d, 3);
    for (int k = 0; k < 3; ++k) {
      const RowVector coeff = oracle::row_objective_coefficients(k, inst.codes, w, inst.labels,
                                                                 d_full);
      const auto best = oracle::exhaustive_row_minimum(
          [&](const RowVector& b) { return coeff.dot(b); }, 7);
      const RowVector got = dcc_row_update(k, inst.codes, w, m, d, inst.labels);
      EXPECT_NEAR(coeff.dot(got), best.value, 1e-9 * std::max(1.0, std::abs(best.value)));
      EXPECT_EQ(got, best.row);
    }
  }
}

TEST(Dcc, ZeroFieldTiesResolveToPlusOne) {
  LabelSet labels({0, 1, 0, 1});
  const Matrix w = Matrix::Zero(2, 2);
  HashCodeMatrix codes = -HashCodeMatrix::Ones(2, 4);
  const ClassWeights d = ClassWeights::identity(2);
  const RowVector row = dcc_row_update(0, codes, w, compute_M(w, labels, d, 2), d, labels);
  EXPECT_EQ(row, RowVector::Ones(4));
}

TEST(UpdateBL21, SurrogateDoesNotIncrease) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 30; ++t) {
    auto inst = oracle::random_instance(10, 3, 4, 5, rng);
    const auto& w = inst.params.w;
    const BStepResult out = update_B_l21(inst.codes, w, inst.labels, inst.hyper);
    const Matrix d_full = oracle::expand_weights(out.weights, inst.labels);
    const double before = oracle::irls_objective(inst.codes, w, inst.labels, d_full);
    const double after = oracle::irls_objective(out.codes, w, inst.labels, d_full);
    EXPECT_LE(after, before + 1e-9 * std::abs(before));
    EXPECT_NEAR(irls_objective(out.codes, w, inst.labels, out.weights), after,
                1e-9 * std::abs(after));
    EXPECT_TRUE(is_binary_codes(out.codes));
    EXPECT_LE(out.sweeps, inst.hyper.max_sweeps);
  }
}

TEST(UpdateBL21, PerfectFitIsAFixedPoint) {
  LabelSet labels({0, 1, 0, 1, 1});
  Matrix w(2, 3);
  w.row(0).setOnes();
  w.row(1).setConstant(-1.0);
  HashCodeMatrix codes(3, 5);
  for (Index i = 0; i < 5; ++i) codes.col(i).setConstant(labels[i] == 0 ? 1.0 : -1.0);
  Hyperparams h;
  const BStepResult out = update_B_l21(codes, w, labels, h);
  EXPECT_EQ(out.codes, codes);
  EXPECT_EQ(out.flips, 0);
  EXPECT_EQ(out.sweeps, 1);
}

// W-step

TEST(UpdateW, StationaryInBothModes) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 10; ++t) {
    auto inst = oracle::random_instance(9, 3, 3, 5, rng);
    const auto& p = inst.params;
    for (WeightMode mode : {WeightMode::kIdentity, WeightMode::kIrls}) {
      const Matrix w = update_W(inst.codes, inst.labels, inst.x, p.p1, p.p2, mode, p.w,
                                inst.hyper);
      const ClassWeights d = mode == WeightMode::kIdentity
                                 ? ClassWeights::identity(3)
                                 : compute_D(row_norms_per_class(inst.codes, p.w, inst.labels));
      const Matrix d_full = oracle::expand_weights(d, inst.labels);
      auto f = [&](const Matrix& cand) {
        return oracle::w_objective(inst.codes, cand, inst.labels, inst.x, p.p1, p.p2, d_full,
                                   inst.hyper);
      };
      const double scale = oracle::finite_difference_gradient(f, Matrix::Zero(3, 3), 1e-2).norm();
      EXPECT_LE(oracle::finite_difference_gradient(f, w, 1e-2).norm() / scale, 1e-6);
      EXPECT_NEAR(w_step_objective(inst.codes, w, inst.labels, inst.x, p.p1, p.p2, d, inst.hyper),
                  f(w), 1e-9 * f(w));
    }
  }
}

TEST(UpdateW, PerfectFitWithoutAutoencoderTerms) {
  LabelSet labels({0, 1, 0, 1, 1});
  HashCodeMatrix codes(3, 5);
  for (Index i = 0; i < 5; ++i) codes.col(i).setConstant(labels[i] == 0 ? 1.0 : -1.0);
  Hyperparams h;
  h.alpha = 0.0;
  h.beta = 0.0;
  h.gamma = 0.0;
  const Matrix x = Matrix::Zero(2, 5);
  const Matrix w = update_W(codes, labels, x, Matrix::Zero(3, 2), Matrix::Zero(2, 3),
                            ClassWeights::identity(2), h);
  EXPECT_NEAR(l21_residual(codes, w, labels), 0.0, 1e-9);
}

TEST(UpdateW, ClosedFormWithoutRegularizers) {
  // alpha = beta = 0, D = I: W = (Y Y^T)^{-1} Q B^T (B B^T + gamma I)^{-1}.
  std::mt19937_64 rng(31);
  auto inst = oracle::random_instance(10, 3, 3, 4, rng);
  inst.hyper.alpha = 0.0;
  inst.hyper.beta = 0.0;
  const Matrix y = inst.labels.one_hot();
  const Matrix& b = inst.codes;
  const Matrix want = (y * y.transpose()).inverse() * oracle::Q(inst.labels, 3) * b.transpose() *
                      (b * b.transpose() + inst.hyper.gamma * Matrix::Identity(3, 3)).inverse();
  const Matrix got = update_W(b, inst.labels, inst.x, inst.params.p1, inst.params.p2,
                              ClassWeights::identity(3), inst.hyper);
  EXPECT_LE(rel(got, want), 1e-9);
}

TEST(UpdateW, EmptyClassIsADataError) {
  LabelSet labels({0, 0, 2}, 3);
  Hyperparams h;
  EXPECT_THROW(update_W(HashCodeMatrix::Ones(2, 3), labels, Matrix::Zero(2, 3),
                        Matrix::Zero(2, 2), Matrix::Zero(2, 2), ClassWeights::identity(3), h),
               DataError);
}

// P1-step

TEST(UpdateP1, IdentityCoupling) {
  // W^T Y X^T = [I 0] for W = I, one sample per class, X = [I; 0].
  LabelSet labels({0, 1});
  Matrix x = Matrix::Zero(3, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 1.0;
  const Matrix p1 = update_P1(Matrix::Identity(2, 2), labels, x, Matrix::Zero(2, 3));
  EXPECT_LE((p1 - Matrix::Identity(2, 3)).norm(), 1e-12);
}

TEST(UpdateP1, OrthonormalCouplingIsReturned) {
  std::mt19937_64 rng(37);
  const Matrix g = oracle::random_row_orthonormal(3, 5, rng);
  LabelSet labels({0, 1, 2});
  // W = I and X^T = G  =>  W^T Y X^T = G.
  const Matrix p1 = update_P1(Matrix::Identity(3, 3), labels, g.transpose(), Matrix::Zero(3, 5));
  EXPECT_LE((p1 - g).norm(), 1e-10);
}

TEST(UpdateP1, BeatsRandomEncoders) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 3; ++t) {
    auto inst = oracle::random_instance(12, 3, 4, 7, rng);
    const Matrix p1 = update_P1(inst.params.w, inst.labels, inst.x, inst.params.p1);
    EXPECT_LE((p1 * p1.transpose() - Matrix::Identity(4, 4)).norm(), 1e-8);
    const Matrix coupling = inst.x * inst.labels.one_hot().transpose() * inst.params.w;
    const double best = (p1 * coupling).trace();
    for (int s = 0; s < 300; ++s) {
      EXPECT_LE((oracle::random_row_orthonormal(4, 7, rng) * coupling).trace(), best + 1e-9);
    }
  }
}

TEST(UpdateP1, ZeroCouplingKeepsPrevious) {
  log::warnings_enabled() = false;
  LabelSet labels({0, 1});
  const Matrix previous = Matrix::Identity(2, 3);
  EXPECT_EQ(update_P1(Matrix::Zero(2, 2), labels, Matrix::Ones(3, 2), previous), previous);
  log::warnings_enabled() = true;
}

// P2-step

TEST(UpdateP2, ZeroAlphaGivesZero) {
  std::mt19937_64 rng(43);
  auto inst = oracle::random_instance(8, 2, 3, 4, rng);
  inst.hyper.alpha = 0.0;
  EXPECT_EQ(update_P2(inst.params.w, inst.labels, inst.x, inst.hyper), Matrix::Zero(4, 3));
}

TEST(UpdateP2, StationaryAndNoWorseThanPrintedForm) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 10; ++t) {
    auto inst = oracle::random_instance(9, 3, 3, 5, rng);
    const Matrix p2 = update_P2(inst.params.w, inst.labels, inst.x, inst.hyper);
    auto f = [&](const Matrix& cand) {
      return oracle::p2_objective(cand, inst.params.w, inst.labels, inst.x, inst.hyper);
    };
    const double scale = oracle::finite_difference_gradient(f, Matrix::Zero(5, 3), 1e-2).norm();
    EXPECT_LE(oracle::finite_difference_gradient(f, p2, 1e-2).norm() / scale, 1e-8);
    const Matrix printed = update_P2_printed(inst.params.w, inst.labels, inst.x, inst.hyper);
    EXPECT_LE(f(p2), f(printed) * (1 + 1e-12));
    EXPECT_NEAR(p2_step_objective(p2, inst.params.w, inst.labels, inst.x, inst.hyper), f(p2),
                1e-9 * f(p2));
  }
}

TEST(UpdateP2, MatchesLeastSquaresWhenRidgeVanishes) {
  // min ||X - P2 V||^2 solved column-wise by QR on V^T.
  std::mt19937_64 rng(53);
  auto inst = oracle::random_instance(12, 4, 3, 5, rng);
  inst.hyper.alpha = 1.0;
  inst.hyper.gamma = 1e-12;
  const Matrix v = inst.params.w.transpose() * inst.labels.one_hot();
  const Matrix want =
      v.transpose().colPivHouseholderQr().solve(inst.x.transpose()).transpose();
  EXPECT_LE(rel(update_P2(inst.params.w, inst.labels, inst.x, inst.hyper), want), 1e-6);
}

// Objective

TEST(Objective, MatchesDenseEvaluation) {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 30; ++t) {
    auto inst = oracle::random_instance(8, 3, 4, 5, rng);
    for (Variant v : {Variant::kL1, Variant::kL21}) {
      inst.hyper.variant = v;
      const double want = oracle::objective(inst.x, inst.labels, inst.codes, inst.params,
                                            inst.hyper);
      EXPECT_NEAR(evaluate_objective(inst.x, inst.labels, inst.codes, inst.params, inst.hyper)
                      .total(),
                  want, 1e-8 * want);
    }
  }
}

TEST(Objective, ZeroParamsLeaveOnlyResidual) {
  LabelSet labels({0, 1, 1, 0});
  Hyperparams h;
  h.variant = Variant::kL21;
  h.alpha = h.beta = h.gamma = 0.0;
  ModelParams p{Matrix::Zero(2, 3), Matrix::Zero(3, 2), Matrix::Zero(2, 3)};
  const auto t = evaluate_objective(Matrix::Ones(2, 4), labels, HashCodeMatrix::Ones(3, 4), p, h);
  EXPECT_NEAR(t.total(), 4.0 * 3.0 * 2.0, 1e-12);
}

// Training

TEST(Train, SinglePassRecordsOneIteration) {
  auto data = small_data();
  Hyperparams h = small_hyper();
  h.max_iters = 1;
  const auto r = train(data.x, data.labels, h);
  ASSERT_EQ(r.trace.iterations.size(), 2u);
  EXPECT_EQ(r.trace.iterations[1].iteration, 1);
}

TEST(Train, DeterministicForSeed) {
  auto data = small_data();
  for (Variant v : {Variant::kL1, Variant::kL21}) {
    const auto a = train(data.x, data.labels, small_hyper(v));
    const auto b = train(data.x, data.labels, small_hyper(v));
    EXPECT_EQ(a.params.w, b.params.w);
    EXPECT_EQ(a.params.p1, b.params.p1);
    EXPECT_EQ(a.params.p2, b.params.p2);
    EXPECT_EQ(a.codes, b.codes);
  }
}

TEST(Train, GuardedTraceIsMonotone) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto data = small_data(seed);
    for (Variant v : {Variant::kL1, Variant::kL21}) {
      Hyperparams h = small_hyper(v);
      h.max_iters = 10;
      h.seed = seed;
      const auto r = train(data.x, data.labels, h);
      const auto& its = r.trace.iterations;
      for (std::size_t t = 1; t < its.size(); ++t) {
        EXPECT_LE(its[t].objective, its[t - 1].objective + 1e-9 * std::abs(its[t - 1].objective));
      }
      EXPECT_LE((r.params.p1 * r.params.p1.transpose() - Matrix::Identity(4, 4)).norm(), 1e-8);
    }
  }
}

TEST(Train, RejectsMismatchedInput) {
  auto data = small_data();
  LabelSet short_labels({0, 1, 2});
  EXPECT_THROW(train(data.x, short_labels, small_hyper()), DataError);
  FeatureMatrix bad = data.x;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train(bad, data.labels, small_hyper()), DataError);
}

TEST(Hyperparams, Validation) {
  Hyperparams h;
  h.gamma = 0.0;
  EXPECT_THROW(h.validate(), ConfigError);
  h = Hyperparams{};
  h.alpha = -1.0;
  EXPECT_THROW(h.validate(), ConfigError);
  h = Hyperparams{};
  h.bits = 0;
  EXPECT_THROW(h.validate(), ConfigError);
  EXPECT_EQ(parse_variant("L21"), Variant::kL21);
  EXPECT_EQ(parse_variant("l1"), Variant::kL1);
  EXPECT_THROW(parse_variant("L2"), ConfigError);
}

}  // namespace
}  // namespace sadih
