#include <gtest/gtest.h>

#include <cmath>

#include "selfpen/objectives.hpp"
#include "selfpen/validation.hpp"
#include "test_util.hpp"

namespace selfpen {
namespace {

using testing::random_beta;
using testing::random_labels;
using testing::random_matrix;
using testing::random_weights;
using testing::two_atom_kernel;

// Brute-force double loop over ordered pairs.
double brute_ml_value(const Dataset& d, const Vector& beta, const KernelSpec& k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t l = 0; l < d.n(); ++l) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(l);
            const double z = weighted_dist(row_span(d.X(), a), row_span(d.X(), b), beta, k.q());
            s += d.weights()[a] * d.weights()[b] * d.y()[a] * d.y()[b] * k.h(z);
        }
    }
    return -s;
}

Vector brute_ml_gradient(const Dataset& d, const Vector& beta, const KernelSpec& k) {
    Vector g = Vector::Zero(beta.size());
    for (Eigen::Index i = 0; i < d.X().rows(); ++i) {
        for (Eigen::Index l = 0; l < d.X().rows(); ++l) {
            const double z = weighted_dist(row_span(d.X(), i), row_span(d.X(), l), beta, k.q());
            const double c = d.weights()[i] * d.weights()[l] * d.y()[i] * d.y()[l] * k.h_prime(z);
            for (Eigen::Index j = 0; j < beta.size(); ++j) g[j] -= c * pow_q(std::abs(d.X()(i, j) - d.X()(l, j)), k.q());
        }
    }
    return g;
}

// Primal ridge problem min_a 1/2 sum w (y - K a)^2 + lambda/2 a'Ka solved
// from its normal equations with a rank-revealing decomposition.
double brute_krr_primal(const Dataset& d, const Vector& beta, const KernelSpec& k, double lambda) {
    const Matrix K = kernel_matrix(d.X(), beta, k);
    const Matrix W = d.weights().asDiagonal();
    const Matrix A = K * W * K + lambda * K;
    const Vector a = A.completeOrthogonalDecomposition().solve(K * W * d.y());
    const Vector r = d.y() - K * a;
    return 0.5 * r.dot(W * r) + 0.5 * lambda * a.dot(K * a);
}

Dataset binary_dataset(std::size_t n, std::size_t p, std::uint64_t seed, bool uniform) {
    RowMatrix X = random_matrix(n, p, seed);
    Vector y = random_labels(n, seed + 1);
    if (uniform) return {std::move(X), std::move(y)};
    return {std::move(X), std::move(y), random_weights(n, seed + 2)};
}

TEST(MlObjectiveTest, MatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Exponent q = seed % 2 == 0 ? Exponent::kOne : Exponent::kTwo;
        const Dataset d = binary_dataset(17, 3, seed * 10, seed % 3 == 0);
        const Vector b = random_beta(3, seed);
        const KernelSpec k = two_atom_kernel(q);
        const Evaluation e = f_ml_evaluate(d, b, k);
        EXPECT_NEAR(e.value, brute_ml_value(d, b, k), 1e-13);
        EXPECT_NEAR(f_ml_value(d, b, k), e.value, 1e-14);
        const Vector g = brute_ml_gradient(d, b, k);
        EXPECT_LT((e.gradient - g).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LT((f_ml_gradient(d, b, k) - g).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(MlObjectiveTest, BalancedValueIsNonPositiveAtZero) {
    // At beta = 0 the value is -h(0) (sum w y)^2.
    const Dataset d = binary_dataset(12, 2, 4, false);
    const double s = d.weights().dot(d.y());
    EXPECT_NEAR(f_ml_value(d, Vector::Zero(2), KernelSpec()), -s * s, 1e-15);
}

TEST(MlObjectiveTest, RejectsNonBinaryLabels) {
    RowMatrix X = random_matrix(5, 2, 1);
    Vector y = Vector::Constant(5, 0.5);
    EXPECT_THROW(make_ml_objective(Dataset(X, y), KernelSpec()), Error);
}

TEST(KrrObjectiveTest, ValueMatchesPrimalOracle) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Exponent q = seed % 2 == 0 ? Exponent::kOne : Exponent::kTwo;
        RowMatrix X = random_matrix(15, 3, seed + 100);
        Vector y = random_matrix(15, 1, seed + 200).col(0);
        const Dataset d = seed % 3 == 0 ? Dataset(X, y) : Dataset(X, y, random_weights(15, seed));
        const Vector b = random_beta(3, seed + 7);
        const KernelSpec k = two_atom_kernel(q);
        for (double lambda : {0.01, 0.1, 1.0}) {
            const KrrFit fit = krr_fit(d, b, k, lambda);
            const double primal = brute_krr_primal(d, b, k, lambda);
            EXPECT_NEAR(fit.value, primal, 1e-9 * std::max(1.0, std::abs(primal)));
            EXPECT_NEAR(f_krr_value(d, b, k, lambda), fit.value, 1e-14);
            // Stationarity: W z = lambda alpha.
            const Vector wz = d.weights().cwiseProduct(fit.residual);
            EXPECT_LT((wz - lambda * fit.alpha).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(KrrObjectiveTest, GradientMatchesFiniteDifferences) {
    const Dataset d(random_matrix(20, 3, 9), random_matrix(20, 1, 10).col(0));
    const KernelSpec k = two_atom_kernel(Exponent::kOne);
    const Vector b = random_beta(3, 11);
    const double lambda = 0.1;
    const Vector g = f_krr_gradient(d, b, k, lambda);
    const Vector fd = central_difference([&](const Vector& v) { return f_krr_value(d, v, k, lambda); }, b);
    EXPECT_LT(gradient_relative_error(g, fd), kKrrGradientTolerance);
    EXPECT_LT((f_krr_evaluate(d, b, k, lambda).gradient - g).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(KrrObjectiveTest, ValueBoundedByHalfSecondMoment) {
    const Dataset d(random_matrix(20, 2, 12), random_matrix(20, 1, 13).col(0));
    const double bound = 0.5 * d.weights().dot(d.y().cwiseAbs2());
    for (std::uint64_t s = 0; s < 5; ++s) {
        const double v = f_krr_value(d, random_beta(2, s), KernelSpec(), 0.05);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, bound + 1e-12);
    }
}

TEST(KrrObjectiveTest, RejectsNonPositiveLambda) {
    const Dataset d(random_matrix(5, 2, 1), random_matrix(5, 1, 2).col(0));
    EXPECT_THROW(f_krr_value(d, Vector::Ones(2), KernelSpec(), 0.0), Error);
    EXPECT_THROW(make_krr_objective(d, KernelSpec(), -1.0), Error);
}

TEST(LinearBaselineTest, GradientMatchesFiniteDifferencesAndPrimal) {
    const Dataset d(random_matrix(30, 4, 21), random_matrix(30, 1, 22).col(0), random_weights(30, 23));
    const Vector b = random_beta(4, 24);
    const double lambda = 0.2;
    const LinearFit fit = linear_fit(d, b, lambda);
    const Vector fd = central_difference([&](const Vector& v) { return linear_baseline(d, v, lambda).value; }, b);
    EXPECT_LT(gradient_relative_error(fit.eval.gradient, fd), 1e-6);
    // Coefficients are optimal: perturbing them raises the primal value.
    const Matrix Xb = d.X() * b.asDiagonal();
    auto primal = [&](const Vector& c) {
        const Vector r = d.y() - Xb * c;
        return 0.5 * d.weights().dot(r.cwiseAbs2()) + 0.5 * lambda * c.squaredNorm();
    };
    EXPECT_NEAR(primal(fit.coef), fit.eval.value, 1e-14);
    for (Eigen::Index j = 0; j < 4; ++j) {
        Vector c = fit.coef;
        c[j] += 1e-3;
        EXPECT_GT(primal(c), fit.eval.value);
    }
}

TEST(ObjectiveClosuresTest, AgreeWithDirectCalls) {
    const Dataset d = binary_dataset(10, 2, 31, true);
    const Vector b = random_beta(2, 32);
    const KernelSpec k;
    EXPECT_DOUBLE_EQ(make_ml_objective(d, k)(b).value, f_ml_value(d, b, k));
    EXPECT_DOUBLE_EQ(make_krr_objective(d, k, 0.1)(b).value, f_krr_value(d, b, k, 0.1));
    EXPECT_DOUBLE_EQ(make_linear_objective(d, 0.1)(b).value, linear_baseline(d, b, 0.1).value);
}

TEST(PairSumsTest, QuadraticMatchesKernelMatrix) {
    const Dataset d = binary_dataset(9, 3, 41, false);
    const Vector a = random_matrix(9, 1, 42).col(0);
    const Vector b = random_beta(3, 43);
    const KernelSpec k = two_atom_kernel(Exponent::kTwo);
    const Matrix K = kernel_matrix(d.X(), b, k);
    const Vector wa = d.weights().cwiseProduct(a);
    EXPECT_NEAR(weighted_kernel_quadratic(d, a, b, k), wa.dot(K * wa), 1e-14);
}

TEST(KrrObjectiveTest, ConstantFeatureHasZeroGradient) {
    RowMatrix X = random_matrix(12, 3, 51);
    X.col(1).setConstant(0.4);
    const Dataset d(X, random_matrix(12, 1, 52).col(0));
    const Vector g = f_krr_gradient(d, random_beta(3, 53), KernelSpec(), 0.1);
    EXPECT_EQ(g[1], 0.0);
}

TEST(KrrObjectiveTest, MainEffectGradientIsNegativeAtZero) {
    RowMatrix X = random_matrix(40, 2, 61);
    Vector y = X.col(0);
    y.array() -= y.mean();
    const Dataset d(X, y);
    const Vector g = f_krr_gradient(d, Vector::Zero(2), KernelSpec(), 0.1);
    EXPECT_LT(g[0], 0.0);
}

TEST(LinearBaselineTest, ZeroWeightsGiveHalfSecondMoment) {
    const Dataset d(random_matrix(10, 2, 71), random_matrix(10, 1, 72).col(0));
    const LinearFit fit = linear_fit(d, Vector::Zero(2), 0.5);
    EXPECT_EQ(fit.coef, Vector::Zero(2));
    EXPECT_NEAR(fit.eval.value, 0.5 * d.weights().dot(d.y().cwiseAbs2()), 1e-15);
}

}  // namespace
}  // namespace selfpen
