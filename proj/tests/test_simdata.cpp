#include <gtest/gtest.h>

#include <cmath>

#include "selfpen/conditional.hpp"
#include "selfpen/simdata.hpp"

namespace selfpen {
namespace {

TEST(SimdataTest, SameSeedSameData) {
    GenSpec s;
    s.p = 5;
    s.rho = 0.4;
    s.seed = 11;
    const Generated a = generate(s);
    const Generated b = generate(s);
    EXPECT_EQ(a.data.X(), b.data.X());
    EXPECT_EQ(a.data.y(), b.data.y());
    s.seed = 12;
    EXPECT_NE(generate(s).data.X(), a.data.X());
}

TEST(SimdataTest, ShapesAndTruth) {
    GenSpec s;
    s.n = 50;
    s.p = 6;
    s.signal = Signal::kCubic2;
    const Generated g = generate(s);
    EXPECT_EQ(g.data.n(), 50u);
    EXPECT_EQ(g.data.p(), 6u);
    EXPECT_TRUE(g.data.has_binary_labels());
    EXPECT_TRUE(g.data.has_uniform_weights());
    EXPECT_EQ(g.truth.signal, (IndexSet{0, 1}));
    EXPECT_TRUE(g.truth.oracle.has_value());
    s.response = Response::kRegression;
    const Generated r = generate(s);
    EXPECT_FALSE(r.truth.oracle.has_value());
    EXPECT_FALSE(r.data.has_binary_labels());
}

TEST(SimdataTest, RegressionNoiseMatchesSignal) {
    GenSpec s;
    s.n = 20000;
    s.p = 3;
    s.signal = Signal::kInteraction;
    s.response = Response::kRegression;
    s.noise_sd = 0.5;
    const Generated g = generate(s);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < g.data.X().rows(); ++i) {
        const double r = g.data.y()[i] - signal_value(Signal::kInteraction, row_span(g.data.X(), i));
        ss += r * r;
    }
    EXPECT_NEAR(std::sqrt(ss / 20000.0), 0.5, 0.02);
}

TEST(SimdataTest, FlipRateMatches) {
    GenSpec s;
    s.n = 20000;
    s.flip_prob = 0.2;
    const Generated g = generate(s);
    double flips = 0.0;
    for (Eigen::Index i = 0; i < g.data.X().rows(); ++i) flips += (g.data.y()[i] * g.data.X()(i, 0) < 0.0) ? 1.0 : 0.0;
    EXPECT_NEAR(flips / 20000.0, 0.2, 0.015);
}

TEST(SimdataTest, SampleCovarianceFollowsAr1) {
    GenSpec s;
    s.n = 40000;
    s.p = 4;
    s.rho = -0.6;
    const Generated g = generate(s);
    const RowMatrix& X = g.data.X();
    const Matrix C = (X.transpose() * X) / static_cast<double>(s.n);
    const Matrix T = ar1_covariance(4, -0.6);
    EXPECT_LT((C - T).cwiseAbs().maxCoeff(), 0.03);
}

TEST(SimdataTest, Ar1FactorReproducesCovariance) {
    for (double rho : {-0.9, 0.0, 0.3, 0.95}) {
        const Matrix L = ar1_factor(6, rho);
        EXPECT_LT((L * L.transpose() - ar1_covariance(6, rho)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(L.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff(), 1e-300);
    }
    EXPECT_DOUBLE_EQ(ar1_covariance(3, 0.5)(0, 2), 0.25);
}

TEST(SimdataTest, OracleMatchesClosedFormForLinearSignal) {
    GenSpec s;
    s.p = 2;
    s.rho = 0.5;
    s.flip_prob = 0.1;
    const Generated g = generate(s);
    RowMatrix X(3, 2);
    X << 0.3, -1.0, -2.0, 0.5, 1.0, 2.0;
    const Vector p1 = g.truth.oracle->probabilities(X, {1});
    const double sd = std::sqrt(1.0 - 0.25);
    for (Eigen::Index r = 0; r < 3; ++r)
        EXPECT_NEAR(p1[r], 0.1 + 0.8 * normal_cdf(0.5 * X(r, 1) / sd), 1e-10);
    const Vector p0 = g.truth.oracle->probabilities(X, {});
    for (Eigen::Index r = 0; r < 3; ++r) EXPECT_NEAR(p0[r], 0.5, 1e-10);
    const Vector pfull = g.truth.oracle->probabilities(X, {0, 1});
    EXPECT_NEAR(pfull[0], 0.9, 1e-15);
    EXPECT_NEAR(pfull[1], 0.1, 1e-15);
}

TEST(SimdataTest, LogisticOracleIsSigmoidOnFullSet) {
    GenSpec s;
    s.response = Response::kLogistic;
    s.signal = Signal::kCubic2;
    s.link_scale = 2.0;
    s.p = 3;
    const Generated g = logistic_generate(s);
    RowMatrix X(1, 3);
    X << 0.4, -0.7, 1.0;
    const double f = 0.4 * 0.4 * 0.4 - 0.7 * 0.7 * 0.7;
    EXPECT_NEAR(g.truth.oracle->probabilities(X, {0, 1})[0], sigmoid(2.0 * f), 1e-14);
}

TEST(SimdataTest, GaussHermiteMoments) {
    const QuadratureRule& r = gauss_hermite_64();
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        const double x = r.nodes[k];
        m0 += r.weights[k];
        m2 += r.weights[k] * x * x;
        m4 += r.weights[k] * x * x * x * x;
    }
    EXPECT_NEAR(m0, 1.0, 1e-12);
    EXPECT_NEAR(m2, 1.0, 1e-12);
    EXPECT_NEAR(m4, 3.0, 1e-11);
}

TEST(SimdataTest, NamesRoundTrip) {
    for (Signal sg : {Signal::kLinear1, Signal::kCubic2, Signal::kInteraction})
        EXPECT_EQ(signal_from_string(to_string(sg)), sg);
    for (Response r : {Response::kClassification, Response::kRegression, Response::kLogistic})
        EXPECT_EQ(response_from_string(to_string(r)), r);
    EXPECT_THROW(signal_from_string("quadratic"), Error);
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
    EXPECT_NEAR(sigmoid(0.0), 0.5, 1e-16);
}

TEST(SimdataTest, RejectsBadSpec) {
    GenSpec s;
    s.rho = 1.0;
    EXPECT_THROW(generate(s), Error);
    s = GenSpec{};
    s.flip_prob = 0.0;
    EXPECT_THROW(generate(s), Error);
    s = GenSpec{};
    s.p = 1;
    s.signal = Signal::kCubic2;
    EXPECT_THROW(generate(s), Error);
}

TEST(ConditionalTest, SmootherTracksOracle) {
    GenSpec s;
    s.n = 2000;
    s.p = 2;
    s.seed = 3;
    const Generated g = generate(s);
    const ConditionalModel cm = kernel_smoother_conditional(g.data, default_smoother_bandwidth(s.n));
    EXPECT_EQ(cm.kind(), ConditionalModel::Kind::kKernelSmoother);
    RowMatrix X(3, 2);
    X << -1.5, 0.0, 0.0, 0.0, 1.5, 0.0;
    const Vector est = cm.probabilities(X, {0});
    const Vector truth = g.truth.oracle->probabilities(X, {0});
    EXPECT_LT((est - truth).cwiseAbs().maxCoeff(), 0.1);
    const Vector marginal = cm.probabilities(X, {});
    EXPECT_NEAR(marginal[0], (g.data.y().array() > 0.0).cast<double>().mean(), 1e-12);
    EXPECT_NEAR(default_smoother_bandwidth(32), 0.5, 1e-15);
}

TEST(ConditionalTest, SmootherClipsExtremes) {
    RowMatrix X(4, 1);
    X << -3.0, -2.9, 2.9, 3.0;
    Vector y(4);
    y << -1.0, -1.0, 1.0, 1.0;
    const ConditionalModel cm = kernel_smoother_conditional(Dataset(X, y), 0.1);
    const Vector p = cm.probabilities(X, {0});
    EXPECT_DOUBLE_EQ(p[0], 0.01);
    EXPECT_DOUBLE_EQ(p[3], 0.99);
}

}  // namespace
}  // namespace selfpen
