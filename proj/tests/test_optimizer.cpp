#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "selfpen/optimizer.hpp"
#include "test_util.hpp"

namespace selfpen {
namespace {

// F(b) = 1/2 |b - c|^2, minimized over the box at clamp(c, 0, M).
Objective shifted_quadratic(Vector c) {
    return [c = std::move(c)](const Vector& b) {
        Evaluation e;
        e.gradient = b - c;
        e.value = 0.5 * e.gradient.squaredNorm();
        return e;
    };
}

TEST(ProjectBoxTest, ClampsAndPins) {
    Vector v(4);
    v << -0.5, 0.3, 12.0, 0.1;
    const Vector p = project_box(v, 10.0, {3});
    EXPECT_EQ(p[0], 0.0);
    EXPECT_FALSE(std::signbit(p[0]));
    EXPECT_EQ(p[1], 0.3);
    EXPECT_EQ(p[2], 10.0);
    EXPECT_EQ(p[3], 10.0);
    EXPECT_THROW(project_box(v, 0.0, {}), Error);
    EXPECT_THROW(project_box(v, 1.0, {9}), Error);
}

TEST(PgdTest, ConvergesToProjectedMinimizerWithExactZeros) {
    Vector c(3);
    c << -1.0, 2.0, 15.0;
    PgdConfig cfg;
    cfg.stepsize = 0.5;
    cfg.max_iters = 200;
    const Trajectory t = pgd_run(shifted_quadratic(c), Weights::uniform(3, 1.0, 10.0), cfg);
    EXPECT_TRUE(t.converged);
    EXPECT_EQ(t.terminal.beta()[0], 0.0);
    EXPECT_NEAR(t.terminal.beta()[1], 2.0, 1e-7);
    EXPECT_EQ(t.terminal.beta()[2], 10.0);
    EXPECT_EQ(t.terminal.support(), (IndexSet{1, 2}));
    EXPECT_EQ(t.iterates.back().step, t.iters_used);
    EXPECT_EQ(t.iterates.front().step, 0u);
}

TEST(PgdTest, UnitStepReachesMinimizerInOneStep) {
    Vector c(2);
    c << 0.25, -3.0;
    PgdConfig cfg;
    const Trajectory t = pgd_run(shifted_quadratic(c), Weights::uniform(2, 0.5, 10.0), cfg);
    EXPECT_EQ(t.iterates.at(1).beta, (Vector(2) << 0.25, 0.0).finished());
    EXPECT_TRUE(t.converged);
}

TEST(PgdTest, ValuesDescendMonotonically) {
    Vector c(4);
    c << 3.0, -2.0, 0.5, 1.0;
    PgdConfig cfg;
    cfg.stepsize = 0.3;
    const Trajectory t = pgd_run(shifted_quadratic(c), Weights::uniform(4, 0.25, 10.0), cfg);
    for (std::size_t k = 1; k < t.iterates.size(); ++k)
        EXPECT_LE(t.iterates[k].value, t.iterates[k - 1].value + 1e-15);
}

TEST(PgdTest, PinnedCoordinatesStayAtBound) {
    Vector c = Vector::Zero(3);
    PgdConfig cfg;
    Vector b0(3);
    b0 << 10.0, 1.0, 1.0;
    const Trajectory t = pgd_run(shifted_quadratic(c), Weights(b0, 10.0, {0}), cfg);
    for (const Iterate& it : t.iterates) EXPECT_EQ(it.beta[0], 10.0);
    EXPECT_EQ(t.terminal.support(), (IndexSet{0}));
}

TEST(PgdTest, RecordEveryKeepsTerminal) {
    Vector c(1);
    c << 5.0;
    PgdConfig cfg;
    cfg.stepsize = 0.1;
    cfg.max_iters = 23;
    cfg.record_every = 5;
    const Trajectory t = pgd_run(shifted_quadratic(c), Weights::uniform(1, 0.0, 10.0), cfg);
    EXPECT_FALSE(t.converged);
    EXPECT_EQ(t.iters_used, 23u);
    EXPECT_EQ(t.iterates.back().step, 23u);
    for (std::size_t k = 0; k + 1 < t.iterates.size(); ++k) EXPECT_EQ(t.iterates[k].step % 5, 0u);
}

TEST(PgdTest, NonFiniteGradientAborts) {
    const Objective bad = [](const Vector& b) {
        Evaluation e;
        e.value = 0.0;
        e.gradient = Vector::Constant(b.size(), std::numeric_limits<double>::quiet_NaN());
        return e;
    };
    try {
        pgd_run(bad, Weights::uniform(2, 1.0, 10.0), PgdConfig{});
        FAIL() << "expected an exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNumericalFailure);
    }
}

TEST(PgdConfigTest, Validates) {
    PgdConfig cfg;
    cfg.stepsize = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = PgdConfig{};
    cfg.max_iters = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = PgdConfig{};
    cfg.record_every = 0;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(StepsizeTest, LipschitzGuardOnLinearGradient) {
    // grad = A b with A = diag(4, 1): |A d|_inf / |d|_1 is at most 4.
    const Objective f = [](const Vector& b) {
        Evaluation e;
        e.gradient = Vector(2);
        e.gradient << 4.0 * b[0], b[1];
        e.value = 2.0 * b[0] * b[0] + 0.5 * b[1] * b[1];
        return e;
    };
    std::vector<Vector> s{Vector::Zero(2), (Vector(2) << 1.0, 0.0).finished(), (Vector(2) << 0.0, 1.0).finished()};
    const double L = lipschitz_guard(f, s);
    EXPECT_DOUBLE_EQ(L, 4.0);
    EXPECT_DOUBLE_EQ(safeguarded_stepsize(L), 0.125);
    EXPECT_DOUBLE_EQ(safeguarded_stepsize(0.0), 1.0);
    EXPECT_DOUBLE_EQ(safeguarded_stepsize(0.1), 1.0);
    const double g1 = guarded_stepsize(f, Vector::Constant(2, 0.5), 10.0, 1.0, 4, 7);
    const double g2 = guarded_stepsize(f, Vector::Constant(2, 0.5), 10.0, 1.0, 4, 7);
    EXPECT_EQ(g1, g2);
    EXPECT_GE(g1, 0.125);
    EXPECT_LE(g1, 1.0);
    EXPECT_LE(guarded_stepsize(f, Vector::Constant(2, 0.5), 10.0, 0.01, 4, 7), 0.01);
    EXPECT_THROW(lipschitz_guard(f, std::span<const Vector>(s.data(), 1)), Error);
}

}  // namespace
}  // namespace selfpen
