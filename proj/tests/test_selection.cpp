#include <gtest/gtest.h>

#include <vector>

#include "selfpen/selection.hpp"
#include "selfpen/simdata.hpp"
#include "test_util.hpp"

namespace selfpen {
namespace {

using testing::random_labels;
using testing::random_matrix;

Generated linear_data(std::size_t n, std::size_t p, std::uint64_t seed, Response r = Response::kClassification) {
    GenSpec s;
    s.n = n;
    s.p = p;
    s.seed = seed;
    s.response = r;
    return generate(s);
}

TEST(ReweightTest, TiltsByOppositeLabelProbability) {
    const Dataset d(random_matrix(6, 2, 1), random_labels(6, 2));
    const ConditionalModel cm = ConditionalModel::oracle([](const RowMatrix& X, const IndexSet&) {
        return Vector(Vector::Constant(X.rows(), 0.8));
    });
    const Dataset r = reweight(d, {0}, cm);
    double total = 0.0;
    for (Eigen::Index i = 0; i < 6; ++i) total += d.y()[i] > 0 ? 0.2 : 0.8;
    for (Eigen::Index i = 0; i < 6; ++i)
        EXPECT_NEAR(r.weights()[i], (d.y()[i] > 0 ? 0.2 : 0.8) / total, 1e-15);
    EXPECT_EQ(r.X(), d.X());
}

TEST(ReweightTest, BalanceGivesEqualClassMass) {
    const Dataset d(random_matrix(9, 2, 3), random_labels(9, 4), testing::random_weights(9, 5));
    const Dataset b = balance_labels(d);
    double pos = 0.0;
    for (Eigen::Index i = 0; i < 9; ++i) pos += b.y()[i] > 0 ? b.weights()[i] : 0.0;
    EXPECT_NEAR(pos, 0.5, 1e-15);
    EXPECT_NEAR(b.weights().sum(), 1.0, 1e-15);
}

TEST(KrrSelectionTest, ConstantResponseSelectsNothing) {
    const RowMatrix X = random_matrix(60, 4, 6);
    const Dataset d(X, Vector::Constant(60, 2.5));
    KrrSelectionOptions opt;
    opt.eps = 0.01;
    const SelectionResult r = select_krr(d, opt);
    EXPECT_TRUE(r.selected.empty());
    ASSERT_EQ(r.rounds.size(), 1u);
    EXPECT_FALSE(r.rounds[0].accepted);
}

TEST(KrrSelectionTest, RecoversLinearSignal) {
    const Generated g = linear_data(150, 4, 21, Response::kRegression);
    KrrSelectionOptions opt;
    opt.lambda = 0.1;
    opt.pgd.max_iters = 100;
    CalibrationOptions c;
    c.runs = 10;
    c.seed = 1;
    opt.eps = calibrate_krr_threshold(g.data, opt, c).eps;
    const SelectionResult r = select_krr(g.data, opt);
    EXPECT_EQ(r.selected, g.truth.signal);
    EXPECT_TRUE(r.rounds.front().accepted);
    EXPECT_FALSE(r.rounds.back().accepted);
}

TEST(MlSelectionTest, RecoversLinearSignalWithOracle) {
    const Generated g = linear_data(200, 4, 7);
    MlSelectionOptions opt;
    opt.pgd.max_iters = 100;
    CalibrationOptions c;
    c.runs = 10;
    c.seed = 2;
    const std::vector<Dataset> pool{g.data};
    const std::vector<ConditionalModel> cms{*g.truth.oracle};
    const ThresholdCalibration cal = calibrate_ml_threshold(pool, cms, opt, c, g.truth.signal);
    EXPECT_GE(cal.eps_reweighted, cal.eps);
    EXPECT_EQ(cal.null_statistics.size(), 10u);
    opt.eps = cal.eps;
    opt.eps_reweighted = cal.eps_reweighted;
    const SelectionResult r = select_metric_learning(g.data, *g.truth.oracle, opt);
    EXPECT_EQ(r.selected, g.truth.signal);
}

TEST(SelectionTest, SelectionGrowsAcrossRoundsAndIsDeterministic) {
    const Generated g = linear_data(120, 3, 5, Response::kRegression);
    KrrSelectionOptions opt;
    opt.eps = 1e-6;
    opt.pgd.max_iters = 50;
    const SelectionResult a = select_krr(g.data, opt);
    const SelectionResult b = select_krr(g.data, opt);
    EXPECT_EQ(a.selected, b.selected);
    ASSERT_EQ(a.rounds.size(), b.rounds.size());
    IndexSet so_far;
    for (const SelectionRound& round : a.rounds) {
        EXPECT_EQ(round.statistic, b.rounds[round.round - a.rounds.front().round].statistic);
        if (round.accepted) {
            const IndexSet next = set_union(so_far, round.candidate);
            EXPECT_GT(next.size(), so_far.size());
            so_far = next;
        }
    }
    EXPECT_EQ(so_far, a.selected);
    EXPECT_LE(a.rounds.size(), g.data.p());
}

TEST(CalibrationTest, SeedDeterministicAndScalesWithSafety) {
    const Generated g = linear_data(80, 3, 9, Response::kRegression);
    KrrSelectionOptions opt;
    opt.pgd.max_iters = 30;
    CalibrationOptions c;
    c.runs = 5;
    c.seed = 4;
    const ThresholdCalibration a = calibrate_krr_threshold(g.data, opt, c);
    const ThresholdCalibration b = calibrate_krr_threshold(g.data, opt, c);
    EXPECT_EQ(a.null_statistics, b.null_statistics);
    c.safety = 2.0;
    const ThresholdCalibration s = calibrate_krr_threshold(g.data, opt, c);
    EXPECT_NEAR(s.eps, 2.0 * a.eps, 1e-15);
    EXPECT_NEAR(a.constant, a.eps * std::sqrt(80.0), 1e-12);
    c = CalibrationOptions{};
    c.quantile = 1.5;
    EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace selfpen
