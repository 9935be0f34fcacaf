#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "selfpen/harness.hpp"

namespace selfpen {
namespace {

RepeatOutcome outcome(IndexSet s, std::size_t rounds, double ms) {
    RepeatOutcome o;
    o.selected = std::move(s);
    o.rounds = rounds;
    o.ms = ms;
    return o;
}

TEST(MetricsTest, RatesOnSingleRuns) {
    EXPECT_DOUBLE_EQ(true_positive_rate({0, 3}, {0, 1}), 0.5);
    EXPECT_DOUBLE_EQ(false_positive_rate({0, 3}, {0, 1}, 5), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(true_positive_rate({}, {}), 0.0);
    EXPECT_DOUBLE_EQ(false_positive_rate({0}, {0}, 1), 0.0);
    EXPECT_THROW(false_positive_rate({}, {0, 1}, 1), Error);
}

TEST(MetricsTest, HandCountedFiveRunFixture) {
    // truth {0, 1}, p = 4: per-run TPR 1, 1/2, 1, 0, 1 and FPR 0, 0, 1/2, 1/2, 1.
    const std::vector<RepeatOutcome> runs{
        outcome({0, 1}, 2, 10.0), outcome({1}, 1, 20.0), outcome({0, 1, 2}, 3, 30.0),
        outcome({3}, 1, 40.0),    outcome({0, 1, 2, 3}, 4, 50.0),
    };
    const MetricsRow r = aggregate("fixture", 0.5, runs, {0, 1}, 4);
    EXPECT_EQ(r.repeats, 5u);
    EXPECT_DOUBLE_EQ(r.tpr, 3.5 / 5.0);
    EXPECT_DOUBLE_EQ(r.fpr, 2.0 / 5.0);
    EXPECT_DOUBLE_EQ(r.mean_rounds, 11.0 / 5.0);
    EXPECT_DOUBLE_EQ(r.mean_ms, 30.0);
    EXPECT_DOUBLE_EQ(r.exact, 0.2);
    EXPECT_EQ(metrics_csv({r}), "name,param,repeats,tpr,fpr,mean_rounds,mean_ms\nfixture,0.5,5,0.7,0.4,2.2,30\n");
    EXPECT_THROW(aggregate("x", 0.0, {}, {0}, 2), Error);
}

TEST(MetricsTest, RawCsvUsesOneBasedIndices) {
    RepeatOutcome o = outcome({0, 2}, 2, 1.5);
    o.param = 0.3;
    o.repeat = 4;
    o.seed = 99;
    EXPECT_EQ(raw_csv("e", {o}), "name,param,repeat,seed,selected,rounds,ms\ne,0.3,4,99,1;3,2,1.5\n");
}

TEST(ThreadsTest, ResolveRespectsRequestEnvAndJobs) {
    EXPECT_EQ(resolve_threads(3, 10), 3u);
    EXPECT_EQ(resolve_threads(8, 2), 2u);
    EXPECT_EQ(resolve_threads(5, 0), 1u);
    setenv("SELFPEN_THREADS", "2", 1);
    EXPECT_EQ(resolve_threads(0, 10), 2u);
    unsetenv("SELFPEN_THREADS");
    EXPECT_GE(resolve_threads(0, 10), 1u);
}

TEST(ThreadsTest, ParallelForCoversAllJobsAndRethrows) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(ExperimentTest, DefaultsAndNames) {
    EXPECT_EQ(experiment_names().size(), 5u);
    for (const std::string& name : experiment_names()) {
        for (Method m : {Method::kMl, Method::kKrr}) {
            const ExperimentSpec s = default_experiment(name, m);
            EXPECT_NO_THROW(s.validate());
            EXPECT_FALSE(s.grid.empty());
        }
    }
    EXPECT_EQ(default_experiment("correlation-2d", Method::kMl).grid.size(), 19u);
    EXPECT_THROW(default_experiment("nope", Method::kMl), Error);
    EXPECT_EQ(method_from_string(to_string(Method::kKrr)), Method::kKrr);
    EXPECT_EQ(procedure_from_string("flow"), Procedure::kFlow);
    EXPECT_THROW(method_from_string("lasso"), Error);
}

TEST(ExperimentTest, GenSpecFollowsGridParameter) {
    const ExperimentSpec corr = default_experiment("correlation-2d", Method::kMl);
    const GenSpec g = experiment_gen_spec(corr, -0.4, 3);
    EXPECT_EQ(g.rho, -0.4);
    EXPECT_EQ(g.p, 2u);
    EXPECT_EQ(g.seed, 3u);
    const ExperimentSpec grid = default_experiment("main-effect-grid", Method::kKrr);
    EXPECT_EQ(experiment_gen_spec(grid, 100, 0).p, 100u);
}

TEST(ExperimentTest, SmallRunIsThreadInvariant) {
    ExperimentSpec s = default_experiment("correlation-2d", Method::kKrr);
    s.grid = {-0.5, 0.5};
    s.repeats = 3;
    s.calibration_runs = 3;
    s.max_iters = 30;
    s.threads = 1;
    const ExperimentResult a = run_experiment(s);
    s.threads = 3;
    const ExperimentResult b = run_experiment(s);
    ASSERT_EQ(a.rows.size(), 2u);
    EXPECT_EQ(metrics_csv(a.rows), metrics_csv(b.rows));
    EXPECT_EQ(raw_csv("x", a.raw), raw_csv("x", b.raw));
    EXPECT_EQ(a.raw.size(), 6u);
    for (const MetricsRow& r : a.rows) EXPECT_EQ(r.mean_ms, 0.0);
}

}  // namespace
}  // namespace selfpen
