#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selfpen/kernel.hpp"
#include "selfpen/simdata.hpp"

namespace selfpen {

enum class Method { kMl, kKrr };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// kFlow: one PGD run from beta0 = 1/p on the unweighted objective, S_hat =
/// support of the last iterate. kAlgorithm: the thresholded multi-round
/// selection procedures.
enum class Procedure { kFlow, kAlgorithm };

std::string to_string(Procedure p);
Procedure procedure_from_string(const std::string& s);

/// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();

struct ExperimentSpec {
    std::string name;
    Method objective = Method::kMl;
    Procedure procedure = Procedure::kAlgorithm;
    // rho values for the correlation experiments, p values otherwise.
    std::vector<double> grid;
    std::size_t repeats = 100;
    std::uint64_t seed = 0;

    // Per-experiment defaults are filled in by default_experiment.
    std::size_t n = 200;
    double lambda = 0.01;
    double box_bound = 10.0;
    double stepsize = 1.0;
    std::size_t max_iters = 100;
    double grad_tol = 1e-8;
    // Flow runs cap the stepsize at 0.5 / L with L estimated near beta0.
    bool safeguard = false;
    // Fixed threshold; calibrated per grid point when absent.
    std::optional<double> eps;
    std::size_t calibration_runs = 50;
    double calibration_quantile = 1.0;
    double calibration_safety = 1.0;
    double calibration_reweighted_safety = 1.5;
    // Use a kernel smoother instead of the generator's exact conditional.
    bool smoother = false;
    // 0 means: SELFPEN_THREADS if set, else hardware concurrency.
    std::size_t threads = 0;
    // Wall-clock timing makes mean_ms nondeterministic; off by default.
    bool timing = false;

    void validate() const;
};

/// Default settings for a named experiment and objective.
ExperimentSpec default_experiment(const std::string& name, Method objective);

/// Data-generating settings of one grid point of an experiment.
GenSpec experiment_gen_spec(const ExperimentSpec& spec, double param, std::uint64_t seed);

struct RepeatOutcome {
    double param = 0.0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    IndexSet selected;
    std::size_t rounds = 0;
    double ms = 0.0;
};

struct MetricsRow {
    std::string name;
    double param = 0.0;
    std::size_t repeats = 0;
    double tpr = 0.0;
    double fpr = 0.0;
    double mean_rounds = 0.0;
    double mean_ms = 0.0;
    double eps = 0.0;
    // Fraction of repeats with selected == truth exactly.
    double exact = 0.0;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<RepeatOutcome> raw;
};

/// |S_hat ∩ S| / |S|, and |S_hat \ S| / (p - |S|). Empty denominators give 0.
double true_positive_rate(const IndexSet& selected, const IndexSet& truth);
double false_positive_rate(const IndexSet& selected, const IndexSet& truth, std::size_t p);

/// Averages the per-repeat rates; reduction order follows `outcomes`.
MetricsRow aggregate(const std::string& name, double param, const std::vector<RepeatOutcome>& outcomes,
                     const IndexSet& truth, std::size_t p);

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// `name,param,repeats,tpr,fpr,mean_rounds,mean_ms`
std::string metrics_csv(const std::vector<MetricsRow>& rows);
/// One line per repeat: `name,param,repeat,seed,selected,rounds,ms` with
/// 1-based selected indices joined by ';'.
std::string raw_csv(const std::string& name, const std::vector<RepeatOutcome>& raw);

/// Worker count: min(requested or SELFPEN_THREADS or hardware, jobs), >= 1.
std::size_t resolve_threads(std::size_t requested, std::size_t jobs);

/// Runs body(i) for i in [0, jobs) on up to `threads` workers. The first
/// exception thrown by any job is rethrown after all workers join.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace selfpen
