#include "selfpen/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "selfpen/io.hpp"
#include "selfpen/selection.hpp"

namespace selfpen {

std::string to_string(Method m) { return m == Method::kMl ? "ml" : "krr"; }

Method method_from_string(const std::string& s) {
    if (s == "ml") return Method::kMl;
    if (s == "krr") return Method::kKrr;
    fail(ErrorCode::kInvalidArgument, "unknown method '" + s + "' (expected ml or krr)");
}

std::string to_string(Procedure p) { return p == Procedure::kFlow ? "flow" : "algorithm"; }

Procedure procedure_from_string(const std::string& s) {
    if (s == "flow") return Procedure::kFlow;
    if (s == "algorithm") return Procedure::kAlgorithm;
    fail(ErrorCode::kInvalidArgument, "unknown procedure '" + s + "' (expected flow or algorithm)");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"correlation-2d", "correlation-cubic", "pure-interaction",
                                                   "main-effect-grid", "interaction-grid"};
    return names;
}

namespace {

bool is_correlation(const std::string& name) { return name == "correlation-2d" || name == "correlation-cubic"; }

std::vector<double> rho_grid() {
    std::vector<double> g;
    for (int k = -9; k <= 9; ++k) g.push_back(k / 10.0);
    return g;
}

}  // namespace

void ExperimentSpec::validate() const {
    const auto& names = experiment_names();
    require(std::find(names.begin(), names.end(), name) != names.end(), ErrorCode::kInvalidArgument,
            "unknown experiment '" + name + "'");
    require(!grid.empty(), ErrorCode::kInvalidArgument, "experiment grid is empty");
    require(repeats >= 1, ErrorCode::kInvalidArgument, "repeats must be at least 1");
    require(n >= 2, ErrorCode::kInvalidArgument, "n must be at least 2");
    for (double g : grid) {
        if (is_correlation(name)) {
            require(std::isfinite(g) && std::abs(g) < 1.0, ErrorCode::kInvalidArgument, "rho grid values must lie in (-1, 1)");
        } else {
            require(g >= 2.0 && g == std::floor(g), ErrorCode::kInvalidArgument, "p grid values must be integers >= 2");
        }
    }
    require(lambda > 0.0, ErrorCode::kInvalidArgument, "lambda must be positive");
    require(box_bound > 0.0, ErrorCode::kInvalidArgument, "box bound M must be positive");
    require(!eps || *eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
    CalibrationOptions{calibration_runs, seed, calibration_quantile, calibration_safety, calibration_reweighted_safety}.validate();
    PgdConfig{stepsize, max_iters, grad_tol, 1}.validate();
}

ExperimentSpec default_experiment(const std::string& name, Method objective) {
    ExperimentSpec s;
    s.name = name;
    s.objective = objective;
    if (name == "correlation-2d") {
        s.grid = rho_grid();
        s.n = 200;
        s.lambda = 0.1;
    } else if (name == "correlation-cubic") {
        s.grid = rho_grid();
        s.n = 300;
        s.procedure = Procedure::kFlow;
        // The cubic response has variance near 30; alpha = 1 overshoots.
        s.safeguard = true;
    } else if (name == "pure-interaction") {
        s.grid = {10};
        s.procedure = Procedure::kFlow;
    } else if (name == "main-effect-grid") {
        s.n = 50;
        s.grid = {20, 50, 100, 200, 400};
        s.repeats = 50;
        s.lambda = 1.0;
    } else if (name == "interaction-grid") {
        s.grid = {10, 20, 30, 40, 50};
        s.repeats = 50;
        s.lambda = 0.1;
    }
    s.validate();
    return s;
}

GenSpec experiment_gen_spec(const ExperimentSpec& spec, double param, std::uint64_t seed) {
    GenSpec g;
    g.n = spec.n;
    g.seed = seed;
    const bool ml = spec.objective == Method::kMl;
    if (is_correlation(spec.name)) {
        g.rho = param;
        g.p = spec.name == "correlation-2d" ? 2 : 10;
        g.signal = spec.name == "correlation-2d" ? Signal::kLinear1 : Signal::kCubic2;
        g.response = ml ? Response::kClassification : Response::kRegression;
        g.flip_prob = 0.1;
        g.noise_sd = 0.1;
        return g;
    }
    g.p = static_cast<std::size_t>(param);
    if (spec.name == "pure-interaction") {
        g.signal = Signal::kInteraction;
        g.response = ml ? Response::kLogistic : Response::kRegression;
        g.noise_sd = 0.1;
        g.link_scale = 2.0;
    } else if (spec.name == "main-effect-grid") {
        g.signal = Signal::kLinear1;
        g.response = ml ? Response::kLogistic : Response::kRegression;
        g.noise_sd = 1.0;
        g.link_scale = 1.0;
    } else {
        g.signal = Signal::kInteraction;
        g.response = ml ? Response::kLogistic : Response::kRegression;
        g.noise_sd = 1.0;
        g.link_scale = 2.0;
    }
    return g;
}

double true_positive_rate(const IndexSet& selected, const IndexSet& truth) {
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t j : selected) hits += contains(truth, j) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double false_positive_rate(const IndexSet& selected, const IndexSet& truth, std::size_t p) {
    require(truth.size() <= p, ErrorCode::kInvalidArgument, "truth set larger than p");
    if (truth.size() == p) return 0.0;
    std::size_t false_hits = 0;
    for (std::size_t j : selected) false_hits += contains(truth, j) ? 0 : 1;
    return static_cast<double>(false_hits) / static_cast<double>(p - truth.size());
}

MetricsRow aggregate(const std::string& name, double param, const std::vector<RepeatOutcome>& outcomes,
                     const IndexSet& truth, std::size_t p) {
    require(!outcomes.empty(), ErrorCode::kInvalidArgument, "cannot aggregate zero repeats");
    MetricsRow row;
    row.name = name;
    row.param = param;
    row.repeats = outcomes.size();
    for (const RepeatOutcome& o : outcomes) {
        row.tpr += true_positive_rate(o.selected, truth);
        row.fpr += false_positive_rate(o.selected, truth, p);
        row.mean_rounds += static_cast<double>(o.rounds);
        row.mean_ms += o.ms;
        row.exact += o.selected == truth ? 1.0 : 0.0;
    }
    const auto count = static_cast<double>(outcomes.size());
    row.tpr /= count;
    row.fpr /= count;
    row.mean_rounds /= count;
    row.mean_ms /= count;
    row.exact /= count;
    return row;
}

std::size_t resolve_threads(std::size_t requested, std::size_t jobs) {
    std::size_t t = requested;
    if (t == 0) {
        if (const char* env = std::getenv("SELFPEN_THREADS"); env != nullptr && *env != '\0') {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            require(end != env && *end == '\0' && v >= 1, ErrorCode::kInvalidArgument,
                    std::string("SELFPEN_THREADS must be a positive integer, got '") + env + "'");
            t = static_cast<std::size_t>(v);
        } else {
            t = std::max(1u, std::thread::hardware_concurrency());
        }
    }
    return std::max<std::size_t>(1, std::min(t, jobs));
}

void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::max<std::size_t>(1, std::min(threads, jobs));
    if (threads == 1) {
        for (std::size_t i = 0; i < jobs; ++i) body(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            std::size_t i = 0;
            {
                std::lock_guard lock(mu);
                if (next >= jobs || first_error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Seeds of the null datasets used to calibrate eps; disjoint from the
// repeat seeds base + r for any realistic repeat count.
constexpr std::uint64_t kCalibrationOffset = 1'000'000'007ULL;

struct Setup {
    MlSelectionOptions ml;
    KrrSelectionOptions krr;
};

Setup make_setup(const ExperimentSpec& spec) {
    Setup s;
    const PgdConfig pgd{spec.stepsize, spec.max_iters, spec.grad_tol, 1};
    s.ml.pgd = pgd;
    s.ml.box_bound = spec.box_bound;
    s.krr.pgd = pgd;
    s.krr.box_bound = spec.box_bound;
    s.krr.lambda = spec.lambda;
    return s;
}

ConditionalModel conditional_for(const ExperimentSpec& spec, const Generated& gen) {
    if (spec.smoother || !gen.truth.oracle) {
        return kernel_smoother_conditional(gen.data, default_smoother_bandwidth(gen.data.n()));
    }
    return *gen.truth.oracle;
}

// Sets the thresholds of `setup`; returns the first-round level.
double calibrate_setup(const ExperimentSpec& spec, Setup& setup, double param, std::size_t grid_index) {
    if (spec.eps) {
        setup.ml.eps = setup.krr.eps = *spec.eps;
        return *spec.eps;
    }
    std::vector<Dataset> pool;
    std::vector<ConditionalModel> conditionals;
    pool.reserve(spec.calibration_runs);
    for (std::size_t c = 0; c < spec.calibration_runs; ++c) {
        Generated gen = generate(experiment_gen_spec(spec, param, spec.seed + kCalibrationOffset + c));
        if (spec.objective == Method::kMl) conditionals.push_back(conditional_for(spec, gen));
        pool.push_back(std::move(gen.data));
    }
    CalibrationOptions copt;
    copt.runs = spec.calibration_runs;
    copt.seed = spec.seed + kCalibrationOffset + grid_index;
    copt.quantile = spec.calibration_quantile;
    copt.safety = spec.calibration_safety;
    copt.reweighted_safety = spec.calibration_reweighted_safety;
    if (spec.objective == Method::kMl) {
        // Simulation calibration: the generator's signal set is the tilt
        // under which later rounds face a true null.
        const IndexSet truth = signal_indices(experiment_gen_spec(spec, param, spec.seed).signal);
        const ThresholdCalibration cal = calibrate_ml_threshold(pool, conditionals, setup.ml, copt, truth);
        setup.ml.eps = cal.eps;
        setup.ml.eps_reweighted = cal.eps_reweighted;
        return cal.eps;
    }
    setup.krr.eps = calibrate_krr_threshold(pool, setup.krr, copt).eps;
    return setup.krr.eps;
}

// Extra sample points for the stepsize guard.
constexpr std::size_t kGuardSamples = 4;

IndexSet flow_support(const ExperimentSpec& spec, const Dataset& d, const Setup& setup, std::uint64_t seed) {
    const Weights beta0 = Weights::uniform(d.p(), 1.0 / static_cast<double>(d.p()), spec.box_bound);
    const Objective objective = spec.objective == Method::kMl ? make_ml_objective(d, setup.ml.kernel)
                                                              : make_krr_objective(d, setup.krr.kernel, spec.lambda);
    PgdConfig cfg = spec.objective == Method::kMl ? setup.ml.pgd : setup.krr.pgd;
    if (spec.safeguard) {
        cfg.stepsize = guarded_stepsize(objective, beta0.beta(), spec.box_bound, cfg.stepsize, kGuardSamples, seed);
    }
    return pgd_run(objective, beta0, cfg).terminal.support();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::string label = spec.name + ":" + to_string(spec.objective);
    ExperimentResult result;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const double param = spec.grid[g];
        Setup setup = make_setup(spec);
        const bool flow = spec.procedure == Procedure::kFlow;
        const double eps = flow ? 0.0 : calibrate_setup(spec, setup, param, g);

        std::vector<RepeatOutcome> outcomes(spec.repeats);
        const std::size_t threads = resolve_threads(spec.threads, spec.repeats);
        parallel_for(spec.repeats, threads, [&](std::size_t r) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::uint64_t seed = spec.seed + r;
            const Generated gen = generate(experiment_gen_spec(spec, param, seed));
            RepeatOutcome& o = outcomes[r];
            o.param = param;
            o.repeat = r;
            o.seed = seed;
            if (flow) {
                o.selected = flow_support(spec, gen.data, setup, seed);
                o.rounds = 1;
            } else {
                const SelectionResult sel = spec.objective == Method::kMl
                                                ? select_metric_learning(gen.data, conditional_for(spec, gen), setup.ml)
                                                : select_krr(gen.data, setup.krr);
                o.selected = sel.selected;
                o.rounds = sel.rounds.size();
            }
            if (spec.timing) {
                o.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            }
        });

        const GenSpec shape = experiment_gen_spec(spec, param, spec.seed);
        MetricsRow row = aggregate(label, param, outcomes, signal_indices(shape.signal), shape.p);
        row.eps = eps;
        result.rows.push_back(row);
        result.raw.insert(result.raw.end(), outcomes.begin(), outcomes.end());
    }
    return result;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "name,param,repeats,tpr,fpr,mean_rounds,mean_ms\n";
    for (const MetricsRow& r : rows) {
        out << r.name << ',' << format_shortest(r.param) << ',' << r.repeats << ',' << format_shortest(r.tpr) << ','
            << format_shortest(r.fpr) << ',' << format_shortest(r.mean_rounds) << ',' << format_shortest(r.mean_ms) << '\n';
    }
    return out.str();
}

std::string raw_csv(const std::string& name, const std::vector<RepeatOutcome>& raw) {
    std::ostringstream out;
    out << "name,param,repeat,seed,selected,rounds,ms\n";
    for (const RepeatOutcome& o : raw) {
        out << name << ',' << format_shortest(o.param) << ',' << o.repeat << ',' << o.seed << ',';
        for (std::size_t k = 0; k < o.selected.size(); ++k) out << (k ? ";" : "") << o.selected[k] + 1;
        out << ',' << o.rounds << ',' << format_shortest(o.ms) << '\n';
    }
    return out.str();
}

}  // namespace selfpen
