// Command-line front end. Talks to the library only through the C interface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfpen/selfpen.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for any input problem; maps to the usage exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(sp_status s, const std::string& what) {
    if (s != SP_OK) throw UsageError(what + ": " + sp_last_error());
}

struct CString {
    char* p = nullptr;
    ~CString() { sp_string_free(p); }
    [[nodiscard]] std::string str() const { return p == nullptr ? std::string() : std::string(p); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
};

using Dataset = Handle<sp_dataset, sp_dataset_free>;
using Selector = Handle<sp_selector, sp_selector_free>;
using Selection = Handle<sp_selection, sp_selection_free>;
using Experiment = Handle<sp_experiment, sp_experiment_free>;
using Validation = Handle<sp_validation, sp_validation_free>;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw UsageError("failed writing '" + path + "'");
}

std::string format_set(const std::vector<size_t>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "}";
}

// Options given on the command line or in the config file, forwarded to a
// key/value setter only when present.
struct Forwarded {
    std::map<std::string, std::string> values;
    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }
};

struct ValidateArgs {
    std::string filter;
    std::uint64_t seed = 0;
};

int run_validate(const ValidateArgs& a) {
    Validation v;
    check(sp_validation_run(a.filter.c_str(), a.seed, &v.p), "validate");
    const std::size_t count = sp_validation_count(v.p);
    if (count == 0) throw UsageError("no property matches filter '" + a.filter + "'");
    std::size_t failed = 0;
    for (std::size_t i = 0; i < count; ++i) {
        sp_property prop{};
        check(sp_validation_get(v.p, i, &prop), "validate");
        failed += prop.passed ? 0 : 1;
        std::printf("%s %s/%s measured=%.6g tolerance=%.6g instances=%zu (%s)\n", prop.passed ? "PASS" : "FAIL",
                    prop.suite, prop.name, prop.measured, prop.tolerance, prop.instances, prop.detail);
    }
    std::printf("%zu/%zu properties passed\n", count - failed, count);
    return failed == 0 ? kExitOk : kExitPropertyFailure;
}

struct GradcheckArgs {
    std::string objective = "both";
    std::size_t instances = 50;
    std::size_t points = 10;
    std::uint64_t seed = 0;
};

int run_gradcheck(const GradcheckArgs& a) {
    std::vector<std::string> targets;
    if (a.objective == "both") {
        targets = {"ml", "krr"};
    } else {
        targets = {a.objective};
    }
    bool ok = true;
    for (const std::string& t : targets) {
        sp_gradcheck_result r{};
        check(sp_gradcheck(t.c_str(), a.instances, a.points, a.seed, &r), "gradcheck");
        ok = ok && r.passed;
        std::printf("%s %s gradient: max relative error %.3e over %zu points (tolerance %.0e)\n",
                    r.passed ? "PASS" : "FAIL", t.c_str(), r.max_relative_error, r.evaluations, r.tolerance);
    }
    return ok ? kExitOk : kExitPropertyFailure;
}

struct SelectArgs {
    std::string input;
    std::string method = "ml";
    std::string out;
    Forwarded options;
};

int run_select(const SelectArgs& a) {
    Dataset d;
    check(sp_dataset_read_csv(a.input.c_str(), &d.p), "reading " + a.input);
    Selector s;
    check(sp_selector_new(a.method.c_str(), &s.p), "select");
    for (const auto& [k, v] : a.options.values) check(sp_selector_set(s.p, k.c_str(), v.c_str()), "option " + k);
    Selection r;
    check(sp_selector_run(s.p, d.p, &r.p), "select");
    std::size_t count = 0;
    check(sp_selection_selected(r.p, nullptr, 0, &count), "select");
    std::vector<size_t> idx(count);
    check(sp_selection_selected(r.p, idx.data(), idx.size(), &count), "select");
    std::printf("selected: %s\nrounds: %zu\n", format_set(idx).c_str(), sp_selection_rounds(r.p));
    if (!a.out.empty()) {
        CString json;
        check(sp_selection_json(r.p, &json.p), "select");
        write_text(a.out, json.str());
        std::printf("result: %s\n", a.out.c_str());
    }
    return kExitOk;
}

struct ExperimentArgs {
    std::string name;
    std::string method = "krr";
    std::string out;
    std::string raw;
    Forwarded options;
};

int run_experiment(const ExperimentArgs& a) {
    Experiment e;
    check(sp_experiment_new(a.name.c_str(), a.method.c_str(), &e.p), "experiment");
    for (const auto& [k, v] : a.options.values) check(sp_experiment_set(e.p, k.c_str(), v.c_str()), "option " + k);
    check(sp_experiment_run(e.p), "experiment");
    CString csv;
    check(sp_experiment_metrics_csv(e.p, &csv.p), "experiment");
    if (a.out.empty()) {
        std::fputs(csv.p, stdout);
    } else {
        write_text(a.out, csv.str());
        std::printf("metrics: %s\n", a.out.c_str());
    }
    if (!a.raw.empty()) {
        CString raw;
        check(sp_experiment_raw_csv(e.p, &raw.p), "experiment");
        write_text(a.raw, raw.str());
        std::printf("raw: %s\n", a.raw.c_str());
    }
    return kExitOk;
}

struct GenerateArgs {
    sp_gen_options opt{};
    std::string signal = "linear-1";
    std::string response = "classification";
    std::string out;
};

int run_generate(GenerateArgs a) {
    a.opt.signal = a.signal.c_str();
    a.opt.response = a.response.c_str();
    Dataset d;
    check(sp_dataset_generate(&a.opt, &d.p), "generate");
    check(sp_dataset_write_csv(d.p, a.out.c_str()), "generate");
    std::printf("wrote %zu x %zu samples to %s\n", sp_dataset_n(d.p), sp_dataset_p(d.p), a.out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-penalizing kernel feature selection"};
    app.set_config("--config", "", "Config file: key = value lines under [subcommand] headers");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sp_version()));

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Run the property suites");
    validate->add_option("--filter", va.filter, "Only properties whose suite/name contains this text");
    validate->add_option("--seed", va.seed, "Base seed");

    GradcheckArgs ga;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    gradcheck->add_option("--objective", ga.objective, "ml, krr or both")
        ->check(CLI::IsMember({"ml", "krr", "both"}));
    gradcheck->add_option("--instances", ga.instances, "Random problems")->check(CLI::PositiveNumber);
    gradcheck->add_option("--points", ga.points, "Points per problem")->check(CLI::PositiveNumber);
    gradcheck->add_option("--seed", ga.seed, "Base seed");

    SelectArgs sa;
    auto* select = app.add_subcommand("select", "Run a selection procedure on a CSV dataset");
    select->add_option("input,--input", sa.input, "Dataset CSV with header x1,...,xp,y")->required();
    select->add_option("--method", sa.method, "ml or krr")->check(CLI::IsMember({"ml", "krr"}));
    select->add_option("--out", sa.out, "Write the JSON result with the full round log here");
    sa.options.add(select, "--lambda", "lambda", "Ridge parameter (krr)");
    sa.options.add(select, "--eps", "eps", "Acceptance threshold; calibrated on permutations when absent");
    sa.options.add(select, "-M,--box-bound", "M", "Box bound M");
    sa.options.add(select, "--alpha", "alpha", "Gradient stepsize");
    sa.options.add(select, "--seed", "seed", "Calibration seed");
    sa.options.add(select, "--max-iters", "max_iters", "Gradient steps per round");
    sa.options.add(select, "--grad-tol", "grad_tol", "Stationarity tolerance");
    sa.options.add(select, "--q", "q", "Distance exponent (1 or 2)");
    sa.options.add(select, "--calibration-runs", "calibration_runs", "Permutation null runs");
    sa.options.add(select, "--calibration-quantile", "calibration_quantile", "Null quantile used as threshold");
    sa.options.add(select, "--calibration-safety", "calibration_safety", "Factor on the null quantile");
    sa.options.add(select, "--bandwidth", "bandwidth", "Kernel smoother bandwidth (ml)");

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "Run a synthetic experiment grid");
    experiment->add_option("name,--name", ea.name, "Experiment name")
        ->required()
        ->check(CLI::IsMember({"correlation-2d", "correlation-cubic", "pure-interaction", "main-effect-grid",
                               "interaction-grid"}));
    experiment->add_option("--method", ea.method, "ml or krr")->check(CLI::IsMember({"ml", "krr"}));
    experiment->add_option("--out", ea.out, "Metrics CSV (stdout when absent)");
    experiment->add_option("--raw", ea.raw, "Per-repeat CSV");
    ea.options.add(experiment, "--procedure", "procedure", "flow or algorithm");
    ea.options.add(experiment, "--grid", "grid", "Comma separated rho or p values");
    ea.options.add(experiment, "--repeats", "repeats", "Repeats per grid point");
    ea.options.add(experiment, "--seed", "seed", "Base seed; repeat r uses seed + r");
    ea.options.add(experiment, "--n", "n", "Sample size");
    ea.options.add(experiment, "--lambda", "lambda", "Ridge parameter (krr)");
    ea.options.add(experiment, "-M,--box-bound", "M", "Box bound M");
    ea.options.add(experiment, "--alpha", "alpha", "Gradient stepsize (upper bound when safeguarded)");
    ea.options.add(experiment, "--max-iters", "max_iters", "Gradient steps");
    ea.options.add(experiment, "--grad-tol", "grad_tol", "Stationarity tolerance");
    ea.options.add(experiment, "--safeguard", "safeguard", "Cap the flow stepsize at 0.5/L (true/false)");
    ea.options.add(experiment, "--eps", "eps", "Fixed threshold instead of calibration");
    ea.options.add(experiment, "--calibration-runs", "calibration_runs", "Null datasets per grid point");
    ea.options.add(experiment, "--calibration-quantile", "calibration_quantile", "Null quantile used as threshold");
    ea.options.add(experiment, "--calibration-safety", "calibration_safety", "Factor on the null quantile");
    ea.options.add(experiment, "--calibration-reweighted-safety", "calibration_reweighted_safety",
                   "Factor on the later-round null quantile (ml)");
    ea.options.add(experiment, "--smoother", "smoother", "Estimate conditionals with a kernel smoother (true/false)");
    ea.options.add(experiment, "--threads", "threads", "Worker threads (0: SELFPEN_THREADS or all cores)");
    ea.options.add(experiment, "--timing", "timing", "Record wall-clock time per repeat (true/false)");

    GenerateArgs gen;
    sp_gen_options_init(&gen.opt);
    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    generate->add_option("--out", gen.out, "Output CSV")->required();
    generate->add_option("--n", gen.opt.n, "Samples");
    generate->add_option("--p", gen.opt.p, "Features");
    generate->add_option("--rho", gen.opt.rho, "AR(1) correlation");
    generate->add_option("--signal", gen.signal, "linear-1, cubic-2 or interaction");
    generate->add_option("--response", gen.response, "classification, regression or logistic");
    generate->add_option("--flip-prob", gen.opt.flip_prob, "Label flip probability (classification)");
    generate->add_option("--noise-sd", gen.opt.noise_sd, "Noise standard deviation (regression)");
    generate->add_option("--link-scale", gen.opt.link_scale, "Logit scale (logistic)");
    generate->add_option("--seed", gen.opt.seed, "Seed");

    for (CLI::App* sub : {validate, gradcheck, select, experiment, generate}) sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return run_validate(va);
        if (gradcheck->parsed()) return run_gradcheck(ga);
        if (select->parsed()) return run_select(sa);
        if (experiment->parsed()) return run_experiment(ea);
        if (generate->parsed()) return run_generate(gen);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
