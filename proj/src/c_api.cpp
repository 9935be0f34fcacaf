#include "selfpen/selfpen.h"

#include <charconv>
#include <cmath>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <new>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfpen/harness.hpp"
#include "selfpen/io.hpp"
#include "selfpen/selection.hpp"
#include "selfpen/simdata.hpp"
#include "selfpen/validation.hpp"

struct sp_dataset {
    selfpen::Dataset data;
};

struct sp_selector {
    selfpen::Method method = selfpen::Method::kMl;
    double lambda = 0.01;
    std::optional<double> eps;
    double box_bound = 10.0;
    selfpen::PgdConfig pgd;
    std::uint64_t seed = 0;
    selfpen::Exponent q = selfpen::Exponent::kOne;
    selfpen::CalibrationOptions calibration;
    std::optional<double> bandwidth;
};

struct sp_selection {
    selfpen::Method method = selfpen::Method::kMl;
    selfpen::SelectionResult result;
    double eps = 0.0;
    std::optional<double> eps_reweighted;
    bool calibrated = false;
    std::size_t n = 0;
    std::size_t p = 0;
};

struct sp_experiment {
    selfpen::ExperimentSpec spec;
    std::optional<selfpen::ExperimentResult> result;
};

struct sp_validation {
    std::vector<selfpen::PropertyResult> results;
};

namespace {

thread_local std::string g_last_error;

sp_status to_status(selfpen::ErrorCode code) {
    switch (code) {
        case selfpen::ErrorCode::kInvalidArgument: return SP_ERR_INVALID_ARGUMENT;
        case selfpen::ErrorCode::kDimensionMismatch: return SP_ERR_DIMENSION_MISMATCH;
        case selfpen::ErrorCode::kNumericalFailure: return SP_ERR_NUMERICAL;
        case selfpen::ErrorCode::kIo: return SP_ERR_IO;
        case selfpen::ErrorCode::kParse: return SP_ERR_PARSE;
    }
    return SP_ERR_INTERNAL;
}

// Runs body and converts every exception into a status plus message.
sp_status guarded(const std::function<void()>& body) {
    try {
        body();
        return SP_OK;
    } catch (const selfpen::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SP_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SP_ERR_INTERNAL;
    }
}

void require_ptr(const void* p, const char* what) {
    selfpen::require(p != nullptr, selfpen::ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    selfpen::require(ec == std::errc() && ptr == last && !value.empty(), selfpen::ErrorCode::kParse,
                     "invalid value '" + value + "' for " + key);
    return out;
}

double parse_positive(const std::string& key, const std::string& value) {
    const double v = parse_number<double>(key, value);
    selfpen::require(std::isfinite(v) && v > 0.0, selfpen::ErrorCode::kInvalidArgument, key + " must be positive");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    selfpen::fail(selfpen::ErrorCode::kParse, "invalid boolean '" + value + "' for " + key);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        selfpen::require(b != std::string::npos, selfpen::ErrorCode::kInvalidArgument, "empty entry in " + key);
        out.push_back(parse_number<double>(key, item.substr(b, e - b + 1)));
    }
    return out;
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nlohmann::json one_based(const selfpen::IndexSet& s) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t j : s) a.push_back(j + 1);
    return a;
}

nlohmann::json vector_json(const selfpen::Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

extern "C" {

const char* sp_version(void) { return "1.0.0"; }

const char* sp_last_error(void) { return g_last_error.c_str(); }

const char* sp_status_name(sp_status status) {
    switch (status) {
        case SP_OK: return "ok";
        case SP_ERR_INVALID_ARGUMENT: return "invalid argument";
        case SP_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
        case SP_ERR_NUMERICAL: return "numerical failure";
        case SP_ERR_IO: return "i/o error";
        case SP_ERR_PARSE: return "parse error";
        case SP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void sp_string_free(char* s) { delete[] s; }

void sp_gen_options_init(sp_gen_options* opt) {
    if (opt == nullptr) return;
    const selfpen::GenSpec g;
    opt->n = g.n;
    opt->p = g.p;
    opt->rho = g.rho;
    opt->signal = "linear-1";
    opt->response = "classification";
    opt->flip_prob = g.flip_prob;
    opt->noise_sd = g.noise_sd;
    opt->link_scale = g.link_scale;
    opt->seed = g.seed;
}

sp_status sp_dataset_generate(const sp_gen_options* opt, sp_dataset** out) {
    return guarded([&] {
        require_ptr(opt, "options");
        require_ptr(out, "output handle");
        require_ptr(opt->signal, "signal");
        require_ptr(opt->response, "response");
        selfpen::GenSpec g;
        g.n = opt->n;
        g.p = opt->p;
        g.rho = opt->rho;
        g.signal = selfpen::signal_from_string(opt->signal);
        g.response = selfpen::response_from_string(opt->response);
        g.flip_prob = opt->flip_prob;
        g.noise_sd = opt->noise_sd;
        g.link_scale = opt->link_scale;
        g.seed = opt->seed;
        *out = new sp_dataset{selfpen::generate(g).data};
    });
}

sp_status sp_dataset_read_csv(const char* path, sp_dataset** out) {
    return guarded([&] {
        require_ptr(path, "path");
        require_ptr(out, "output handle");
        *out = new sp_dataset{selfpen::read_csv(std::string(path))};
    });
}

sp_status sp_dataset_write_csv(const sp_dataset* d, const char* path) {
    return guarded([&] {
        require_ptr(d, "dataset");
        require_ptr(path, "path");
        selfpen::write_csv(d->data, std::string(path));
    });
}

sp_status sp_dataset_from_arrays(const double* x_row_major, const double* y, size_t n, size_t p, sp_dataset** out) {
    return guarded([&] {
        require_ptr(x_row_major, "x");
        require_ptr(y, "y");
        require_ptr(out, "output handle");
        selfpen::RowMatrix X = Eigen::Map<const selfpen::RowMatrix>(x_row_major, static_cast<Eigen::Index>(n),
                                                                     static_cast<Eigen::Index>(p));
        selfpen::Vector v = Eigen::Map<const selfpen::Vector>(y, static_cast<Eigen::Index>(n));
        *out = new sp_dataset{selfpen::Dataset(std::move(X), std::move(v))};
    });
}

size_t sp_dataset_n(const sp_dataset* d) { return d == nullptr ? 0 : d->data.n(); }

size_t sp_dataset_p(const sp_dataset* d) { return d == nullptr ? 0 : d->data.p(); }

void sp_dataset_free(sp_dataset* d) { delete d; }

sp_status sp_selector_new(const char* method, sp_selector** out) {
    return guarded([&] {
        require_ptr(method, "method");
        require_ptr(out, "output handle");
        auto s = std::make_unique<sp_selector>();
        s->method = selfpen::method_from_string(method);
        *out = s.release();
    });
}

sp_status sp_selector_set(sp_selector* s, const char* key_c, const char* value_c) {
    return guarded([&] {
        require_ptr(s, "selector");
        require_ptr(key_c, "key");
        require_ptr(value_c, "value");
        const std::string key(key_c);
        const std::string value(value_c);
        if (key == "lambda") {
            s->lambda = parse_positive(key, value);
        } else if (key == "eps") {
            s->eps = parse_number<double>(key, value);
        } else if (key == "M") {
            s->box_bound = parse_positive(key, value);
        } else if (key == "alpha") {
            s->pgd.stepsize = parse_positive(key, value);
        } else if (key == "max_iters") {
            s->pgd.max_iters = parse_number<std::size_t>(key, value);
        } else if (key == "grad_tol") {
            s->pgd.grad_tol = parse_positive(key, value);
        } else if (key == "seed") {
            s->seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "q") {
            s->q = selfpen::exponent_from_int(parse_number<int>(key, value));
        } else if (key == "calibration_runs") {
            s->calibration.runs = parse_number<std::size_t>(key, value);
        } else if (key == "calibration_quantile") {
            s->calibration.quantile = parse_number<double>(key, value);
        } else if (key == "calibration_safety") {
            s->calibration.safety = parse_number<double>(key, value);
        } else if (key == "bandwidth") {
            s->bandwidth = parse_positive(key, value);
        } else {
            selfpen::fail(selfpen::ErrorCode::kInvalidArgument, "unknown selection option '" + key + "'");
        }
    });
}

sp_status sp_selector_run(const sp_selector* s, const sp_dataset* d, sp_selection** out) {
    return guarded([&] {
        require_ptr(s, "selector");
        require_ptr(d, "dataset");
        require_ptr(out, "output handle");
        s->pgd.validate();
        auto r = std::make_unique<sp_selection>();
        r->method = s->method;
        r->n = d->data.n();
        r->p = d->data.p();
        selfpen::CalibrationOptions copt = s->calibration;
        copt.seed = s->seed;
        if (s->method == selfpen::Method::kMl) {
            selfpen::require_binary_labels(d->data, "metric learning selection");
            selfpen::MlSelectionOptions opt;
            opt.pgd = s->pgd;
            opt.box_bound = s->box_bound;
            opt.kernel = selfpen::KernelSpec(s->q);
            const double bw = s->bandwidth.value_or(selfpen::default_smoother_bandwidth(d->data.n()));
            const selfpen::ConditionalModel cm = selfpen::kernel_smoother_conditional(d->data, bw);
            if (s->eps) {
                opt.eps = *s->eps;
            } else {
                const selfpen::ThresholdCalibration cal = selfpen::calibrate_ml_threshold(
                    std::span<const selfpen::Dataset>(&d->data, 1), std::span<const selfpen::ConditionalModel>(&cm, 1),
                    opt, copt);
                opt.eps = cal.eps;
                opt.eps_reweighted = cal.eps_reweighted;
                r->calibrated = true;
            }
            r->eps = opt.eps;
            r->eps_reweighted = opt.eps_reweighted;
            r->result = selfpen::select_metric_learning(d->data, cm, opt);
        } else {
            selfpen::KrrSelectionOptions opt;
            opt.pgd = s->pgd;
            opt.box_bound = s->box_bound;
            opt.lambda = s->lambda;
            opt.kernel = selfpen::KernelSpec(s->q);
            if (s->eps) {
                opt.eps = *s->eps;
            } else {
                opt.eps = selfpen::calibrate_krr_threshold(d->data, opt, copt).eps;
                r->calibrated = true;
            }
            r->eps = opt.eps;
            r->result = selfpen::select_krr(d->data, opt);
        }
        *out = r.release();
    });
}

void sp_selector_free(sp_selector* s) { delete s; }

sp_status sp_selection_selected(const sp_selection* r, size_t* indices, size_t capacity, size_t* count) {
    return guarded([&] {
        require_ptr(r, "selection");
        require_ptr(count, "count");
        const auto& sel = r->result.selected;
        *count = sel.size();
        if (capacity > 0) require_ptr(indices, "indices");
        for (std::size_t i = 0; i < sel.size() && i < capacity; ++i) indices[i] = sel[i] + 1;
    });
}

size_t sp_selection_rounds(const sp_selection* r) { return r == nullptr ? 0 : r->result.rounds.size(); }

sp_status sp_selection_json(const sp_selection* r, char** out) {
    return guarded([&] {
        require_ptr(r, "selection");
        require_ptr(out, "output string");
        nlohmann::json j;
        j["method"] = selfpen::to_string(r->method);
        j["n"] = r->n;
        j["p"] = r->p;
        j["eps"] = r->eps;
        if (r->eps_reweighted) j["eps_reweighted"] = *r->eps_reweighted;
        j["eps_calibrated"] = r->calibrated;
        j["selected"] = one_based(r->result.selected);
        nlohmann::json rounds = nlohmann::json::array();
        for (const selfpen::SelectionRound& round : r->result.rounds) {
            nlohmann::json jr;
            jr["round"] = round.round + 1;
            jr["candidate"] = one_based(round.candidate);
            jr["statistic"] = round.statistic;
            jr["threshold"] = round.threshold;
            jr["accepted"] = round.accepted;
            const selfpen::Trajectory& t = round.trajectory;
            nlohmann::json jt;
            jt["converged"] = t.converged;
            jt["iters_used"] = t.iters_used;
            jt["terminal_value"] = t.terminal_value;
            jt["terminal_beta"] = vector_json(t.terminal.beta());
            jt["pinned"] = one_based(t.terminal.pinned());
            nlohmann::json its = nlohmann::json::array();
            for (const selfpen::Iterate& it : t.iterates) {
                its.push_back({{"step", it.step},
                               {"value", it.value},
                               {"grad_inf_norm", it.grad_inf_norm},
                               {"support", one_based(it.support)},
                               {"beta", vector_json(it.beta)}});
            }
            jt["iterates"] = std::move(its);
            jr["trajectory"] = std::move(jt);
            rounds.push_back(std::move(jr));
        }
        j["rounds"] = std::move(rounds);
        *out = copy_string(j.dump(2) + "\n");
    });
}

void sp_selection_free(sp_selection* r) { delete r; }

sp_status sp_experiment_new(const char* name, const char* method, sp_experiment** out) {
    return guarded([&] {
        require_ptr(name, "name");
        require_ptr(method, "method");
        require_ptr(out, "output handle");
        *out = new sp_experiment{selfpen::default_experiment(name, selfpen::method_from_string(method)), std::nullopt};
    });
}

sp_status sp_experiment_set(sp_experiment* e, const char* key_c, const char* value_c) {
    return guarded([&] {
        require_ptr(e, "experiment");
        require_ptr(key_c, "key");
        require_ptr(value_c, "value");
        const std::string key(key_c);
        const std::string value(value_c);
        selfpen::ExperimentSpec s = e->spec;
        if (key == "procedure") {
            s.procedure = selfpen::procedure_from_string(value);
        } else if (key == "grid") {
            s.grid = parse_list(key, value);
        } else if (key == "repeats") {
            s.repeats = parse_number<std::size_t>(key, value);
        } else if (key == "seed") {
            s.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "n") {
            s.n = parse_number<std::size_t>(key, value);
        } else if (key == "lambda") {
            s.lambda = parse_number<double>(key, value);
        } else if (key == "M") {
            s.box_bound = parse_number<double>(key, value);
        } else if (key == "alpha") {
            s.stepsize = parse_number<double>(key, value);
        } else if (key == "max_iters") {
            s.max_iters = parse_number<std::size_t>(key, value);
        } else if (key == "grad_tol") {
            s.grad_tol = parse_number<double>(key, value);
        } else if (key == "safeguard") {
            s.safeguard = parse_bool(key, value);
        } else if (key == "eps") {
            s.eps = parse_number<double>(key, value);
        } else if (key == "calibration_runs") {
            s.calibration_runs = parse_number<std::size_t>(key, value);
        } else if (key == "calibration_quantile") {
            s.calibration_quantile = parse_number<double>(key, value);
        } else if (key == "calibration_safety") {
            s.calibration_safety = parse_number<double>(key, value);
        } else if (key == "calibration_reweighted_safety") {
            s.calibration_reweighted_safety = parse_number<double>(key, value);
        } else if (key == "smoother") {
            s.smoother = parse_bool(key, value);
        } else if (key == "threads") {
            s.threads = parse_number<std::size_t>(key, value);
        } else if (key == "timing") {
            s.timing = parse_bool(key, value);
        } else {
            selfpen::fail(selfpen::ErrorCode::kInvalidArgument, "unknown experiment option '" + key + "'");
        }
        s.validate();
        e->spec = std::move(s);
        e->result.reset();
    });
}

sp_status sp_experiment_run(sp_experiment* e) {
    return guarded([&] {
        require_ptr(e, "experiment");
        e->result = selfpen::run_experiment(e->spec);
    });
}

namespace {

const selfpen::ExperimentResult& ran(const sp_experiment* e) {
    require_ptr(e, "experiment");
    selfpen::require(e->result.has_value(), selfpen::ErrorCode::kInvalidArgument, "experiment has not been run");
    return *e->result;
}

}  // namespace

sp_status sp_experiment_metrics_csv(const sp_experiment* e, char** out) {
    return guarded([&] {
        require_ptr(out, "output string");
        *out = copy_string(selfpen::metrics_csv(ran(e).rows));
    });
}

sp_status sp_experiment_raw_csv(const sp_experiment* e, char** out) {
    return guarded([&] {
        require_ptr(out, "output string");
        const std::string label = e->spec.name + ":" + selfpen::to_string(e->spec.objective);
        *out = copy_string(selfpen::raw_csv(label, ran(e).raw));
    });
}

sp_status sp_experiment_exact(const sp_experiment* e, size_t i, double* out) {
    return guarded([&] {
        require_ptr(out, "output");
        const auto& rows = ran(e).rows;
        selfpen::require(i < rows.size(), selfpen::ErrorCode::kInvalidArgument, "row index out of range");
        *out = rows[i].exact;
    });
}

size_t sp_experiment_rows(const sp_experiment* e) {
    return e == nullptr || !e->result ? 0 : e->result->rows.size();
}

void sp_experiment_free(sp_experiment* e) { delete e; }

sp_status sp_validation_run(const char* filter, uint64_t seed, sp_validation** out) {
    return guarded([&] {
        require_ptr(out, "output handle");
        selfpen::ValidationOptions opt;
        opt.filter = filter == nullptr ? "" : filter;
        opt.seed = seed;
        *out = new sp_validation{selfpen::run_validation(opt)};
    });
}

size_t sp_validation_count(const sp_validation* v) { return v == nullptr ? 0 : v->results.size(); }

sp_status sp_validation_get(const sp_validation* v, size_t i, sp_property* out) {
    return guarded([&] {
        require_ptr(v, "validation");
        require_ptr(out, "output");
        selfpen::require(i < v->results.size(), selfpen::ErrorCode::kInvalidArgument, "property index out of range");
        const selfpen::PropertyResult& r = v->results[i];
        *out = sp_property{r.suite.c_str(), r.name.c_str(), r.passed ? 1 : 0, r.measured,
                           r.tolerance,     r.instances,    r.detail.c_str()};
    });
}

void sp_validation_free(sp_validation* v) { delete v; }

sp_status sp_gradcheck(const char* target, size_t instances, size_t points, uint64_t seed, sp_gradcheck_result* out) {
    return guarded([&] {
        require_ptr(target, "target");
        require_ptr(out, "output");
        const selfpen::Method m = selfpen::method_from_string(target);
        selfpen::GradcheckOptions opt{instances, points, seed};
        const selfpen::GradcheckResult r = selfpen::run_gradcheck(
            m == selfpen::Method::kMl ? selfpen::GradcheckTarget::kMl : selfpen::GradcheckTarget::kKrr, opt);
        *out = sp_gradcheck_result{r.evaluations, r.max_relative_error, r.tolerance, r.passed ? 1 : 0};
    });
}

}  // extern "C"
