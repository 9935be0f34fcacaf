#include "selfpen/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>

#include "selfpen/objectives.hpp"

namespace selfpen {

Dataset reweight(const Dataset& d, const IndexSet& A, const ConditionalModel& cm) {
    require_binary_labels(d, "reweight");
    for (std::size_t a : A) require(a < d.p(), ErrorCode::kInvalidArgument, "reweight: index out of range");
    const Vector prob_pos = cm.probabilities(d.X(), A);
    Vector w(static_cast<Eigen::Index>(d.n()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double opposite = d.y()[i] > 0.0 ? 1.0 - prob_pos[i] : prob_pos[i];
        w[i] = d.weights()[i] * opposite;
    }
    const double total = w.sum();
    require(total > 0.0, ErrorCode::kNumericalFailure, "reweight: every sample received zero weight");
    w /= total;
    return d.with_weights(std::move(w));
}

Dataset balance_labels(const Dataset& d) {
    require_binary_labels(d, "balance_labels");
    double pos = 0.0;
    double neg = 0.0;
    for (Eigen::Index i = 0; i < d.y().size(); ++i) (d.y()[i] > 0.0 ? pos : neg) += d.weights()[i];
    require(pos > 0.0 && neg > 0.0, ErrorCode::kInvalidArgument, "balance_labels: both classes need positive weight");
    Vector w = d.weights();
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= 0.5 / (d.y()[i] > 0.0 ? pos : neg);
    w /= w.sum();
    return d.with_weights(std::move(w));
}

namespace {

Vector default_init(std::size_t p) { return Vector::Constant(static_cast<Eigen::Index>(p), 1.0 / static_cast<double>(p)); }

Vector pinned_point(std::size_t p, const IndexSet& S, double M) {
    Vector b = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t j : S) b[static_cast<Eigen::Index>(j)] = M;
    return b;
}

// The i == k terms of F^ML add -h(0) sum_i w_i^2 whatever beta is. The test
// threshold absorbs this constant so that it compares only the cross terms.
double diagonal_offset(const Dataset& d, const KernelSpec& spec) { return spec.h0() * d.weights().squaredNorm(); }

void require_eps(double eps) {
    require(std::isfinite(eps) && eps > 0.0, ErrorCode::kInvalidArgument, "selection threshold eps must be positive");
}

Vector checked_init(const std::optional<Vector>& beta0, std::size_t p) {
    if (!beta0) return default_init(p);
    require(static_cast<std::size_t>(beta0->size()) == p, ErrorCode::kDimensionMismatch, "initializer has the wrong length");
    return *beta0;
}

}  // namespace

SelectionResult select_metric_learning(const Dataset& d, const ConditionalModel& cm, const MlSelectionOptions& opt) {
    require_binary_labels(d, "metric learning selection");
    require_eps(opt.eps);
    if (opt.eps_reweighted) require_eps(*opt.eps_reweighted);
    const Vector init = checked_init(opt.beta0, d.p());
    require((init.array() > 0.0).all(), ErrorCode::kInvalidArgument, "metric learning needs a full-support initializer");
    const Weights beta0(init, opt.box_bound);

    SelectionResult result;
    for (std::size_t round = 0; round < d.p(); ++round) {
        Dataset tilted = reweight(d, result.selected, cm);
        if (opt.balance_classes) tilted = balance_labels(tilted);
        Trajectory traj = pgd_run(make_ml_objective(tilted, opt.kernel), beta0, opt.pgd);
        SelectionRound r;
        r.round = round;
        r.candidate = traj.terminal.support();
        r.statistic = -traj.terminal_value;
        const double level = round == 0 ? opt.eps : opt.eps_reweighted.value_or(opt.eps);
        r.threshold = level + diagonal_offset(tilted, opt.kernel);
        r.accepted = r.statistic > r.threshold;
        r.trajectory = std::move(traj);
        const IndexSet grown = set_union(result.selected, r.candidate);
        const bool accepted = r.accepted;
        result.rounds.push_back(std::move(r));
        if (!accepted || grown == result.selected) break;
        result.selected = grown;
    }
    return result;
}

SelectionResult select_krr(const Dataset& d, const KrrSelectionOptions& opt) {
    require_eps(opt.eps);
    require(opt.lambda > 0.0, ErrorCode::kInvalidArgument, "lambda must be positive");
    const Vector first_init = checked_init(opt.beta0, d.p());
    const Objective objective = make_krr_objective(d, opt.kernel, opt.lambda);

    SelectionResult result;
    for (std::size_t round = 0; round < d.p(); ++round) {
        const Vector star = pinned_point(d.p(), result.selected, opt.box_bound);
        Vector init = result.selected.empty() ? first_init : star;
        const Weights beta0(std::move(init), opt.box_bound, result.selected);
        Trajectory traj = pgd_run(objective, beta0, opt.pgd);

        SelectionRound r;
        r.round = round;
        r.candidate = traj.terminal.support();
        r.statistic = f_krr_value(d, star, opt.kernel, opt.lambda) - traj.terminal_value;
        r.threshold = opt.eps;
        r.accepted = r.statistic > opt.eps;
        r.trajectory = std::move(traj);
        const IndexSet grown = set_union(result.selected, r.candidate);
        const bool accepted = r.accepted;
        result.rounds.push_back(std::move(r));
        if (!accepted || grown == result.selected) break;
        result.selected = grown;
    }
    return result;
}

namespace {

double order_statistic(std::vector<double> values, double quantile) {
    std::sort(values.begin(), values.end());
    // ceil(quantile * count), 1-based.
    const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::size_t common_size(std::span<const Dataset> pool) {
    require(!pool.empty(), ErrorCode::kInvalidArgument, "calibration needs at least one dataset");
    const std::size_t n = pool.front().n();
    const std::size_t p = pool.front().p();
    for (const Dataset& d : pool) {
        require(d.n() == n && d.p() == p, ErrorCode::kDimensionMismatch, "calibration datasets differ in shape");
    }
    return n;
}

// Draws a permutation and applies it to labels and weights together, which
// keeps the weight profile while breaking any link between (y, w) and X.
Dataset permuted(const Dataset& d, std::mt19937_64& rng) {
    std::vector<Eigen::Index> perm(d.n());
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector y(static_cast<Eigen::Index>(d.n()));
    Vector w(static_cast<Eigen::Index>(d.n()));
    for (std::size_t i = 0; i < d.n(); ++i) {
        y[static_cast<Eigen::Index>(i)] = d.y()[perm[i]];
        w[static_cast<Eigen::Index>(i)] = d.weights()[perm[i]];
    }
    return Dataset(d.X(), std::move(y), std::move(w));
}

void set_level(ThresholdCalibration& cal, const CalibrationOptions& copt, std::size_t n) {
    const double level = std::max(0.0, order_statistic(cal.null_statistics, copt.quantile));
    const double root_n = std::sqrt(static_cast<double>(n));
    cal.eps = copt.safety * level;
    if (!(cal.eps > 0.0)) cal.eps = std::numeric_limits<double>::min();
    cal.constant = cal.eps * root_n;
    cal.eps_reweighted = cal.eps;
    if (!cal.reweighted_null_statistics.empty()) {
        const double later = std::max(0.0, order_statistic(cal.reweighted_null_statistics, copt.quantile));
        cal.eps_reweighted = std::max(cal.eps, copt.reweighted_safety * later);
    }
}

double ml_null_statistic(const Dataset& null, const Weights& beta0, const MlSelectionOptions& opt) {
    return -pgd_run(make_ml_objective(null, opt.kernel), beta0, opt.pgd).terminal_value - diagonal_offset(null, opt.kernel);
}

}  // namespace

void CalibrationOptions::validate() const {
    require(runs >= 1, ErrorCode::kInvalidArgument, "calibration needs at least one null run");
    require(std::isfinite(safety) && safety > 0.0, ErrorCode::kInvalidArgument, "calibration safety factor must be positive");
    require(quantile > 0.0 && quantile <= 1.0, ErrorCode::kInvalidArgument, "calibration quantile must lie in (0, 1]");
    require(std::isfinite(reweighted_safety) && reweighted_safety > 0.0, ErrorCode::kInvalidArgument,
            "later-round safety factor must be positive");
}

ThresholdCalibration calibrate_ml_threshold(std::span<const Dataset> pool, std::span<const ConditionalModel> conditionals,
                                            const MlSelectionOptions& opt, const CalibrationOptions& copt,
                                            const std::optional<IndexSet>& null_tilt) {
    copt.validate();
    const std::size_t n = common_size(pool);
    for (const Dataset& d : pool) require_binary_labels(d, "metric learning calibration");
    require(conditionals.empty() || conditionals.size() == pool.size(), ErrorCode::kDimensionMismatch,
            "need one conditional model per calibration dataset");
    require(!null_tilt || !conditionals.empty(), ErrorCode::kInvalidArgument, "a null tilt needs conditional models");
    const Weights beta0(checked_init(opt.beta0, pool.front().p()), opt.box_bound);
    auto prepare = [&](Dataset d) { return opt.balance_classes ? balance_labels(d) : d; };

    std::mt19937_64 rng(copt.seed);
    ThresholdCalibration cal;
    for (std::size_t r = 0; r < copt.runs; ++r) {
        const std::size_t c = r % pool.size();
        const Dataset& d = pool[c];
        cal.null_statistics.push_back(ml_null_statistic(prepare(permuted(d, rng)), beta0, opt));
        if (conditionals.empty()) continue;
        if (null_tilt) {
            // Tilting by a set that contains every signal leaves y independent
            // of X. Only a support reaching outside that set could grow the
            // selection, so other outcomes count as zero.
            const Dataset tilted = prepare(reweight(d, *null_tilt, conditionals[c]));
            const Trajectory traj = pgd_run(make_ml_objective(tilted, opt.kernel), beta0, opt.pgd);
            const bool grows = set_union(*null_tilt, traj.terminal.support()) != *null_tilt;
            cal.reweighted_null_statistics.push_back(
                grows ? -traj.terminal_value - diagonal_offset(tilted, opt.kernel) : 0.0);
            continue;
        }
        // Without a known null tilt: tilt by the first-round support found on
        // the real labels, then permute labels and weights together.
        const Dataset first = prepare(reweight(d, {}, conditionals[c]));
        const IndexSet support = pgd_run(make_ml_objective(first, opt.kernel), beta0, opt.pgd).terminal.support();
        if (support.empty()) continue;
        const Dataset tilted = prepare(reweight(d, support, conditionals[c]));
        cal.reweighted_null_statistics.push_back(ml_null_statistic(permuted(tilted, rng), beta0, opt));
    }
    set_level(cal, copt, n);
    return cal;
}

ThresholdCalibration calibrate_krr_threshold(std::span<const Dataset> pool, const KrrSelectionOptions& opt,
                                             const CalibrationOptions& copt) {
    copt.validate();
    const std::size_t n = common_size(pool);
    const Weights beta0(checked_init(opt.beta0, pool.front().p()), opt.box_bound);
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(pool.front().p()));
    std::mt19937_64 rng(copt.seed);
    ThresholdCalibration cal;
    for (std::size_t r = 0; r < copt.runs; ++r) {
        const Dataset null = permuted(pool[r % pool.size()], rng);
        const double start = f_krr_value(null, zero, opt.kernel, opt.lambda);
        cal.null_statistics.push_back(start -
                                      pgd_run(make_krr_objective(null, opt.kernel, opt.lambda), beta0, opt.pgd).terminal_value);
    }
    set_level(cal, copt, n);
    return cal;
}

ThresholdCalibration calibrate_ml_threshold(const Dataset& d, const MlSelectionOptions& opt, const CalibrationOptions& copt) {
    return calibrate_ml_threshold(std::span<const Dataset>(&d, 1), {}, opt, copt);
}

ThresholdCalibration calibrate_krr_threshold(const Dataset& d, const KrrSelectionOptions& opt, const CalibrationOptions& copt) {
    return calibrate_krr_threshold(std::span<const Dataset>(&d, 1), opt, copt);
}

}  // namespace selfpen
