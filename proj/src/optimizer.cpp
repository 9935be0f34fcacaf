#include "selfpen/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>
#include <string>

namespace selfpen {

void PgdConfig::validate() const {
    require(std::isfinite(stepsize) && stepsize > 0.0, ErrorCode::kInvalidArgument, "stepsize must be positive");
    require(max_iters >= 1, ErrorCode::kInvalidArgument, "max_iters must be at least 1");
    require(std::isfinite(grad_tol) && grad_tol > 0.0, ErrorCode::kInvalidArgument, "grad_tol must be positive");
    require(record_every >= 1, ErrorCode::kInvalidArgument, "record_every must be at least 1");
}

Vector project_box(const Vector& v, double box_bound, const IndexSet& pinned) {
    require(box_bound > 0.0, ErrorCode::kInvalidArgument, "box bound M must be positive");
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double x = v[i];
        // NaN falls through to 0 here; pgd_run rejects non-finite gradients first.
        out[i] = x > 0.0 ? std::min(x, box_bound) : 0.0;
    }
    for (std::size_t j : pinned) {
        require(j < static_cast<std::size_t>(v.size()), ErrorCode::kInvalidArgument, "pinned index out of range");
        out[static_cast<Eigen::Index>(j)] = box_bound;
    }
    return out;
}

namespace {

Evaluation checked_eval(const Objective& objective, const Vector& beta, std::size_t step) {
    Evaluation e = objective(beta);
    require(static_cast<Eigen::Index>(e.gradient.size()) == beta.size(), ErrorCode::kDimensionMismatch,
            "objective returned a gradient of the wrong length");
    if (!std::isfinite(e.value) || !e.gradient.allFinite()) {
        fail(ErrorCode::kNumericalFailure, "non-finite objective or gradient at step " + std::to_string(step));
    }
    return e;
}

Iterate make_iterate(std::size_t step, const Vector& beta, const Evaluation& e) {
    return Iterate{step, beta, e.value, e.gradient.size() > 0 ? e.gradient.cwiseAbs().maxCoeff() : 0.0, support_of(beta)};
}

}  // namespace

Trajectory pgd_run(const Objective& objective, const Weights& beta0, const PgdConfig& cfg) {
    cfg.validate();
    const double M = beta0.box_bound();
    const IndexSet& pinned = beta0.pinned();

    Vector beta = beta0.beta();
    Trajectory traj{{}, beta0, 0.0, false, 0};
    Evaluation e = checked_eval(objective, beta, 0);
    std::size_t k = 0;
    while (k < cfg.max_iters) {
        if (k % cfg.record_every == 0) traj.iterates.push_back(make_iterate(k, beta, e));
        Vector next = project_box(beta - cfg.stepsize * e.gradient, M, pinned);
        const double step_norm = (next - beta).cwiseAbs().maxCoeff() / cfg.stepsize;
        beta = std::move(next);
        ++k;
        e = checked_eval(objective, beta, k);
        if (step_norm <= cfg.grad_tol) {
            traj.converged = true;
            break;
        }
    }
    traj.iters_used = k;
    if (traj.iterates.empty() || traj.iterates.back().step != k) traj.iterates.push_back(make_iterate(k, beta, e));
    traj.terminal = Weights(beta, M, pinned);
    traj.terminal_value = e.value;
    return traj;
}

double lipschitz_guard(const Objective& objective, std::span<const Vector> samples) {
    require(samples.size() >= 2, ErrorCode::kInvalidArgument, "lipschitz_guard needs at least two samples");
    std::vector<Vector> grads;
    grads.reserve(samples.size());
    for (const Vector& b : samples) grads.push_back(objective(b).gradient);
    double best = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const double db = (samples[i] - samples[j]).lpNorm<1>();
            if (db == 0.0) continue;
            best = std::max(best, (grads[i] - grads[j]).lpNorm<Eigen::Infinity>() / db);
        }
    }
    return best;
}

double safeguarded_stepsize(double lipschitz_estimate) {
    if (!(lipschitz_estimate > 0.0)) return 1.0;
    return std::min(1.0, 0.5 / lipschitz_estimate);
}

double guarded_stepsize(const Objective& objective, const Vector& center, double box_bound, double cap,
                        std::size_t extra, std::uint64_t seed) {
    require(std::isfinite(cap) && cap > 0.0, ErrorCode::kInvalidArgument, "stepsize cap must be positive");
    require(extra >= 1, ErrorCode::kInvalidArgument, "guarded_stepsize needs at least one extra sample");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    std::vector<Vector> samples{center};
    for (std::size_t s = 0; s < extra; ++s) {
        Vector b(center.size());
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = std::min(box_bound, unif(rng) * center[i]);
        samples.push_back(std::move(b));
    }
    return std::min(cap, safeguarded_stepsize(lipschitz_guard(objective, samples)));
}

}  // namespace selfpen
