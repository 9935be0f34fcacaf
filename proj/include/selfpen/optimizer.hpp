#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "selfpen/kernel.hpp"
#include "selfpen/objectives.hpp"

namespace selfpen {

struct PgdConfig {
    double stepsize = 1.0;
    std::size_t max_iters = 500;
    // Stop once |beta(k+1) - beta(k)|_inf / stepsize <= grad_tol.
    double grad_tol = 1e-8;
    std::size_t record_every = 1;

    void validate() const;
};

struct Iterate {
    std::size_t step = 0;
    Vector beta;
    double value = 0.0;
    double grad_inf_norm = 0.0;
    IndexSet support;
};

struct Trajectory {
    std::vector<Iterate> iterates;
    Weights terminal;
    double terminal_value = 0.0;
    bool converged = false;
    std::size_t iters_used = 0;
};

/// Euclidean projection onto {0 <= v_i <= M} with v_i = M for pinned i.
/// Negative entries map to an exact 0.0.
Vector project_box(const Vector& v, double box_bound, const IndexSet& pinned);

/// beta(k+1) = project_box(beta(k) - stepsize * grad F(beta(k))).
///
/// Every step is recorded when record_every == 1; the terminal iterate is
/// always recorded. A non-finite objective value or gradient aborts with
/// ErrorCode::kNumericalFailure.
Trajectory pgd_run(const Objective& objective, const Weights& beta0, const PgdConfig& cfg);

/// Largest |grad F(b) - grad F(b')|_inf / |b - b'|_1 over all sample pairs.
double lipschitz_guard(const Objective& objective, std::span<const Vector> samples);

/// min(1, 0.5 / L) with L from lipschitz_guard; 1 when L == 0.
double safeguarded_stepsize(double lipschitz_estimate);

/// Stepsize for a run started at `center`: min(cap, safeguarded_stepsize(L))
/// with L estimated from `center` and `extra` points drawn uniformly from
/// [0, 2 center] coordinatewise (clipped to the box). Deterministic in seed.
double guarded_stepsize(const Objective& objective, const Vector& center, double box_bound, double cap,
                        std::size_t extra, std::uint64_t seed);

}  // namespace selfpen
