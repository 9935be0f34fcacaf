#pragma once

#include <functional>

#include "selfpen/dataset.hpp"
#include "selfpen/kernel.hpp"

namespace selfpen {

/// Objective value and gradient with respect to beta at one point.
struct Evaluation {
    double value = 0.0;
    Vector gradient;
};

/// Value-and-gradient closure over a fixed dataset.
using Objective = std::function<Evaluation(const Vector& beta)>;

// ---------------------------------------------------------------------------
// Pairwise sums shared by both kernel objectives. All sums run over ordered
// pairs (i, k) including i == k, i.e. V-statistics of the weighted empirical
// measure. Diagonal pairs contribute h(0) to the value and nothing to the
// gradient.

/// sum_{i,k} w_i w_k a_i a_k h(|x_i - x_k|_{q,beta}^q)
double weighted_kernel_quadratic(const Dataset& d, const Vector& a, const Vector& beta, const KernelSpec& spec);

/// Entry l: sum_{i,k} w_i w_k a_i a_k h'(|x_i - x_k|_{q,beta}^q) |x_il - x_kl|^q
Vector weighted_kernel_derivative(const Dataset& d, const Vector& a, const Vector& beta, const KernelSpec& spec);

// ---------------------------------------------------------------------------
// Metric learning: F(beta) = -E[Y Y' h(|X - X'|_{q,beta}^q)].

double f_ml_value(const Dataset& d, const Vector& beta, const KernelSpec& spec);
Vector f_ml_gradient(const Dataset& d, const Vector& beta, const KernelSpec& spec);
Evaluation f_ml_evaluate(const Dataset& d, const Vector& beta, const KernelSpec& spec);

// ---------------------------------------------------------------------------
// Kernel ridge regression:
//   F(beta) = min_f 1/2 E[(Y - f(beta^{1/q} x))^2] + lambda/2 |f|_H^2.

struct KrrFit {
    Vector alpha;       // dual coefficients, f = sum_i alpha_i k(x_i, .)
    Vector residual;    // z_i = y_i - (K alpha)_i
    double value = 0.0; // 1/2 sum_i w_i z_i y_i
    double hnorm2 = 0.0;// alpha^T K alpha
    double lambda = 0.0;
};

/// Solves the weighted stationarity condition K W (y - K alpha) = lambda K alpha
/// through the symmetric system (W^1/2 K W^1/2 + lambda I) u = W^1/2 y,
/// alpha = W^1/2 u.
KrrFit krr_fit(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda);
KrrFit krr_fit(const Dataset& d, const Matrix& K, double lambda);

double f_krr_value(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda);

/// -(1 / (2 lambda)) sum_{i,k} w_i w_k z_i z_k h'(d_ik) |x_il - x_kl|^q
Vector f_krr_gradient(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda);
Evaluation f_krr_evaluate(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda);

// ---------------------------------------------------------------------------
// Linear-kernel baseline:
//   F(beta) = min_c 1/2 E[(Y - sum_j beta_j c_j X_j)^2] + lambda/2 |c|^2.

struct LinearFit {
    Vector coef;
    Vector residual;
    Evaluation eval;
};

LinearFit linear_fit(const Dataset& d, const Vector& beta, double lambda);
Evaluation linear_baseline(const Dataset& d, const Vector& beta, double lambda);

// ---------------------------------------------------------------------------

Objective make_ml_objective(Dataset d, KernelSpec spec);
Objective make_krr_objective(Dataset d, KernelSpec spec, double lambda);
Objective make_linear_objective(Dataset d, double lambda);

}  // namespace selfpen
