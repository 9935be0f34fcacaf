#include "selfpen/objectives.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

namespace selfpen {

namespace {

void check_beta(const Dataset& d, const Vector& beta) {
    require(static_cast<std::size_t>(beta.size()) == d.p(), ErrorCode::kDimensionMismatch,
            "beta has length " + std::to_string(beta.size()) + " but the dataset has " + std::to_string(d.p()) + " features");
    require(beta.allFinite() && (beta.array() >= 0.0).all(), ErrorCode::kInvalidArgument, "beta must be finite and nonnegative");
}

void check_lambda(double lambda) {
    require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::kInvalidArgument, "ridge parameter lambda must be positive");
}

// Scratch storage reused across evaluations on the same thread. Matrices of
// this size come straight from mmap, so fresh allocations per call cost more
// in page faults than the arithmetic.
struct Workspace {
    // Strict lower triangle, packed column by column: pair (i, k) with
    // i > k sits at offset(k) + (i - k - 1).
    Eigen::ArrayXd dist;
    Eigen::ArrayXd h;
    Eigen::ArrayXd hp;
    Eigen::ArrayXd scratch;
    double h0 = 0.0;
    Eigen::Index n = 0;
    Matrix K;
    Matrix A;
    Eigen::LLT<Matrix> llt;
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

void pair_terms(const RowMatrix& X, const Vector& beta, const KernelSpec& spec, bool with_derivative, Workspace& ws) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Exponent q = spec.q();
    std::vector<Eigen::Index> active;
    for (Eigen::Index l = 0; l < p; ++l) {
        if (beta[l] != 0.0) active.push_back(l);
    }
    ws.n = n;
    ws.h0 = spec.h0();
    ws.dist.resize(n * (n - 1) / 2);
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double* xk = X.data() + k * p;
        for (Eigen::Index i = k + 1; i < n; ++i, ++m) {
            const double* xi = X.data() + i * p;
            double s = 0.0;
            for (Eigen::Index l : active) s += beta[l] * pow_q(std::abs(xi[l] - xk[l]), q);
            ws.dist[m] = s;
        }
    }

    const auto& atoms = spec.atoms();
    ws.h.resize(ws.dist.size());
    if (with_derivative) ws.hp.resize(ws.dist.size());
    if (atoms.size() == 1) {
        const Atom& a = atoms.front();
        ws.h = a.mass * (-a.rate * ws.dist).exp();
        if (with_derivative) ws.hp = -a.rate * ws.h;
        return;
    }
    ws.h.setZero();
    if (with_derivative) ws.hp.setZero();
    ws.scratch.resize(ws.dist.size());
    for (const Atom& a : atoms) {
        ws.scratch = a.mass * (-a.rate * ws.dist).exp();
        ws.h += ws.scratch;
        if (with_derivative) ws.hp -= a.rate * ws.scratch;
    }
}

// Symmetric kernel matrix from the packed lower triangle.
const Matrix& full_kernel(Workspace& ws) {
    const Eigen::Index n = ws.n;
    ws.K.resize(n, n);
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        ws.K(k, k) = ws.h0;
        for (Eigen::Index i = k + 1; i < n; ++i, ++m) {
            ws.K(i, k) = ws.h[m];
            ws.K(k, i) = ws.h[m];
        }
    }
    return ws.K;
}

// sum_{i,k} c_i c_k h(D_ik), diagonal included.
double quadratic_form(const Workspace& ws, const Vector& c) {
    double off = 0.0;
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < ws.n; ++k) {
        double inner = 0.0;
        for (Eigen::Index i = k + 1; i < ws.n; ++i, ++m) inner += c[i] * ws.h[m];
        off += c[k] * inner;
    }
    return 2.0 * off + ws.h0 * c.squaredNorm();
}

// Entry l: sum_{i,k} c_i c_k h'(D_ik) |x_il - x_kl|^q.
Vector derivative_form(const RowMatrix& X, const Workspace& ws, const Vector& c, Exponent q) {
    const Eigen::Index p = X.cols();
    Vector g = Vector::Zero(p);
    double* out = g.data();
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < ws.n; ++k) {
        const double* xk = X.data() + k * p;
        const double ck = c[k];
        for (Eigen::Index i = k + 1; i < ws.n; ++i, ++m) {
            const double coef = ck * c[i] * ws.hp[m];
            if (coef == 0.0) continue;
            const double* xi = X.data() + i * p;
            for (Eigen::Index l = 0; l < p; ++l) out[l] += coef * pow_q(std::abs(xi[l] - xk[l]), q);
        }
    }
    return 2.0 * g;
}

void pair_sums(const Dataset& d, const Vector& a, const Vector& beta, const KernelSpec& spec, double* value, Vector* grad) {
    Workspace& ws = workspace();
    pair_terms(d.X(), beta, spec, grad != nullptr, ws);
    const Vector wa = d.weights().cwiseProduct(a);
    if (value != nullptr) *value = quadratic_form(ws, wa);
    if (grad != nullptr) *grad = derivative_form(d.X(), ws, wa, spec.q());
}

KrrFit solve_krr(const Dataset& d, const Matrix& K, double lambda, Workspace& ws) {
    const Eigen::Index n = static_cast<Eigen::Index>(d.n());
    require(K.rows() == n && K.cols() == n, ErrorCode::kDimensionMismatch, "kernel matrix does not match the dataset");

    const Vector sw = d.weights().cwiseSqrt();
    ws.A.noalias() = sw.asDiagonal() * K * sw.asDiagonal();
    ws.A.diagonal().array() += lambda;
    ws.llt.compute(ws.A);
    require(ws.llt.info() == Eigen::Success, ErrorCode::kNumericalFailure, "kernel ridge system is not positive definite");
    const Vector u = ws.llt.solve(sw.cwiseProduct(d.y()));
    require(u.allFinite(), ErrorCode::kNumericalFailure, "kernel ridge solve produced non-finite coefficients");

    KrrFit fit;
    fit.lambda = lambda;
    fit.alpha = sw.cwiseProduct(u);
    Vector fitted(n);
    fitted.noalias() = K.selfadjointView<Eigen::Lower>() * fit.alpha;
    fit.residual = d.y() - fitted;
    fit.value = 0.5 * d.weights().dot(fit.residual.cwiseProduct(d.y()));
    fit.hnorm2 = std::max(0.0, fit.alpha.dot(fitted));
    return fit;
}

}  // namespace

double weighted_kernel_quadratic(const Dataset& d, const Vector& a, const Vector& beta, const KernelSpec& spec) {
    check_beta(d, beta);
    require(static_cast<std::size_t>(a.size()) == d.n(), ErrorCode::kDimensionMismatch, "coefficient vector has wrong length");
    double v = 0.0;
    pair_sums(d, a, beta, spec, &v, nullptr);
    return v;
}

Vector weighted_kernel_derivative(const Dataset& d, const Vector& a, const Vector& beta, const KernelSpec& spec) {
    check_beta(d, beta);
    require(static_cast<std::size_t>(a.size()) == d.n(), ErrorCode::kDimensionMismatch, "coefficient vector has wrong length");
    Vector g;
    pair_sums(d, a, beta, spec, nullptr, &g);
    return g;
}

Evaluation f_ml_evaluate(const Dataset& d, const Vector& beta, const KernelSpec& spec) {
    require_binary_labels(d, "metric learning objective");
    check_beta(d, beta);
    Evaluation e;
    pair_sums(d, d.y(), beta, spec, &e.value, &e.gradient);
    e.value = -e.value;
    e.gradient = -e.gradient;
    return e;
}

double f_ml_value(const Dataset& d, const Vector& beta, const KernelSpec& spec) {
    require_binary_labels(d, "metric learning objective");
    check_beta(d, beta);
    double v = 0.0;
    pair_sums(d, d.y(), beta, spec, &v, nullptr);
    return -v;
}

Vector f_ml_gradient(const Dataset& d, const Vector& beta, const KernelSpec& spec) {
    return f_ml_evaluate(d, beta, spec).gradient;
}

KrrFit krr_fit(const Dataset& d, const Matrix& K, double lambda) {
    check_lambda(lambda);
    return solve_krr(d, K, lambda, workspace());
}

KrrFit krr_fit(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda) {
    check_lambda(lambda);
    check_beta(d, beta);
    Workspace& ws = workspace();
    pair_terms(d.X(), beta, spec, false, ws);
    return solve_krr(d, full_kernel(ws), lambda, ws);
}

double f_krr_value(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda) {
    return krr_fit(d, beta, spec, lambda).value;
}

Evaluation f_krr_evaluate(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda) {
    check_lambda(lambda);
    check_beta(d, beta);
    Workspace& ws = workspace();
    pair_terms(d.X(), beta, spec, true, ws);
    const KrrFit fit = solve_krr(d, full_kernel(ws), lambda, ws);
    const Vector wz = d.weights().cwiseProduct(fit.residual);
    Evaluation e;
    e.value = fit.value;
    e.gradient = (-0.5 / lambda) * derivative_form(d.X(), ws, wz, spec.q());
    return e;
}

Vector f_krr_gradient(const Dataset& d, const Vector& beta, const KernelSpec& spec, double lambda) {
    return f_krr_evaluate(d, beta, spec, lambda).gradient;
}

LinearFit linear_fit(const Dataset& d, const Vector& beta, double lambda) {
    check_lambda(lambda);
    check_beta(d, beta);
    const Matrix Xb = d.X() * beta.asDiagonal();
    const Vector& w = d.weights();
    Matrix G = Xb.transpose() * w.asDiagonal() * Xb;
    G.diagonal().array() += lambda;
    const Eigen::LLT<Matrix> llt(G);
    require(llt.info() == Eigen::Success, ErrorCode::kNumericalFailure, "linear ridge system is not positive definite");

    LinearFit fit;
    fit.coef = llt.solve(Xb.transpose() * w.cwiseProduct(d.y()));
    fit.residual = d.y() - Xb * fit.coef;
    fit.eval.value = 0.5 * w.dot(fit.residual.cwiseAbs2()) + 0.5 * lambda * fit.coef.squaredNorm();
    // Envelope theorem at the optimal coefficients c*(beta):
    // dF/dbeta_j = -c_j E[X_j z].
    const Vector xz = d.X().transpose() * w.cwiseProduct(fit.residual);
    fit.eval.gradient = -fit.coef.cwiseProduct(xz);
    return fit;
}

Evaluation linear_baseline(const Dataset& d, const Vector& beta, double lambda) { return linear_fit(d, beta, lambda).eval; }

Objective make_ml_objective(Dataset d, KernelSpec spec) {
    require_binary_labels(d, "metric learning objective");
    return [d = std::move(d), spec = std::move(spec)](const Vector& beta) { return f_ml_evaluate(d, beta, spec); };
}

Objective make_krr_objective(Dataset d, KernelSpec spec, double lambda) {
    check_lambda(lambda);
    return [d = std::move(d), spec = std::move(spec), lambda](const Vector& beta) {
        return f_krr_evaluate(d, beta, spec, lambda);
    };
}

Objective make_linear_objective(Dataset d, double lambda) {
    check_lambda(lambda);
    return [d = std::move(d), lambda](const Vector& beta) { return linear_baseline(d, beta, lambda); };
}

}  // namespace selfpen
