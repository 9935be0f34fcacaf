#include "selfpen/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace selfpen {

void GenSpec::validate() const {
    require(n >= 2, ErrorCode::kInvalidArgument, "n must be at least 2");
    require(p >= 1, ErrorCode::kInvalidArgument, "p must be at least 1");
    require(std::isfinite(rho) && std::abs(rho) < 1.0, ErrorCode::kInvalidArgument, "AR(1) correlation must satisfy |rho| < 1");
    for (std::size_t s : signal_indices(signal)) {
        require(s < p, ErrorCode::kInvalidArgument, "signal " + to_string(signal) + " needs p >= " + std::to_string(s + 1));
    }
    switch (response) {
        case Response::kClassification:
            require(flip_prob > 0.0 && flip_prob < 1.0, ErrorCode::kInvalidArgument, "flip_prob must lie in (0, 1)");
            break;
        case Response::kRegression:
            require(std::isfinite(noise_sd) && noise_sd >= 0.0, ErrorCode::kInvalidArgument, "noise_sd must be >= 0");
            break;
        case Response::kLogistic:
            require(std::isfinite(link_scale), ErrorCode::kInvalidArgument, "link_scale must be finite");
            break;
    }
}

IndexSet signal_indices(Signal signal) {
    switch (signal) {
        case Signal::kLinear1: return {0};
        case Signal::kCubic2:
        case Signal::kInteraction: return {0, 1};
    }
    return {};
}

double signal_value(Signal signal, std::span<const double> x) {
    switch (signal) {
        case Signal::kLinear1: return x[0];
        case Signal::kCubic2: return x[0] * x[0] * x[0] + x[1] * x[1] * x[1];
        case Signal::kInteraction: return x[0] * x[1];
    }
    return 0.0;
}

Matrix ar1_factor(std::size_t p, double rho) {
    require(std::abs(rho) < 1.0, ErrorCode::kInvalidArgument, "AR(1) correlation must satisfy |rho| < 1");
    const auto P = static_cast<Eigen::Index>(p);
    const double s = std::sqrt(1.0 - rho * rho);
    Matrix L = Matrix::Zero(P, P);
    // x_0 = z_0, x_i = rho x_{i-1} + s z_i
    for (Eigen::Index i = 0; i < P; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double scale = j == 0 ? 1.0 : s;
            L(i, j) = scale * std::pow(rho, static_cast<double>(i - j));
        }
    }
    return L;
}

Matrix ar1_covariance(std::size_t p, double rho) {
    const auto P = static_cast<Eigen::Index>(p);
    Matrix S(P, P);
    for (Eigen::Index i = 0; i < P; ++i) {
        for (Eigen::Index j = 0; j < P; ++j) S(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
    return S;
}

const QuadratureRule& gauss_hermite_64() {
    static const QuadratureRule rule = [] {
        constexpr int kN = 64;
        // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
        Matrix J = Matrix::Zero(kN, kN);
        for (int k = 1; k < kN; ++k) {
            J(k, k - 1) = std::sqrt(static_cast<double>(k));
            J(k - 1, k) = J(k, k - 1);
        }
        const Eigen::SelfAdjointEigenSolver<Matrix> es(J);
        QuadratureRule r;
        for (int k = 0; k < kN; ++k) {
            r.nodes.push_back(es.eigenvalues()[k]);
            const double v = es.eigenvectors()(0, k);
            r.weights.push_back(v * v);
        }
        return r;
    }();
    return rule;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// Law of X_R given X_A for a zero-mean Gaussian vector: mean = B x_A, cov = C.
struct GaussianConditional {
    IndexSet R;
    IndexSet A;
    Matrix B;
    Matrix C;
};

GaussianConditional condition(const Matrix& Sigma, const IndexSet& R, const IndexSet& A) {
    GaussianConditional g{R, A, Matrix::Zero(static_cast<Eigen::Index>(R.size()), static_cast<Eigen::Index>(A.size())), Matrix()};
    const auto nr = static_cast<Eigen::Index>(R.size());
    const auto na = static_cast<Eigen::Index>(A.size());
    Matrix Srr(nr, nr), Sra(nr, na), Saa(na, na);
    for (Eigen::Index i = 0; i < nr; ++i) {
        for (Eigen::Index j = 0; j < nr; ++j) Srr(i, j) = Sigma(static_cast<Eigen::Index>(R[i]), static_cast<Eigen::Index>(R[j]));
        for (Eigen::Index j = 0; j < na; ++j) Sra(i, j) = Sigma(static_cast<Eigen::Index>(R[i]), static_cast<Eigen::Index>(A[j]));
    }
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < na; ++j) Saa(i, j) = Sigma(static_cast<Eigen::Index>(A[i]), static_cast<Eigen::Index>(A[j]));
    }
    if (na == 0) {
        g.C = Srr;
        return g;
    }
    const Eigen::LDLT<Matrix> ldlt(Saa);
    g.B = ldlt.solve(Sra.transpose()).transpose();
    g.C = Srr - g.B * Sra.transpose();
    return g;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// P(f(x) > 0) with x_r ~ N(mean, sd^2) and the other signal coordinate fixed.
// f is monotone in x_r for linear and cubic signals; the interaction signal
// flips orientation with the sign of the other coordinate.
double prob_positive_one(Signal signal, double mean, double sd, double other) {
    switch (signal) {
        case Signal::kLinear1: return normal_cdf(mean / sd);
        case Signal::kCubic2: return normal_cdf((mean + other) / sd);  // x_r^3 + o^3 > 0 <=> x_r > -o
        case Signal::kInteraction:
            if (other == 0.0) return 0.5;
            return other > 0.0 ? normal_cdf(mean / sd) : normal_cdf(-mean / sd);
    }
    return 0.5;
}

ConditionalModel make_oracle(const GenSpec& spec) {
    const Matrix Sigma = ar1_covariance(spec.p, spec.rho);
    const IndexSet S = signal_indices(spec.signal);
    const Signal signal = spec.signal;
    const Response response = spec.response;
    const double flip = spec.flip_prob;
    const double scale = spec.link_scale;

    auto fn = [Sigma, S, signal, response, flip, scale](const RowMatrix& X, const IndexSet& A) {
        const IndexSet R = set_difference(S, A);
        const GaussianConditional g = condition(Sigma, R, A);
        const QuadratureRule& gh = gauss_hermite_64();
        Vector out(X.rows());
        std::vector<double> row(static_cast<std::size_t>(X.cols()));

        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(r, c);
            Vector xa(static_cast<Eigen::Index>(A.size()));
            for (std::size_t j = 0; j < A.size(); ++j) xa[static_cast<Eigen::Index>(j)] = row[A[j]];
            const Vector mean = g.B * xa;

            if (response == Response::kLogistic) {
                auto link = [&](std::vector<double>& x) { return sigmoid(scale * signal_value(signal, x)); };
                double prob = 0.0;
                if (R.empty()) {
                    prob = link(row);
                } else if (R.size() == 1) {
                    const double sd = std::sqrt(g.C(0, 0));
                    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                        row[R[0]] = mean[0] + sd * gh.nodes[k];
                        prob += gh.weights[k] * link(row);
                    }
                } else {
                    const Eigen::LLT<Matrix> llt(g.C);
                    const Matrix L = llt.matrixL();
                    for (std::size_t a = 0; a < gh.nodes.size(); ++a) {
                        for (std::size_t b = 0; b < gh.nodes.size(); ++b) {
                            row[R[0]] = mean[0] + L(0, 0) * gh.nodes[a];
                            row[R[1]] = mean[1] + L(1, 0) * gh.nodes[a] + L(1, 1) * gh.nodes[b];
                            prob += gh.weights[a] * gh.weights[b] * link(row);
                        }
                    }
                }
                out[r] = prob;
                continue;
            }

            double pos = 0.0;
            if (R.empty()) {
                const double f = signal_value(signal, row);
                pos = f > 0.0 ? 1.0 : (f < 0.0 ? 0.0 : 0.5);
            } else if (R.size() == 1) {
                const std::size_t other = S.size() > 1 ? (R[0] == S[0] ? S[1] : S[0]) : R[0];
                const double o = S.size() > 1 ? row[other] : 0.0;
                pos = prob_positive_one(signal, mean[0], std::sqrt(g.C(0, 0)), o);
            } else {
                // Outer quadrature over the first remaining coordinate, closed
                // form for the second given the first.
                const double sd0 = std::sqrt(g.C(0, 0));
                const double slope = g.C(1, 0) / g.C(0, 0);
                const double sd1 = std::sqrt(std::max(g.C(1, 1) - g.C(1, 0) * slope, 0.0));
                for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                    const double x0 = mean[0] + sd0 * gh.nodes[k];
                    const double m1 = mean[1] + slope * (x0 - mean[0]);
                    pos += gh.weights[k] * prob_positive_one(signal, m1, sd1, x0);
                }
            }
            out[r] = flip + (1.0 - 2.0 * flip) * pos;
        }
        return out;
    };
    return ConditionalModel::oracle(std::move(fn));
}

Generated generate_impl(const GenSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);
    const double s = std::sqrt(1.0 - spec.rho * spec.rho);
    RowMatrix X(n, p);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double prev = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double z = normal(rng);
            prev = j == 0 ? z : spec.rho * prev + s * z;
            X(i, j) = prev;
        }
        const double f = signal_value(spec.signal, row_span(X, i));
        switch (spec.response) {
            case Response::kClassification: {
                const double sign = f >= 0.0 ? 1.0 : -1.0;
                y[i] = unif(rng) < spec.flip_prob ? -sign : sign;
                break;
            }
            case Response::kRegression: y[i] = f + spec.noise_sd * normal(rng); break;
            case Response::kLogistic: y[i] = unif(rng) < sigmoid(spec.link_scale * f) ? 1.0 : -1.0; break;
        }
    }

    Truth truth{signal_indices(spec.signal), std::nullopt};
    if (spec.response != Response::kRegression) truth.oracle = make_oracle(spec);
    return Generated{Dataset(std::move(X), std::move(y)), std::move(truth)};
}

}  // namespace

Generated generate(const GenSpec& spec) { return generate_impl(spec); }

Generated logistic_generate(const GenSpec& spec) {
    require(spec.response == Response::kLogistic, ErrorCode::kInvalidArgument, "logistic_generate needs a logistic response");
    return generate_impl(spec);
}

std::string to_string(Signal s) {
    switch (s) {
        case Signal::kLinear1: return "linear-1";
        case Signal::kCubic2: return "cubic-2";
        case Signal::kInteraction: return "interaction";
    }
    return "?";
}

std::string to_string(Response r) {
    switch (r) {
        case Response::kClassification: return "classification";
        case Response::kRegression: return "regression";
        case Response::kLogistic: return "logistic";
    }
    return "?";
}

Signal signal_from_string(const std::string& s) {
    if (s == "linear-1") return Signal::kLinear1;
    if (s == "cubic-2") return Signal::kCubic2;
    if (s == "interaction") return Signal::kInteraction;
    fail(ErrorCode::kInvalidArgument, "unknown signal '" + s + "' (expected linear-1, cubic-2 or interaction)");
}

Response response_from_string(const std::string& s) {
    if (s == "classification") return Response::kClassification;
    if (s == "regression") return Response::kRegression;
    if (s == "logistic") return Response::kLogistic;
    fail(ErrorCode::kInvalidArgument, "unknown response '" + s + "' (expected classification, regression or logistic)");
}

}  // namespace selfpen
