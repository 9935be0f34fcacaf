#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfpen/conditional.hpp"
#include "selfpen/dataset.hpp"

namespace selfpen {

enum class Signal {
    kLinear1,      // f = x_1
    kCubic2,       // f = x_1^3 + x_2^3
    kInteraction,  // f = x_1 x_2
};

enum class Response {
    kClassification,  // y = U sign(f), P(U = -1) = flip_prob
    kRegression,      // y = f + noise_sd * N(0, 1)
    kLogistic,        // P(y = +1 | x) = sigmoid(link_scale * f)
};

struct GenSpec {
    std::size_t n = 200;
    std::size_t p = 2;
    // Cov(X_i, X_j) = rho^{|i - j|}; rho == 0 gives independent coordinates.
    double rho = 0.0;
    Signal signal = Signal::kLinear1;
    Response response = Response::kClassification;
    double flip_prob = 0.1;
    double noise_sd = 0.1;
    double link_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Truth {
    IndexSet signal;
    // Exact P(Y = +1 | X_A); absent for regression responses.
    std::optional<ConditionalModel> oracle;
};

struct Generated {
    Dataset data;
    Truth truth;
};

Generated generate(const GenSpec& spec);

/// Logistic responses only: P(y = +1 | x) = sigmoid(link_scale * f(x)).
Generated logistic_generate(const GenSpec& spec);

IndexSet signal_indices(Signal signal);
double signal_value(Signal signal, std::span<const double> x);

/// Lower-triangular L with L L^T = (rho^{|i-j|}); the sampler applies the
/// same factor through its row recursion.
Matrix ar1_factor(std::size_t p, double rho);
Matrix ar1_covariance(std::size_t p, double rho);

/// Probabilists' Gauss-Hermite rule: E[g(Z)] ~= sum_k weights[k] g(nodes[k])
/// for Z ~ N(0, 1).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const QuadratureRule& gauss_hermite_64();

double normal_cdf(double x);
double sigmoid(double x);

std::string to_string(Signal s);
std::string to_string(Response r);
Signal signal_from_string(const std::string& s);
Response response_from_string(const std::string& s);

}  // namespace selfpen
