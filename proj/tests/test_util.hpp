#pragma once

#include <cstdint>
#include <random>

#include "selfpen/dataset.hpp"
#include "selfpen/kernel.hpp"

namespace selfpen::testing {

inline RowMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = z(rng);
    return X;
}

inline Vector random_labels(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    Vector y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = coin(rng) ? 1.0 : -1.0;
    return y;
}

inline Vector random_weights(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Vector w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = u(rng);
    return w / w.sum();
}

inline Vector random_beta(std::size_t p, std::uint64_t seed, double lo = 0.1, double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Vector b(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = u(rng);
    return b;
}

inline KernelSpec two_atom_kernel(Exponent q) { return KernelSpec(q, {{0.5, 0.7}, {2.0, 0.3}}); }

}  // namespace selfpen::testing
