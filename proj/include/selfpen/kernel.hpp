#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "selfpen/error.hpp"

namespace selfpen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Sorted, duplicate-free, 0-based feature indices.
using IndexSet = std::vector<std::size_t>;

IndexSet make_index_set(std::vector<std::size_t> indices);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
bool contains(const IndexSet& set, std::size_t index);

/// Exponent of the l_q distance inside the kernel. Only q = 1 (Laplace-type)
/// and q = 2 (Gaussian-type) kernels are supported.
enum class Exponent { kOne = 1, kTwo = 2 };

Exponent exponent_from_int(int q);

inline double pow_q(double abs_diff, Exponent q) {
    return q == Exponent::kOne ? abs_diff : abs_diff * abs_diff;
}

/// One atom t -> m * exp(-t z) of the mixing measure.
struct Atom {
    double rate = 1.0;
    double mass = 1.0;
};

/// The radial profile h(z) = sum_k m_k exp(-t_k z), a finite exponential
/// mixture, paired with the exponent q of the distance it is applied to.
/// All rates and masses are strictly positive, so h is completely monotone
/// and its mixing measure has support bounded away from zero and infinity.
class KernelSpec {
public:
    /// h(z) = exp(-z).
    explicit KernelSpec(Exponent q = Exponent::kOne);
    KernelSpec(Exponent q, std::vector<Atom> atoms);

    [[nodiscard]] Exponent q() const noexcept { return q_; }
    [[nodiscard]] const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    [[nodiscard]] double h(double z) const;
    [[nodiscard]] double h_prime(double z) const;
    [[nodiscard]] double h_second(double z) const;

    /// h(z) and h'(z) in one pass; z >= 0 is the caller's responsibility.
    void eval_unchecked(double z, double& h, double& h_prime) const noexcept {
        h = 0.0;
        h_prime = 0.0;
        for (const Atom& a : atoms_) {
            const double e = a.mass * std::exp(-a.rate * z);
            h += e;
            h_prime -= a.rate * e;
        }
    }

    /// Smallest / largest rate in the mixture (m_mu and M_mu).
    [[nodiscard]] double min_rate() const noexcept;
    [[nodiscard]] double max_rate() const noexcept;

    [[nodiscard]] double h0() const noexcept { return h0_; }

private:
    Exponent q_;
    std::vector<Atom> atoms_;
    double h0_;
};

/// Nonnegative feature weights inside the box [0, M]^p, with a set of
/// coordinates pinned at M.
class Weights {
public:
    Weights() = default;
    Weights(Vector beta, double box_bound, IndexSet pinned = {});

    static Weights uniform(std::size_t p, double value, double box_bound);

    [[nodiscard]] const Vector& beta() const noexcept { return beta_; }
    [[nodiscard]] double box_bound() const noexcept { return box_bound_; }
    [[nodiscard]] const IndexSet& pinned() const noexcept { return pinned_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(beta_.size()); }

    /// {i : beta_i > 0}. Zeros written by projection are exact.
    [[nodiscard]] IndexSet support() const;

private:
    Vector beta_;
    double box_bound_ = 1.0;
    IndexSet pinned_;
};

IndexSet support_of(const Vector& beta);

/// sum_i beta_i |x_i - x2_i|^q
double weighted_dist(std::span<const double> x, std::span<const double> x2, const Vector& beta, Exponent q);
double weighted_dist(std::span<const double> x, std::span<const double> x2, const Weights& beta, Exponent q);

/// K_ij = h(weighted_dist(x_i, x_j)). Symmetric with h(0) on the diagonal.
Matrix kernel_matrix(const RowMatrix& X, const Vector& beta, const KernelSpec& spec);
Matrix kernel_matrix(const RowMatrix& X, const Weights& beta, const KernelSpec& spec);

inline std::span<const double> row_span(const RowMatrix& X, Eigen::Index i) {
    return {X.data() + i * X.cols(), static_cast<std::size_t>(X.cols())};
}

}  // namespace selfpen
