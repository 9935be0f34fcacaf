#include "selfpen/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace selfpen {

IndexSet make_index_set(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return indices;
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool contains(const IndexSet& set, std::size_t index) {
    return std::binary_search(set.begin(), set.end(), index);
}

Exponent exponent_from_int(int q) {
    require(q == 1 || q == 2, ErrorCode::kInvalidArgument, "kernel exponent q must be 1 or 2, got " + std::to_string(q));
    return q == 1 ? Exponent::kOne : Exponent::kTwo;
}

KernelSpec::KernelSpec(Exponent q) : KernelSpec(q, {Atom{1.0, 1.0}}) {}

KernelSpec::KernelSpec(Exponent q, std::vector<Atom> atoms) : q_(q), atoms_(std::move(atoms)), h0_(0.0) {
    require(!atoms_.empty(), ErrorCode::kInvalidArgument, "kernel mixture must contain at least one atom");
    for (const Atom& a : atoms_) {
        require(std::isfinite(a.rate) && a.rate > 0.0, ErrorCode::kInvalidArgument, "kernel atom rates must be positive and finite");
        require(std::isfinite(a.mass) && a.mass > 0.0, ErrorCode::kInvalidArgument, "kernel atom masses must be positive and finite");
        h0_ += a.mass;
    }
}

double KernelSpec::h(double z) const {
    require(z >= 0.0, ErrorCode::kInvalidArgument, "h is defined on z >= 0");
    double out = 0.0;
    for (const Atom& a : atoms_) out += a.mass * std::exp(-a.rate * z);
    return out;
}

double KernelSpec::h_prime(double z) const {
    require(z >= 0.0, ErrorCode::kInvalidArgument, "h' is defined on z >= 0");
    double out = 0.0;
    for (const Atom& a : atoms_) out -= a.mass * a.rate * std::exp(-a.rate * z);
    return out;
}

double KernelSpec::h_second(double z) const {
    require(z >= 0.0, ErrorCode::kInvalidArgument, "h'' is defined on z >= 0");
    double out = 0.0;
    for (const Atom& a : atoms_) out += a.mass * a.rate * a.rate * std::exp(-a.rate * z);
    return out;
}

double KernelSpec::min_rate() const noexcept {
    double r = atoms_.front().rate;
    for (const Atom& a : atoms_) r = std::min(r, a.rate);
    return r;
}

double KernelSpec::max_rate() const noexcept {
    double r = atoms_.front().rate;
    for (const Atom& a : atoms_) r = std::max(r, a.rate);
    return r;
}

Weights::Weights(Vector beta, double box_bound, IndexSet pinned)
    : beta_(std::move(beta)), box_bound_(box_bound), pinned_(make_index_set(std::move(pinned))) {
    require(std::isfinite(box_bound_) && box_bound_ > 0.0, ErrorCode::kInvalidArgument, "box bound M must be positive");
    for (Eigen::Index i = 0; i < beta_.size(); ++i) {
        require(std::isfinite(beta_[i]) && beta_[i] >= 0.0 && beta_[i] <= box_bound_, ErrorCode::kInvalidArgument,
                "weights must lie in [0, M]; coordinate " + std::to_string(i) + " is " + std::to_string(beta_[i]));
    }
    for (std::size_t j : pinned_) {
        require(j < size(), ErrorCode::kInvalidArgument, "pinned index out of range");
        require(beta_[static_cast<Eigen::Index>(j)] == box_bound_, ErrorCode::kInvalidArgument,
                "pinned coordinate " + std::to_string(j) + " must equal M");
    }
}

Weights Weights::uniform(std::size_t p, double value, double box_bound) {
    return Weights(Vector::Constant(static_cast<Eigen::Index>(p), value), box_bound);
}

IndexSet support_of(const Vector& beta) {
    IndexSet out;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        if (beta[i] > 0.0) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

IndexSet Weights::support() const { return support_of(beta_); }

double weighted_dist(std::span<const double> x, std::span<const double> x2, const Vector& beta, Exponent q) {
    require(x.size() == x2.size() && x.size() == static_cast<std::size_t>(beta.size()), ErrorCode::kDimensionMismatch,
            "weighted_dist: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double b = beta[static_cast<Eigen::Index>(i)];
        if (b != 0.0) d += b * pow_q(std::abs(x[i] - x2[i]), q);
    }
    return d;
}

double weighted_dist(std::span<const double> x, std::span<const double> x2, const Weights& beta, Exponent q) {
    return weighted_dist(x, x2, beta.beta(), q);
}

Matrix kernel_matrix(const RowMatrix& X, const Vector& beta, const KernelSpec& spec) {
    require(X.rows() >= 1, ErrorCode::kInvalidArgument, "kernel_matrix needs at least one sample");
    require(X.cols() == beta.size(), ErrorCode::kDimensionMismatch, "kernel_matrix: beta has wrong length");
    const Eigen::Index n = X.rows();
    Matrix K(n, n);
    const double h0 = spec.h0();
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = h0;
        for (Eigen::Index k = i + 1; k < n; ++k) {
            const double v = spec.h(weighted_dist(row_span(X, i), row_span(X, k), beta, spec.q()));
            K(i, k) = v;
            K(k, i) = v;
        }
    }
    return K;
}

Matrix kernel_matrix(const RowMatrix& X, const Weights& beta, const KernelSpec& spec) {
    return kernel_matrix(X, beta.beta(), spec);
}

}  // namespace selfpen
