#pragma once

#include <functional>
#include <memory>

#include "selfpen/dataset.hpp"
#include "selfpen/kernel.hpp"

namespace selfpen {

/// Estimate or closed form of P(Y = +1 | X_A = x_A), evaluated for every row
/// of a covariate matrix at once.
class ConditionalModel {
public:
    enum class Kind { kOracle, kKernelSmoother };

    /// Rows of X and the conditioning set A in, one probability per row out.
    using BatchFn = std::function<Vector(const RowMatrix& X, const IndexSet& A)>;

    static ConditionalModel oracle(BatchFn fn);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }

    /// Values are clamped into [0, 1].
    [[nodiscard]] Vector probabilities(const RowMatrix& X, const IndexSet& A) const;

private:
    friend ConditionalModel kernel_smoother_conditional(const Dataset& train, double bandwidth);

    ConditionalModel(Kind kind, BatchFn fn, double bandwidth);

    Kind kind_;
    BatchFn fn_;
    double bandwidth_ = 0.0;
};

/// Nadaraya-Watson estimate with Gaussian weights on the Euclidean distance
/// over the coordinates in A, clipped to [0.01, 0.99]. An empty A gives the
/// (clipped) label marginal.
ConditionalModel kernel_smoother_conditional(const Dataset& train, double bandwidth);

/// n^{-1/5}
double default_smoother_bandwidth(std::size_t n);

}  // namespace selfpen
