#pragma once

#include <cstddef>

#include "selfpen/kernel.hpp"

namespace selfpen {

/// n samples of (x, y) with an empirical weight per sample. Weights are
/// nonnegative and sum to one; the default is the uniform empirical measure.
class Dataset {
public:
    Dataset(RowMatrix X, Vector y);
    Dataset(RowMatrix X, Vector y, Vector weights);

    [[nodiscard]] const RowMatrix& X() const noexcept { return X_; }
    [[nodiscard]] const Vector& y() const noexcept { return y_; }
    [[nodiscard]] const Vector& weights() const noexcept { return w_; }

    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    [[nodiscard]] std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }

    [[nodiscard]] bool has_binary_labels() const;
    [[nodiscard]] bool has_uniform_weights() const;

    /// Same samples, new empirical weights (normalized by the caller).
    [[nodiscard]] Dataset with_weights(Vector weights) const;
    [[nodiscard]] Dataset with_labels(Vector y) const;

private:
    RowMatrix X_;
    Vector y_;
    Vector w_;
};

void require_binary_labels(const Dataset& d, const char* who);

}  // namespace selfpen
