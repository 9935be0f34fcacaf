#include "selfpen/dataset.hpp"

#include <cmath>
#include <string>

namespace selfpen {

namespace {

Vector uniform_weights(Eigen::Index n) {
    return Vector::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

}  // namespace

Dataset::Dataset(RowMatrix X, Vector y) : Dataset(std::move(X), std::move(y), Vector()) {}

Dataset::Dataset(RowMatrix X, Vector y, Vector weights) : X_(std::move(X)), y_(std::move(y)), w_(std::move(weights)) {
    require(X_.rows() >= 2, ErrorCode::kInvalidArgument, "a dataset needs at least two samples");
    require(X_.cols() >= 1, ErrorCode::kInvalidArgument, "a dataset needs at least one feature");
    require(y_.size() == X_.rows(), ErrorCode::kDimensionMismatch,
            "response length " + std::to_string(y_.size()) + " does not match " + std::to_string(X_.rows()) + " rows");
    require(X_.allFinite() && y_.allFinite(), ErrorCode::kInvalidArgument, "dataset contains non-finite values");
    if (w_.size() == 0) w_ = uniform_weights(X_.rows());
    require(w_.size() == X_.rows(), ErrorCode::kDimensionMismatch, "weight vector length does not match sample count");
    require(w_.allFinite() && (w_.array() >= 0.0).all(), ErrorCode::kInvalidArgument, "sample weights must be nonnegative");
    require(std::abs(w_.sum() - 1.0) <= 1e-12, ErrorCode::kInvalidArgument, "sample weights must sum to one");
}

bool Dataset::has_binary_labels() const {
    return ((y_.array() == 1.0) || (y_.array() == -1.0)).all();
}

bool Dataset::has_uniform_weights() const {
    const double u = 1.0 / static_cast<double>(n());
    return ((w_.array() - u).abs() <= 1e-15).all();
}

Dataset Dataset::with_weights(Vector weights) const { return Dataset(X_, y_, std::move(weights)); }

Dataset Dataset::with_labels(Vector y) const { return Dataset(X_, std::move(y), w_); }

void require_binary_labels(const Dataset& d, const char* who) {
    require(d.has_binary_labels(), ErrorCode::kInvalidArgument, std::string(who) + ": labels must be +1 or -1");
}

}  // namespace selfpen
