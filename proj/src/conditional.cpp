#include "selfpen/conditional.hpp"

#include <algorithm>
#include <cmath>

namespace selfpen {

namespace {

constexpr double kClipLow = 0.01;
constexpr double kClipHigh = 0.99;

}  // namespace

ConditionalModel::ConditionalModel(Kind kind, BatchFn fn, double bandwidth)
    : kind_(kind), fn_(std::move(fn)), bandwidth_(bandwidth) {
    require(static_cast<bool>(fn_), ErrorCode::kInvalidArgument, "conditional model needs a callable");
}

ConditionalModel ConditionalModel::oracle(BatchFn fn) { return ConditionalModel(Kind::kOracle, std::move(fn), 0.0); }

Vector ConditionalModel::probabilities(const RowMatrix& X, const IndexSet& A) const {
    for (std::size_t a : A) {
        require(a < static_cast<std::size_t>(X.cols()), ErrorCode::kInvalidArgument, "conditioning index out of range");
    }
    Vector prob = fn_(X, A);
    require(prob.size() == X.rows(), ErrorCode::kDimensionMismatch, "conditional model returned wrong number of values");
    require(prob.allFinite(), ErrorCode::kNumericalFailure, "conditional model returned non-finite probabilities");
    return prob.cwiseMax(0.0).cwiseMin(1.0);
}

double default_smoother_bandwidth(std::size_t n) { return std::pow(static_cast<double>(n), -0.2); }

ConditionalModel kernel_smoother_conditional(const Dataset& train, double bandwidth) {
    require_binary_labels(train, "kernel smoother");
    require(std::isfinite(bandwidth) && bandwidth > 0.0, ErrorCode::kInvalidArgument, "smoother bandwidth must be positive");
    auto Xtr = std::make_shared<const RowMatrix>(train.X());
    auto positive = std::make_shared<const Vector>((train.y().array() > 0.0).cast<double>().matrix());
    const double marginal = positive->mean();
    const double inv2h2 = 0.5 / (bandwidth * bandwidth);

    auto fn = [Xtr, positive, marginal, inv2h2](const RowMatrix& X, const IndexSet& A) {
        require(X.cols() == Xtr->cols(), ErrorCode::kDimensionMismatch, "smoother evaluated on data of the wrong width");
        Vector out(X.rows());
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            if (A.empty()) {
                out[r] = marginal;
                continue;
            }
            // Shift by the smallest squared distance so the weights cannot all underflow.
            Vector d2(Xtr->rows());
            for (Eigen::Index i = 0; i < Xtr->rows(); ++i) {
                double s = 0.0;
                for (std::size_t a : A) {
                    const auto c = static_cast<Eigen::Index>(a);
                    const double diff = X(r, c) - (*Xtr)(i, c);
                    s += diff * diff;
                }
                d2[i] = s;
            }
            const double dmin = d2.minCoeff();
            double num = 0.0;
            double den = 0.0;
            for (Eigen::Index i = 0; i < Xtr->rows(); ++i) {
                const double k = std::exp(-(d2[i] - dmin) * inv2h2);
                num += k * (*positive)[i];
                den += k;
            }
            out[r] = den > 0.0 ? num / den : marginal;
        }
        return Vector(out.cwiseMax(kClipLow).cwiseMin(kClipHigh));
    };
    return ConditionalModel(ConditionalModel::Kind::kKernelSmoother, std::move(fn), bandwidth);
}

}  // namespace selfpen
