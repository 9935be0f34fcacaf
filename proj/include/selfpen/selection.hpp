#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "selfpen/conditional.hpp"
#include "selfpen/dataset.hpp"
#include "selfpen/kernel.hpp"
#include "selfpen/optimizer.hpp"

namespace selfpen {

struct SelectionRound {
    std::size_t round = 0;
    IndexSet candidate;  // support of the stationary point found this round
    double statistic = 0.0;
    double threshold = 0.0;
    bool accepted = false;
    Trajectory trajectory;
};

struct SelectionResult {
    IndexSet selected;
    std::vector<SelectionRound> rounds;
};

/// Tilts the empirical weights by P(Y = -y_i | X_A = x_{i,A}) and renormalizes.
/// The tilted measure makes Y independent of X_A while keeping whatever
/// signal the remaining coordinates carry.
Dataset reweight(const Dataset& d, const IndexSet& A, const ConditionalModel& cm);

/// Rescales the weights of each class to total 1/2. Every reweighted
/// population measure already has balanced labels; this enforces the same
/// on the sample.
Dataset balance_labels(const Dataset& d);

struct MlSelectionOptions {
    PgdConfig pgd;
    double box_bound = 10.0;
    double eps = 0.05;
    // Threshold for rounds after the first, where the tilted weights are
    // uneven and the null statistic is larger. Defaults to eps.
    std::optional<double> eps_reweighted;
    KernelSpec kernel{Exponent::kOne};
    // Full-support initializer; defaults to 1/p in every coordinate.
    std::optional<Vector> beta0;
    // Apply balance_labels after each reweighting.
    bool balance_classes = true;
};

/// Reweighted metric-learning selection. Each round reweights by the current
/// selection, runs PGD from beta0 and accepts supp(beta_hat) when
/// F(beta_hat) < -eps. At most p rounds.
SelectionResult select_metric_learning(const Dataset& d, const ConditionalModel& cm, const MlSelectionOptions& opt);

struct KrrSelectionOptions {
    PgdConfig pgd;
    double box_bound = 10.0;
    double lambda = 0.01;
    double eps = 0.05;
    KernelSpec kernel{Exponent::kOne};
    // Initializer of the first round (nothing selected yet). Defaults to 1/p
    // in every coordinate. Later rounds start from M on the selected
    // coordinates and 0 elsewhere.
    std::optional<Vector> beta0;
};

/// Pinned-coordinate KRR selection. Each round pins the current selection at
/// M, runs PGD and accepts supp(beta_hat) when the objective drops by more
/// than eps relative to the pinned point beta* = M 1_S. At most p rounds.
SelectionResult select_krr(const Dataset& d, const KrrSelectionOptions& opt);

struct CalibrationOptions {
    std::size_t runs = 50;
    std::uint64_t seed = 0;
    // Order statistic of the null sample used as the threshold level.
    double quantile = 1.0;
    double safety = 1.0;
    // Extra factor on the later-round level: those nulls only approximate
    // the tilted sample (the tilt itself was estimated from the data).
    double reweighted_safety = 1.5;

    void validate() const;
};

/// Result of a null calibration: the threshold constant C (eps = C / sqrt(n))
/// and the raw statistics it was computed from.
struct ThresholdCalibration {
    double constant = 0.0;
    double eps = 0.0;
    std::vector<double> null_statistics;
    // Metric learning only: level for rounds after the first, from nulls that
    // keep the uneven weight profile of a reweighted sample. Never below eps.
    double eps_reweighted = 0.0;
    std::vector<double> reweighted_null_statistics;
};

/// Runs the first selection round on `runs` label permutations and sets
/// eps = safety * (quantile of the null statistics), C = sqrt(n) * eps.
/// Permutation r shuffles pool[r % pool.size()]; a pool of independent draws
/// averages the threshold over sampling variation in covariates and labels.
///
/// With one conditional model per pool dataset, metric-learning calibration
/// also sets the later-round level. When `null_tilt` names a set known to
/// contain every signal (simulation studies), the null is the real sample
/// reweighted by that set. Otherwise the sample is reweighted by its own
/// first-round support and labels are permuted together with weights.
ThresholdCalibration calibrate_ml_threshold(std::span<const Dataset> pool, std::span<const ConditionalModel> conditionals,
                                            const MlSelectionOptions& opt, const CalibrationOptions& copt,
                                            const std::optional<IndexSet>& null_tilt = std::nullopt);
ThresholdCalibration calibrate_krr_threshold(std::span<const Dataset> pool, const KrrSelectionOptions& opt,
                                             const CalibrationOptions& copt);
ThresholdCalibration calibrate_ml_threshold(const Dataset& d, const MlSelectionOptions& opt, const CalibrationOptions& copt);
ThresholdCalibration calibrate_krr_threshold(const Dataset& d, const KrrSelectionOptions& opt, const CalibrationOptions& copt);

}  // namespace selfpen
