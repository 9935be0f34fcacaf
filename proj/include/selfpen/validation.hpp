#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "selfpen/dataset.hpp"
#include "selfpen/kernel.hpp"
#include "selfpen/objectives.hpp"

namespace selfpen {

/// Outcome of one property check. `measured` is the worst value seen over
/// all instances; the check passes when it is on the right side of
/// `tolerance` (the direction is part of the property's definition).
struct PropertyResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::size_t instances = 0;
    std::string detail;
};

struct ValidationOptions {
    // Substring match on "suite/name"; empty runs everything.
    std::string filter;
    std::uint64_t seed = 0;
};

/// Names of all registered properties as "suite/name".
std::vector<std::string> validation_properties();

/// Runs every property whose "suite/name" contains the filter.
std::vector<PropertyResult> run_validation(const ValidationOptions& opt);

/// Central difference of `value` at beta, step 1e-6 (1 + |beta_j|) per
/// coordinate.
Vector central_difference(const std::function<double(const Vector&)>& value, const Vector& beta);

/// |g - g_fd|_inf / max(|g|_inf, 1e-8)
double gradient_relative_error(const Vector& analytic, const Vector& numeric);

enum class GradcheckTarget { kMl, kKrr };

struct GradcheckOptions {
    std::size_t instances = 50;
    std::size_t points = 10;
    std::uint64_t seed = 0;
};

struct GradcheckResult {
    GradcheckTarget target = GradcheckTarget::kMl;
    std::size_t evaluations = 0;
    double max_relative_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Relative error tolerances of the finite-difference checks.
inline constexpr double kMlGradientTolerance = 1e-5;
inline constexpr double kKrrGradientTolerance = 1e-4;

/// Compares analytic gradients with central differences at `points` random
/// interior points on each of `instances` random small problems.
GradcheckResult run_gradcheck(GradcheckTarget target, const GradcheckOptions& opt);

/// Random small problem used by the property suites: n in [5, 30], p in
/// [1, 5], q in {1, 2}, one to three kernel atoms, optionally non-uniform
/// weights. Labels are +-1 when `binary`, Gaussian otherwise.
struct RandomInstance {
    Dataset data;
    KernelSpec kernel;
    double lambda = 0.1;
};
RandomInstance random_instance(std::uint64_t seed, bool binary, bool uniform_weights);

/// Lower constant of the self-penalization bound for noise coordinate j:
/// m * sum_{i,k} w_i w_k exp(-T d_{S^c}(x_i, x_k)) |x_ij - x_kj|^q, where m and
/// T are the smallest and largest kernel rates and d_{S^c} is the weighted
/// distance restricted to the complement of `signal`.
double penalization_constant(const Dataset& d, const Vector& beta, const KernelSpec& spec, const IndexSet& signal,
                             std::size_t j);

}  // namespace selfpen
