#include "selfpen/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "selfpen/optimizer.hpp"
#include "selfpen/selection.hpp"
#include "selfpen/simdata.hpp"

namespace selfpen {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Vector random_beta(Rng& rng, std::size_t p, double lo, double hi) {
    Vector b(static_cast<Eigen::Index>(p));
    for (auto& v : b) v = uniform(rng, lo, hi);
    return b;
}

// sum_{i,k} w_i w_k c_i c_k |x_il - x_kl|^q
double centered_pair_sum(const Dataset& d, const Vector& c, std::size_t l, Exponent q) {
    const auto& X = d.X();
    const Vector wc = d.weights().cwiseProduct(c);
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index k = 0; k < X.rows(); ++k) {
            s += wc[i] * wc[k] * pow_q(std::abs(X(i, l) - X(k, l)), q);
        }
    }
    return s;
}

// Tracks the worst measured value of an "at most tolerance" property.
struct UpperCheck {
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    void add(double v) {
        worst = std::max(worst, v);
        ++count;
    }
};

PropertyResult upper(const std::string& suite, const std::string& name, const UpperCheck& c, double tol,
                     std::string detail) {
    return {suite, name, c.worst <= tol, c.worst, tol, c.count, std::move(detail)};
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) { return seed * 0x9E3779B97F4A7C15ULL + salt; }

// --- kernel ---------------------------------------------------------------

PropertyResult kernel_psd(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 100; ++t) {
        const RandomInstance inst = random_instance(mix(seed, t), false, true);
        Rng rng(mix(seed, 1000 + t));
        const Vector beta = random_beta(rng, inst.data.p(), 0.0, 10.0);
        const Matrix K = kernel_matrix(inst.data.X(), beta, inst.kernel);
        const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(K, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        c.add(-min_eig / inst.kernel.h0());
    }
    return upper("kernel", "positive-semidefinite", c, 1e-8, "-min eigenvalue / h(0)");
}

PropertyResult kernel_complete_monotone(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 50; ++t) {
        const RandomInstance inst = random_instance(mix(seed, 2000 + t), false, true);
        const KernelSpec& k = inst.kernel;
        for (int s = 0; s <= 100; ++s) {
            const double z = s / 10.0;
            // Largest of -h, h', -h'' must stay negative.
            c.add(std::max({-k.h(z), k.h_prime(z), -k.h_second(z)}));
        }
    }
    return upper("kernel", "complete-monotonicity", c, 0.0, "max of -h, h', -h'' on [0, 10]");
}

PropertyResult kernel_multiplicative(std::uint64_t seed) {
    Rng rng(mix(seed, 3000));
    const KernelSpec spec;
    UpperCheck c;
    for (std::size_t t = 0; t < 200; ++t) {
        const double a = uniform(rng, 0.0, 20.0);
        const double b = uniform(rng, 0.0, 20.0);
        c.add(std::abs(spec.h(a + b) - spec.h(a) * spec.h(b)) / spec.h(a + b));
    }
    return upper("kernel", "exponential-multiplicativity", c, 1e-12, "relative error of h(a+b) = h(a) h(b)");
}

// --- objectives -----------------------------------------------------------

PropertyResult balance_identity(std::uint64_t seed) {
    UpperCheck c;
    const double lambdas[] = {0.01, 0.1, 1.0};
    for (std::size_t t = 0; t < 200; ++t) {
        RandomInstance inst = random_instance(mix(seed, 4000 + t), false, t % 2 == 0);
        Rng rng(mix(seed, 5000 + t));
        const double lambda = lambdas[t % 3];
        const Vector beta = random_beta(rng, inst.data.p(), 0.0, 2.0);
        const Matrix K = kernel_matrix(inst.data.X(), beta, inst.kernel);
        const KrrFit fit = krr_fit(inst.data, K, lambda);
        const Vector wz = inst.data.weights().cwiseProduct(fit.residual);
        const double lhs = wz.dot(K * wz);
        const double rhs = lambda * lambda * fit.alpha.dot(K * fit.alpha);
        c.add(std::abs(lhs - rhs) / (1.0 + rhs));
    }
    return upper("objectives", "balance-identity", c, 1e-8, "|z'WKWz - lambda^2 a'Ka| / (1 + lambda^2 a'Ka)");
}

PropertyResult evaluation_bound(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 100; ++t) {
        RandomInstance inst = random_instance(mix(seed, 6000 + t), false, t % 2 == 0);
        Rng rng(mix(seed, 7000 + t));
        const Vector beta = random_beta(rng, inst.data.p(), 0.0, 2.0);
        const Matrix K = kernel_matrix(inst.data.X(), beta, inst.kernel);
        const KrrFit fit = krr_fit(inst.data, K, inst.lambda);
        const double sup = (K * fit.alpha).cwiseAbs().maxCoeff();
        const double bound = std::sqrt(inst.kernel.h0() * fit.hnorm2);
        c.add(sup - bound - 1e-12 * (1.0 + bound));
    }
    return upper("objectives", "evaluation-bound", c, 0.0, "max|f(x_i)| - sqrt(h(0) |f|_H^2)");
}

PropertyResult krr_lower_bound(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 100; ++t) {
        RandomInstance inst = random_instance(mix(seed, 8000 + t), false, t % 2 == 0);
        Rng rng(mix(seed, 9000 + t));
        const Vector beta = random_beta(rng, inst.data.p(), 0.0, 2.0);
        const double f0 = f_krr_value(inst.data, Vector::Zero(beta.size()), inst.kernel, inst.lambda);
        const KrrFit fit = krr_fit(inst.data, beta, inst.kernel, inst.lambda);
        const double drop = std::max(0.0, f0 - fit.value);
        const double ymax2 = inst.data.y().cwiseAbs2().maxCoeff();
        const double needed = drop * drop / (inst.kernel.h0() * ymax2);
        c.add(needed - fit.hnorm2 - 1e-12);
    }
    return upper("objectives", "norm-lower-bound", c, 0.0, "(F(0) - F(b))_+^2 / (h(0) max y^2) - |f|_H^2");
}

PropertyResult primal_dual(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 100; ++t) {
        RandomInstance inst = random_instance(mix(seed, 10000 + t), false, t % 2 == 0);
        Rng rng(mix(seed, 11000 + t));
        const Vector beta = random_beta(rng, inst.data.p(), 0.0, 2.0);
        const KrrFit fit = krr_fit(inst.data, beta, inst.kernel, inst.lambda);
        const double primal =
            0.5 * inst.data.weights().dot(fit.residual.cwiseAbs2()) + 0.5 * inst.lambda * fit.hnorm2;
        c.add(std::abs(primal - fit.value) / std::max(std::abs(primal), 1e-12));
    }
    return upper("objectives", "primal-dual-value", c, 1e-8, "relative gap between residual form and primal value");
}

PropertyResult ml_negativity(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 100; ++t) {
        RandomInstance inst = random_instance(mix(seed, 12000 + t), true, true);
        // Exactly balanced labels: alternate signs.
        Vector y(static_cast<Eigen::Index>(inst.data.n()));
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
        Dataset d = balance_labels(inst.data.with_labels(y));
        Rng rng(mix(seed, 13000 + t));
        const Vector beta = random_beta(rng, d.p(), 0.0, 5.0);
        c.add(f_ml_value(d, beta, inst.kernel));
    }
    return upper("objectives", "negativity", c, 1e-10, "max F_ml on balanced labels");
}

PropertyResult conditional_negative_definite(std::uint64_t seed) {
    UpperCheck c;
    for (std::size_t t = 0; t < 100; ++t) {
        RandomInstance inst = random_instance(mix(seed, 14000 + t), false, t % 2 == 0);
        const Dataset& d = inst.data;
        const Vector centered = d.y().array() - d.weights().dot(d.y());
        for (Exponent q : {Exponent::kOne, Exponent::kTwo}) {
            for (std::size_t l = 0; l < d.p(); ++l) c.add(centered_pair_sum(d, centered, l, q));
        }
    }
    return upper("objectives", "conditional-negative-definiteness", c, 1e-10,
                 "max sum w_i w_k y_i y_k |x_il - x_kl|^q, centered y, q in {1,2}");
}

PropertyResult gradient_property(GradcheckTarget target, std::uint64_t seed) {
    GradcheckOptions opt;
    opt.seed = seed;
    const GradcheckResult r = run_gradcheck(target, opt);
    const bool ml = target == GradcheckTarget::kMl;
    return {"objectives",
            ml ? "ml-gradient-finite-difference" : "krr-gradient-finite-difference",
            r.passed,
            r.max_relative_error,
            r.tolerance,
            r.evaluations,
            "max relative error against central differences"};
}

PropertyResult self_penalization(std::uint64_t seed) {
    GenSpec g;
    g.n = 2000;
    g.p = 6;
    g.rho = 0.0;
    g.signal = Signal::kCubic2;
    g.response = Response::kClassification;
    g.seed = mix(seed, 15000);
    const Generated gen = generate(g);
    const Dataset& d = gen.data;
    const KernelSpec spec;
    const IndexSet S = gen.truth.signal;
    Rng rng(mix(seed, 16000));
    UpperCheck c;
    for (std::size_t t = 0; t < 10; ++t) {
        const Vector beta = random_beta(rng, d.p(), 0.0, 1.0);
        const Evaluation e = f_ml_evaluate(d, beta, spec);
        for (std::size_t j = 0; j < d.p(); ++j) {
            if (contains(S, j)) continue;
            const double bound = penalization_constant(d, beta, spec, S, j) * std::abs(e.value);
            c.add(bound - e.gradient[static_cast<Eigen::Index>(j)]);
        }
    }
    return upper("objectives", "self-penalization-bound", c, 0.05, "max c(beta)|F| - dF/dbeta_j over noise j");
}

// --- optimizer ------------------------------------------------------------

struct DescentStats {
    UpperCheck increase;
    UpperCheck infeasible;
    UpperCheck revived;
};

void descent_run(const Objective& obj, std::size_t p, std::uint64_t seed, DescentStats& s) {
    const double M = 10.0;
    Rng rng(seed);
    const Vector b0 = random_beta(rng, p, 0.05, 1.0);
    PgdConfig cfg;
    cfg.max_iters = 200;
    cfg.stepsize = guarded_stepsize(obj, b0, M, 1.0, 4, seed);
    const Trajectory tr = pgd_run(obj, Weights(b0, M), cfg);
    for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
        const Iterate& it = tr.iterates[k];
        s.infeasible.add(std::max(-it.beta.minCoeff(), it.beta.maxCoeff() - M));
        if (k == 0) continue;
        const Iterate& prev = tr.iterates[k - 1];
        s.increase.add(it.value - prev.value);
        const Vector g = obj(prev.beta).gradient;
        for (Eigen::Index j = 0; j < g.size(); ++j) {
            if (prev.beta[j] == 0.0 && g[j] >= 0.0) s.revived.add(it.beta[j]);
        }
    }
}

std::vector<PropertyResult> optimizer_properties(std::uint64_t seed) {
    DescentStats s;
    for (std::size_t t = 0; t < 20; ++t) {
        const RandomInstance ml = random_instance(mix(seed, 17000 + t), true, t % 2 == 0);
        descent_run(make_ml_objective(ml.data, ml.kernel), ml.data.p(), mix(seed, 18000 + t), s);
        const RandomInstance krr = random_instance(mix(seed, 19000 + t), false, t % 2 == 0);
        descent_run(make_krr_objective(krr.data, krr.kernel, krr.lambda), krr.data.p(), mix(seed, 20000 + t), s);
    }
    return {upper("optimizer", "monotone-descent", s.increase, 1e-10, "max per-step objective increase"),
            upper("optimizer", "feasibility", s.infeasible, 0.0, "max box violation"),
            upper("optimizer", "exact-sparsity", s.revived, 0.0, "max coordinate revived from 0 with gradient >= 0")};
}

PropertyResult absorption(std::uint64_t seed) {
    std::size_t absorbed = 0;
    std::size_t reached = 0;
    for (std::size_t t = 0; t < 20; ++t) {
        GenSpec g;
        g.n = 500;
        g.p = 6;
        g.signal = Signal::kLinear1;
        g.response = Response::kClassification;
        g.seed = mix(seed, 21000 + t);
        const Generated gen = generate(g);
        const Objective obj = make_ml_objective(gen.data, KernelSpec());
        PgdConfig cfg;
        cfg.max_iters = 100;
        const Trajectory tr =
            pgd_run(obj, Weights::uniform(g.p, 1.0 / static_cast<double>(g.p), 10.0), cfg);
        auto noise_zero = [](const Vector& b) { return (b.tail(b.size() - 1).array() == 0.0).all(); };
        std::size_t first = tr.iterates.size();
        for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
            if (noise_zero(tr.iterates[k].beta)) {
                first = k;
                break;
            }
        }
        if (first == tr.iterates.size()) continue;
        ++reached;
        bool stays = true;
        for (std::size_t k = first; k < tr.iterates.size(); ++k) stays = stays && noise_zero(tr.iterates[k].beta);
        absorbed += stays ? 1 : 0;
    }
    const double frac = reached == 0 ? 0.0 : static_cast<double>(absorbed) / static_cast<double>(reached);
    return {"optimizer", "noise-absorption", reached > 0 && frac >= 0.95, frac, 0.95, reached,
            "fraction of runs whose noise coordinates stay 0 once all reach 0 (at least)"};
}

// --- simdata --------------------------------------------------------------

std::vector<PropertyResult> simdata_properties(std::uint64_t seed) {
    UpperCheck det;
    for (std::size_t t = 0; t < 10; ++t) {
        GenSpec g;
        g.n = 50;
        g.p = 4;
        g.rho = 0.5;
        g.signal = Signal::kCubic2;
        g.seed = mix(seed, 22000 + t);
        const Generated a = generate(g);
        const Generated b = generate(g);
        const bool same = a.data.X() == b.data.X() && a.data.y() == b.data.y();
        det.add(same ? 0.0 : 1.0);
    }
    UpperCheck factor;
    for (std::size_t p : {1, 2, 10, 100, 400}) {
        for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.9}) {
            const Matrix L = ar1_factor(p, rho);
            factor.add(((L * L.transpose()) - ar1_covariance(p, rho)).cwiseAbs().maxCoeff());
        }
    }
    UpperCheck oracle;
    for (std::size_t t = 0; t < 10; ++t) {
        GenSpec g;
        g.n = 2000;
        g.p = 3;
        g.rho = 0.3;
        g.signal = t % 2 == 0 ? Signal::kLinear1 : Signal::kInteraction;
        g.response = t % 2 == 0 ? Response::kClassification : Response::kLogistic;
        g.link_scale = 2.0;
        g.seed = mix(seed, 23000 + t);
        const Generated gen = generate(g);
        const Vector prob = gen.truth.oracle->probabilities(gen.data.X(), gen.truth.signal);
        const double freq = (gen.data.y().array() > 0.0).cast<double>().mean();
        oracle.add(std::abs(prob.mean() - freq) * std::sqrt(static_cast<double>(g.n)));
    }
    return {upper("simdata", "seed-determinism", det, 0.0, "1 if a regenerated dataset differs"),
            upper("simdata", "ar1-factor", factor, 1e-12, "max |L L' - Sigma| for p <= 400"),
            upper("simdata", "oracle-calibration", oracle, 3.0, "sqrt(n) |mean P(Y=1|X_S) - class frequency|")};
}

// --- selection ------------------------------------------------------------

std::vector<PropertyResult> selection_properties(std::uint64_t seed) {
    UpperCheck growth;
    UpperCheck det;
    for (std::size_t t = 0; t < 10; ++t) {
        GenSpec g;
        g.n = 60;
        g.p = 4;
        g.signal = Signal::kCubic2;
        g.response = t % 2 == 0 ? Response::kClassification : Response::kRegression;
        g.seed = mix(seed, 24000 + t);
        const Generated gen = generate(g);
        std::vector<SelectionResult> runs;
        for (int rep = 0; rep < 2; ++rep) {
            if (g.response == Response::kClassification) {
                MlSelectionOptions opt;
                opt.eps = 1e-4;
                runs.push_back(select_metric_learning(gen.data, *gen.truth.oracle, opt));
            } else {
                KrrSelectionOptions opt;
                opt.eps = 1e-4;
                runs.push_back(select_krr(gen.data, opt));
            }
        }
        const SelectionResult& r = runs[0];
        double violation = r.rounds.size() > g.p ? 1.0 : 0.0;
        IndexSet acc;
        for (const SelectionRound& round : r.rounds) {
            if (round.accepted) acc = set_union(acc, round.candidate);
        }
        if (acc != r.selected) violation = 1.0;
        growth.add(violation);
        bool same = runs[0].selected == runs[1].selected && runs[0].rounds.size() == runs[1].rounds.size();
        for (std::size_t k = 0; same && k < runs[0].rounds.size(); ++k) {
            same = runs[0].rounds[k].statistic == runs[1].rounds[k].statistic;
        }
        det.add(same ? 0.0 : 1.0);
    }
    return {upper("selection", "monotone-growth", growth, 0.0, "1 if rounds exceed p or selected != union of accepted"),
            upper("selection", "determinism", det, 0.0, "1 if a repeated selection differs")};
}

struct Entry {
    std::string id;
    std::function<std::vector<PropertyResult>(std::uint64_t)> run;
};

template <typename F>
std::function<std::vector<PropertyResult>(std::uint64_t)> one(F f) {
    return [f](std::uint64_t s) { return std::vector<PropertyResult>{f(s)}; };
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"kernel/positive-semidefinite", one(kernel_psd)},
        {"kernel/complete-monotonicity", one(kernel_complete_monotone)},
        {"kernel/exponential-multiplicativity", one(kernel_multiplicative)},
        {"objectives/balance-identity", one(balance_identity)},
        {"objectives/evaluation-bound", one(evaluation_bound)},
        {"objectives/norm-lower-bound", one(krr_lower_bound)},
        {"objectives/primal-dual-value", one(primal_dual)},
        {"objectives/negativity", one(ml_negativity)},
        {"objectives/conditional-negative-definiteness", one(conditional_negative_definite)},
        {"objectives/ml-gradient-finite-difference",
         one([](std::uint64_t s) { return gradient_property(GradcheckTarget::kMl, s); })},
        {"objectives/krr-gradient-finite-difference",
         one([](std::uint64_t s) { return gradient_property(GradcheckTarget::kKrr, s); })},
        {"objectives/self-penalization-bound", one(self_penalization)},
        {"optimizer/monotone-descent+feasibility+exact-sparsity", optimizer_properties},
        {"optimizer/noise-absorption", one(absorption)},
        {"simdata/seed-determinism+ar1-factor+oracle-calibration", simdata_properties},
        {"selection/monotone-growth+determinism", selection_properties},
    };
    return entries;
}

}  // namespace

std::vector<std::string> validation_properties() {
    std::vector<std::string> out;
    for (const Entry& e : registry()) {
        const auto slash = e.id.find('/');
        std::stringstream names(e.id.substr(slash + 1));
        std::string name;
        while (std::getline(names, name, '+')) out.push_back(e.id.substr(0, slash + 1) + name);
    }
    return out;
}

std::vector<PropertyResult> run_validation(const ValidationOptions& opt) {
    std::vector<PropertyResult> out;
    for (const Entry& e : registry()) {
        if (!opt.filter.empty() && e.id.find(opt.filter) == std::string::npos) continue;
        for (PropertyResult& r : e.run(opt.seed)) out.push_back(std::move(r));
    }
    return out;
}

Vector central_difference(const std::function<double(const Vector&)>& value, const Vector& beta) {
    Vector g(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::abs(beta[j]));
        Vector plus = beta;
        Vector minus = beta;
        plus[j] += h;
        minus[j] -= h;
        g[j] = (value(plus) - value(minus)) / (2.0 * h);
    }
    return g;
}

double gradient_relative_error(const Vector& analytic, const Vector& numeric) {
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-8);
    return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

GradcheckResult run_gradcheck(GradcheckTarget target, const GradcheckOptions& opt) {
    require(opt.instances >= 1 && opt.points >= 1, ErrorCode::kInvalidArgument,
            "gradcheck needs at least one instance and one point");
    const bool ml = target == GradcheckTarget::kMl;
    GradcheckResult r;
    r.target = target;
    r.tolerance = ml ? kMlGradientTolerance : kKrrGradientTolerance;
    const std::uint64_t salt = ml ? 30000 : 40000;
    for (std::size_t t = 0; t < opt.instances; ++t) {
        const RandomInstance inst = random_instance(mix(opt.seed, salt + t), ml, t % 2 == 0);
        Rng rng(mix(opt.seed, salt + 5000 + t));
        for (std::size_t k = 0; k < opt.points; ++k) {
            const Vector beta = random_beta(rng, inst.data.p(), 0.1, 2.0);
            Vector analytic;
            Vector numeric;
            if (ml) {
                analytic = f_ml_gradient(inst.data, beta, inst.kernel);
                numeric = central_difference([&](const Vector& b) { return f_ml_value(inst.data, b, inst.kernel); }, beta);
            } else {
                analytic = f_krr_gradient(inst.data, beta, inst.kernel, inst.lambda);
                numeric = central_difference(
                    [&](const Vector& b) { return f_krr_value(inst.data, b, inst.kernel, inst.lambda); }, beta);
            }
            r.max_relative_error = std::max(r.max_relative_error, gradient_relative_error(analytic, numeric));
            ++r.evaluations;
        }
    }
    r.passed = r.max_relative_error < r.tolerance;
    return r;
}

RandomInstance random_instance(std::uint64_t seed, bool binary, bool uniform_weights) {
    Rng rng(seed);
    const std::size_t n = uniform_int(rng, 5, 30);
    const std::size_t p = uniform_int(rng, 1, 5);
    const Exponent q = uniform_int(rng, 1, 2) == 1 ? Exponent::kOne : Exponent::kTwo;
    std::vector<Atom> atoms(uniform_int(rng, 1, 3));
    for (Atom& a : atoms) a = Atom{uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 2.0)};
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
    Vector y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] = binary ? (i % 2 == 0 ? 1.0 : -1.0) * (uniform(rng, 0.0, 1.0) < 0.8 ? 1.0 : -1.0) : normal(rng);
    }
    Vector w = Vector::Constant(static_cast<Eigen::Index>(n), 1.0);
    if (!uniform_weights) {
        for (auto& v : w) v = uniform(rng, 0.1, 1.0);
    }
    w /= w.sum();
    const double lambdas[] = {0.01, 0.1, 1.0};
    return RandomInstance{Dataset(std::move(X), std::move(y), std::move(w)), KernelSpec(q, std::move(atoms)),
                          lambdas[uniform_int(rng, 0, 2)]};
}

double penalization_constant(const Dataset& d, const Vector& beta, const KernelSpec& spec, const IndexSet& signal,
                             std::size_t j) {
    require(j < d.p(), ErrorCode::kInvalidArgument, "coordinate out of range");
    Vector noise_beta = beta;
    for (std::size_t s : signal) noise_beta[static_cast<Eigen::Index>(s)] = 0.0;
    const auto& X = d.X();
    const Vector& w = d.weights();
    const Exponent q = spec.q();
    const double T = spec.max_rate();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index k = i + 1; k < X.rows(); ++k) {
            const double dist = weighted_dist(row_span(X, i), row_span(X, k), noise_beta, q);
            sum += w[i] * w[k] * std::exp(-T * dist) * pow_q(std::abs(X(i, j) - X(k, j)), q);
        }
    }
    return spec.min_rate() * 2.0 * sum;
}

}  // namespace selfpen
