#include <gtest/gtest.h>

#include "selfpen/objectives.hpp"
#include "selfpen/validation.hpp"

namespace selfpen {
namespace {

TEST(ValidationTest, RegistryListsEveryProperty) {
    const std::vector<std::string> names = validation_properties();
    EXPECT_EQ(names.size(), 21u);
    for (const std::string& n : names) EXPECT_NE(n.find('/'), std::string::npos);
}

TEST(ValidationTest, FilterSelectsSubset) {
    ValidationOptions o;
    o.filter = "objectives/balance";
    const std::vector<PropertyResult> r = run_validation(o);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_TRUE(r[0].passed) << r[0].detail;
    EXPECT_EQ(r[0].instances, 200u);
    o.filter = "no-such-property";
    EXPECT_TRUE(run_validation(o).empty());
}

TEST(ValidationTest, CentralDifferenceIsExactOnQuadratics) {
    const auto f = [](const Vector& b) { return 3.0 * b[0] * b[0] - b[0] * b[1]; };
    Vector b(2);
    b << 0.7, -1.2;
    const Vector g = central_difference(f, b);
    EXPECT_NEAR(g[0], 6.0 * 0.7 + 1.2, 1e-8);
    EXPECT_NEAR(g[1], -0.7, 1e-8);
    EXPECT_DOUBLE_EQ(gradient_relative_error(g, g), 0.0);
}

TEST(ValidationTest, GradcheckPassesOnBothObjectives) {
    GradcheckOptions o;
    o.instances = 5;
    o.points = 3;
    for (GradcheckTarget t : {GradcheckTarget::kMl, GradcheckTarget::kKrr}) {
        const GradcheckResult r = run_gradcheck(t, o);
        EXPECT_TRUE(r.passed) << r.max_relative_error;
        EXPECT_EQ(r.evaluations, 15u);
    }
}

// A deliberately broken gradient must be caught by the same comparison.
TEST(ValidationTest, MutatedGradientFailsFiniteDifferenceCheck) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const RandomInstance inst = random_instance(seed, true, seed % 2 == 0);
        const Vector b = Vector::Constant(static_cast<Eigen::Index>(inst.data.p()), 0.8);
        const Vector fd =
            central_difference([&](const Vector& v) { return f_ml_value(inst.data, v, inst.kernel); }, b);
        const Vector g = f_ml_gradient(inst.data, b, inst.kernel);
        EXPECT_LT(gradient_relative_error(g, fd), kMlGradientTolerance);
        if (g.cwiseAbs().maxCoeff() > 1e-6) EXPECT_GT(gradient_relative_error(-g, fd), kMlGradientTolerance);
        const Vector k = f_krr_gradient(inst.data, b, inst.kernel, inst.lambda);
        const Vector kfd = central_difference(
            [&](const Vector& v) { return f_krr_value(inst.data, v, inst.kernel, inst.lambda); }, b);
        if (k.cwiseAbs().maxCoeff() > 1e-6) EXPECT_GT(gradient_relative_error(2.0 * k, kfd), kKrrGradientTolerance);
    }
}

TEST(ValidationTest, RandomInstancesRespectRanges) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const RandomInstance r = random_instance(s, true, false);
        EXPECT_GE(r.data.n(), 5u);
        EXPECT_LE(r.data.n(), 30u);
        EXPECT_GE(r.data.p(), 1u);
        EXPECT_LE(r.data.p(), 5u);
        EXPECT_TRUE(r.data.has_binary_labels());
        EXPECT_LE(r.kernel.atoms().size(), 3u);
    }
}

TEST(ValidationTest, PenalizationConstantIsPositiveForVaryingCoordinate) {
    const RandomInstance r = random_instance(4, true, true);
    const Vector b = Vector::Constant(static_cast<Eigen::Index>(r.data.p()), 0.5);
    EXPECT_GT(penalization_constant(r.data, b, r.kernel, {}, 0), 0.0);
}

}  // namespace
}  // namespace selfpen
