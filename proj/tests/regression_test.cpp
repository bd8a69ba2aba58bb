#include <cmath>

#include <gtest/gtest.h>

#include "expplan/regression.hpp"
#include "oracles.hpp"

using namespace expplan;

TEST(ConfidenceRadius, FormulaValue) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    const double expected = 2.0 * std::sqrt(std::log(8000.0));
    EXPECT_NEAR(confidence_radius(cfg, 100, 8), expected, 1e-12);
    EXPECT_NEAR(confidence_radius(cfg, 100, 8), 5.996, 5e-4);
}

TEST(ConfidenceRadius, VanishesAtLogOne) {
    confidence_config cfg{1.0 - 1e-12, 1.0, 1.0, 1.0};
    EXPECT_LT(confidence_radius(cfg, 1, 1), 1e-5 * 2.0);
}

TEST(ConfidenceRadius, DoublingIncreases) {
    confidence_config cfg{0.1, 0.7, 1.0, 3.0};
    for (std::uint64_t t : {1u, 7u, 100u, 5000u})
        EXPECT_GT(confidence_radius(cfg, 2 * t, 16), confidence_radius(cfg, t, 16));
}

TEST(ConfidenceRadius, RejectsBadDelta) {
    EXPECT_THROW(confidence_radius({0.0, 1, 1, 1}, 1, 1), validation_error);
    EXPECT_THROW(confidence_radius({1.0, 1, 1, 1}, 1, 1), validation_error);
    EXPECT_THROW(confidence_radius({-0.5, 1, 1, 1}, 1, 1), validation_error);
}

TEST(LeastSquares, Examples) {
    auto F = oracle::make_class({{{0.0, 0.0}}, {{1.0, 1.0}}}, 1.0);
    labeled_dataset ones({{0, 0, 1.0}, {0, 1, 1.0}});
    EXPECT_EQ(least_squares(F, ones), 1u);
    labeled_dataset one({{0, 0, 0.4}});
    EXPECT_EQ(least_squares(F, one), 0u);
    EXPECT_EQ(least_squares(F, labeled_dataset{}), 0u);
}

TEST(SquaredLossTracker, MatchesBatchFitOnEveryPrefix) {
    auto F = oracle::make_class({{{0.0, 0.2}, {0.5, 0.1}}, {{1.0, -0.3}, {0.2, 0.2}}, {{0.4, 0.4}, {0.4, 0.4}}}, 1.0);
    std::vector<sample> D{{0, 0, 0.9}, {1, 1, 0.3}, {0, 1, -0.2}, {1, 0, 0.1}, {0, 0, 0.2}};
    squared_loss_tracker tr(F);
    for (std::size_t t = 0; t <= D.size(); ++t) {
        std::vector<sample> prefix(D.begin(), D.begin() + t);
        EXPECT_EQ(tr.argmin(), oracle::least_squares(F, prefix));
        if (t < D.size()) tr.add(D[t]);
    }
}

TEST(RequiredSamplesUniform, FormulaValue) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    calibration_constants k;
    EXPECT_EQ(required_samples_uniform(cfg, k, 8, 2, 0.1), 1337u);
    EXPECT_EQ(required_samples_uniform(cfg, k, 8, 2, 0.1),
              static_cast<std::uint64_t>(std::ceil(2.0 * std::log(800.0) / 0.01)));
}

TEST(RequiredSamplesUniform, HalvingEpsQuadruples) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    calibration_constants k;
    for (double eps : {0.1, 0.05, 0.02}) {
        const double t1 = static_cast<double>(required_samples_uniform(cfg, k, 8, 2, eps));
        const double t2 = static_cast<double>(required_samples_uniform(cfg, k, 8, 2, eps / 2));
        EXPECT_GE(t2, 3.9 * t1);
    }
}

TEST(RequiredSamplesUniform, LinearInActions) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    calibration_constants k;
    k.c_uniform = 1.0;
    // Choose eps so both right-hand sides are integers up to rounding: compare pre-ceiling values.
    const double one = 1.0 * std::log(8.0 / (0.1 * 0.1)) / 0.01;
    EXPECT_EQ(required_samples_uniform(cfg, k, 8, 1, 0.1), static_cast<std::uint64_t>(std::ceil(one)));
    EXPECT_EQ(required_samples_uniform(cfg, k, 8, 2, 0.1), static_cast<std::uint64_t>(std::ceil(2 * one)));
}

TEST(RequiredSamplesUniform, RejectsNonPositiveEps) {
    confidence_config cfg;
    EXPECT_THROW(required_samples_uniform(cfg, {}, 8, 2, 0.0), validation_error);
    EXPECT_THROW(required_samples_uniform(cfg, {}, 8, 2, -1.0), validation_error);
}

namespace {

bool satisfies(const confidence_config& cfg, double c, std::size_t nf, double d, double eps, std::uint64_t T) {
    const double m = std::max({cfg.range_bound, cfg.noise_bound, 1.0});
    return static_cast<double>(T) >= c * m * m * d * std::log(nf * static_cast<double>(T) / cfg.delta) / (eps * eps);
}

} // namespace

TEST(RequiredSamplesEluder, ConstantDimensionIsTight) {
    confidence_config cfg{0.1, 1.0, 1.0, 3.0};
    calibration_constants k;
    for (double d : {1.0, 3.0, 17.0}) {
        for (double eps : {0.5, 0.1, 0.03}) {
            const auto T = required_samples_eluder(cfg, k, 64, [d](std::uint64_t) { return d; }, eps);
            EXPECT_TRUE(satisfies(cfg, 1.0, 64, d, eps, T));
            EXPECT_FALSE(satisfies(cfg, 1.0, 64, d, eps, T - 1));
        }
    }
}

TEST(RequiredSamplesEluder, ZeroDimension) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    EXPECT_EQ(required_samples_eluder(cfg, {}, 8, [](std::uint64_t) { return 0.0; }, 0.1), 1u);
}

TEST(RequiredSamplesEluder, ComparableToUniform) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    calibration_constants k;
    const auto tu = required_samples_uniform(cfg, k, 8, 2, 0.1);
    const auto te = required_samples_eluder(cfg, k, 8, [](std::uint64_t) { return 2.0; }, 0.1);
    EXPECT_LE(te, 2 * tu);
    EXPECT_LE(tu, 2 * te);
}

TEST(RequiredSamplesEluder, LinearGrowthIsUnsatisfiable) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    auto linear = [](std::uint64_t T) { return static_cast<double>(T); };
    EXPECT_THROW(required_samples_eluder(cfg, {}, 8, linear, 0.1), unsatisfiable_error);
}

TEST(RequiredSamplesEluder, GrowingDimensionIsHandled) {
    confidence_config cfg{0.1, 1.0, 1.0, 1.0};
    auto logd = [](std::uint64_t T) { return std::log(static_cast<double>(T) + 1.0); };
    const auto T = required_samples_eluder(cfg, {}, 8, logd, 0.2);
    EXPECT_TRUE(satisfies(cfg, 1.0, 8, logd(T), 0.2, T));
}
