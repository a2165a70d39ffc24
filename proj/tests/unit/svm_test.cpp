#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "strokesave/svm.hpp"
#include "support/svm_grid_oracle.hpp"

using namespace strokesave::svm;
namespace oracle = strokesave::testing;

namespace {

std::vector<LabeledPoint> to_points(const std::vector<oracle::GridPoint2>& pts) {
    std::vector<LabeledPoint> out;
    for (const auto& p : pts) out.push_back({{p.x[0], p.x[1]}, p.label});
    return out;
}

std::vector<LabeledPoint> blobs(std::size_t n, std::uint64_t seed, double margin = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<LabeledPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 ? 1 : -1;
        const double cx = label * (1.0 + margin / 2.0);
        pts.push_back({{cx + u(rng), 0.5 * cx + u(rng)}, label});
    }
    return pts;
}

double objective_of(const SvmModel& m, std::span<const LabeledPoint> pts, double lambda) {
    std::vector<std::vector<double>> z;
    std::vector<int> y;
    for (const auto& p : pts) {
        z.push_back(standardize(m, p.x));
        y.push_back(p.label);
    }
    return hinge_objective(m.weights, m.bias, lambda, z, y);
}

}  // namespace

TEST(SvmTrain, OneDimensionalSeparable) {
    std::vector<LabeledPoint> pts{{{-1.0}, -1}, {{1.0}, 1}};
    SvmModel m = svm_train(pts, {});
    EXPECT_LT(decision(m, std::vector<double>{-1.0}), 0.0);
    EXPECT_GT(decision(m, std::vector<double>{1.0}), 0.0);
}

TEST(SvmTrain, SeparableBlobsReachFullAccuracy) {
    const auto pts = blobs(20, 3);
    SvmModel m = svm_train(pts, {});
    for (const auto& p : pts) EXPECT_EQ(decision(m, p.x) > 0 ? 1 : -1, p.label);
}

TEST(SvmTrain, ObjectiveWithinFivePercentOfGridOptimum) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 3; ++trial) {
        const auto inst = oracle::random_separable_instance(rng);
        const auto grid = oracle::grid_search(inst, 0.01);
        const auto pts = to_points(inst);
        SvmModel m = svm_train(pts, {});
        const double obj = objective_of(m, pts, 0.01);
        EXPECT_LE(obj, 1.05 * grid.objective) << "trial " << trial;
        for (std::size_t i = 0; i < inst.size(); ++i) {
            const double g = grid.w0 * grid.standardized[i][0] + grid.w1 * grid.standardized[i][1] + grid.b;
            EXPECT_EQ(decision(m, pts[i].x) > 0, g > 0) << "trial " << trial << " point " << i;
        }
    }
}

TEST(SvmTrain, ObjectiveNeverAboveZeroStart) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::vector<LabeledPoint> pts;
        for (int i = 0; i < 30; ++i) pts.push_back({{n(rng), n(rng), n(rng)}, n(rng) > 0 ? 1 : -1});
        pts[0].label = 1;
        pts[1].label = -1;
        SvmTrainConfig cfg;
        cfg.seed = seed;
        cfg.iterations = 500;
        SvmModel m = svm_train(pts, cfg);
        EXPECT_LE(objective_of(m, pts, cfg.lambda), 1.0);
    }
}

TEST(SvmTrain, Errors) {
    std::vector<LabeledPoint> one_class{{{1.0}, 1}, {{2.0}, 1}};
    EXPECT_THROW(svm_train(one_class, {}), SvmError);
    std::vector<LabeledPoint> ragged{{{1.0}, 1}, {{2.0, 3.0}, -1}};
    EXPECT_THROW(svm_train(ragged, {}), SvmError);
    std::vector<LabeledPoint> single{{{1.0}, 1}};
    EXPECT_THROW(svm_train(single, {}), SvmError);
}

TEST(SvmTrain, ScalingInputsPreservesLabels) {
    const auto pts = blobs(40, 9, 0.2);
    SvmModel m = svm_train(pts, {});
    for (double c : {0.001, 3.0, 1000.0}) {
        std::vector<LabeledPoint> scaled = pts;
        for (auto& p : scaled) {
            for (double& v : p.x) v *= c;
        }
        SvmModel ms = svm_train(scaled, {});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_EQ(decision(m, pts[i].x) > 0, decision(ms, scaled[i].x) > 0) << "c=" << c << " i=" << i;
        }
    }
}

TEST(SvmTrain, NonnegativeWeightsAreProjected) {
    std::vector<LabeledPoint> pts;
    for (int i = 0; i < 20; ++i) {
        const int label = i % 2 ? 1 : -1;
        pts.push_back({{label * 1.0 + 0.1 * i, -label * 2.0 + 0.05 * i}, label});
    }
    SvmTrainConfig cfg;
    cfg.nonnegative_weights = true;
    SvmModel m = train_calibrated(pts, cfg);
    for (double w : m.weights) EXPECT_GE(w, 0.0);
    std::vector<double> x{0.0, 0.0};
    double prev = probability(m, x);
    for (int step = 0; step < 50; ++step) {
        x[1] += 0.2;
        const double p = probability(m, x);
        EXPECT_GE(p, prev);
        prev = p;
    }
}

TEST(Decision, DotProductPlusBias) {
    SvmModel m{{1.0, 0.0}, 0.0, {0.0, 0.0}, {1.0, 1.0}};
    EXPECT_EQ(decision(m, std::vector<double>{2.0, 5.0}), 2.0);
    EXPECT_EQ(decision(m, std::vector<double>{0.0, 7.0}), 0.0);
    EXPECT_EQ(decision(m, std::vector<double>{2.0, 10.0}), decision(m, std::vector<double>{2.0, 5.0}));
    EXPECT_THROW(decision(m, std::vector<double>{1.0}), SvmError);
}

TEST(Calibrate, SymmetricMarginsGiveHalfAtZero) {
    std::vector<double> margins{-1.0, 1.0};
    std::vector<int> labels{-1, 1};
    SvmModel m = calibrate(SvmModel{{1.0}, 0.0, {0.0}, {1.0}}, margins, labels);
    EXPECT_NEAR(sigmoid_probability(m.platt_a, m.platt_b, 0.0), 0.5, 1e-6);
    EXPECT_LT(m.platt_a, 0.0);
}

TEST(Calibrate, MonotoneAndBeatsBaseline) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> margins;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        const int label = i % 2 ? 1 : -1;
        margins.push_back(0.7 * label + 0.8 * n(rng));
        labels.push_back(label);
    }
    SvmModel m = calibrate(SvmModel{{1.0}, 0.0, {0.0}, {1.0}}, margins, labels);
    EXPECT_LE(calibration_loss(m.platt_a, m.platt_b, margins, labels), calibration_loss(-1.0, 0.0, margins, labels));
    EXPECT_LT(m.platt_a, 0.0);
    double prev = 0.0;
    for (double x = -5.0; x <= 5.0; x += 0.1) {
        const double p = sigmoid_probability(m.platt_a, m.platt_b, x);
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        EXPECT_GE(p, prev);
        prev = p;
    }
}

TEST(Calibrate, RejectsSingleClass) {
    std::vector<double> margins{1.0, 2.0};
    std::vector<int> labels{1, 1};
    EXPECT_THROW(calibrate(SvmModel{}, margins, labels), SvmError);
}

TEST(SvmIo, RoundTrip) {
    SvmModel m = train_calibrated(blobs(20, 4), {});
    EXPECT_EQ(deserialize_svm(serialize(m)), m);
}
