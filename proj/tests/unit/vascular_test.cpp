#include <gtest/gtest.h>

#include <random>

#include "strokesave/vascular.hpp"

using namespace strokesave;
using namespace strokesave::vascular;

namespace {

VitalsSample sample(std::int64_t t, double sys, double dia, double hr, double spo2) { return {t, sys, dia, hr, spo2}; }

std::vector<VitalsSample> steady(std::size_t n, double sys = 120, double hr = 72, double spo2 = 98) {
    std::vector<VitalsSample> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample(static_cast<std::int64_t>(1000 * i), sys, 80, hr, spo2));
    return out;
}

// Scans every window of the required length; independent of the evaluator.
std::optional<Alert> window_oracle(const ThresholdPolicy& p, const std::vector<VitalsSample>& s) {
    const std::size_t k = p.consecutive_required;
    for (std::size_t end = k - 1; end < s.size(); ++end) {
        for (int c = 0; c < 3; ++c) {
            bool all = true;
            for (std::size_t j = end + 1 - k; j <= end; ++j) {
                const VitalsSample& v = s[j];
                const bool hit = c == 0 ? v.systolic >= p.systolic_alert
                                        : c == 1 ? v.heart_rate >= p.heart_rate_alert : v.spo2 <= p.spo2_alert;
                all = all && hit;
            }
            if (all) return Alert{end, static_cast<Criterion>(c)};
        }
    }
    return std::nullopt;
}

std::vector<VitalsSample> random_stream(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> len(1, 40);
    std::uniform_real_distribution<double> sys(150, 200), hr(85, 115), spo2(86, 99);
    std::vector<VitalsSample> out;
    std::int64_t t = 0;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        t += 1 + static_cast<std::int64_t>(rng() % 2000);
        out.push_back(sample(t, sys(rng), 90, hr(rng), spo2(rng)));
    }
    return out;
}

svm::SvmModel trained_vitals_model() {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0, 1);
    std::vector<svm::LabeledPoint> pts;
    for (int i = 0; i < 100; ++i) {
        VitalsSample lo = sample(0, 118 + 8 * n(rng), 76 + 5 * n(rng), 72 + 6 * n(rng), std::min(100.0, 98 + n(rng)));
        VitalsSample hi = sample(0, 185 + 8 * n(rng), 105 + 5 * n(rng), 110 + 6 * n(rng), 90 + n(rng));
        pts.push_back({vascular_features(lo), -1});
        pts.push_back({vascular_features(hi), +1});
    }
    svm::SvmTrainConfig cfg;
    cfg.nonnegative_weights = true;
    return svm::train_calibrated(pts, cfg);
}

}  // namespace

TEST(EvaluateStream, SystolicRunFiresAtThirdSample) {
    auto s = steady(2);
    for (int i = 0; i < 3; ++i) s.push_back(sample(5000 + i, 185, 100, 80, 97));
    const auto alert = evaluate_stream({}, s);
    ASSERT_TRUE(alert.has_value());
    EXPECT_EQ(alert->index, 4u);
    EXPECT_EQ(alert->criterion, Criterion::systolic);
    EXPECT_EQ(to_string(alert->criterion), "systolic");
}

TEST(EvaluateStream, NormalStreamNeverFires) { EXPECT_FALSE(evaluate_stream({}, steady(500)).has_value()); }

TEST(EvaluateStream, NonConsecutiveHeartRateDoesNotFire) {
    std::vector<VitalsSample> s{sample(1, 120, 80, 104, 98), sample(2, 120, 80, 96, 98), sample(3, 120, 80, 104, 98)};
    EXPECT_FALSE(evaluate_stream({}, s).has_value());
    EXPECT_FALSE(window_oracle({}, s).has_value());
}

TEST(EvaluateStream, ThresholdsAreInclusiveAndPrioritized) {
    std::vector<VitalsSample> s;
    for (int i = 0; i < 3; ++i) s.push_back(sample(i + 1, 180, 90, 100, 92));
    const auto alert = evaluate_stream({}, s);
    ASSERT_TRUE(alert);
    EXPECT_EQ(alert->criterion, Criterion::systolic);
    for (auto& v : s) v.systolic = 170;
    EXPECT_EQ(evaluate_stream({}, s)->criterion, Criterion::heart_rate);
    for (auto& v : s) v.heart_rate = 90;
    EXPECT_EQ(evaluate_stream({}, s)->criterion, Criterion::spo2);
    for (auto& v : s) v.spo2 = 92.5;
    EXPECT_FALSE(evaluate_stream({}, s));
}

TEST(EvaluateStream, InvariantViolationsNameTheSample) {
    auto s = steady(6);
    s[4].diastolic = 130;  // above systolic
    try {
        evaluate_stream({}, s);
        FAIL();
    } catch (const VitalsError& e) {
        EXPECT_EQ(e.sample_index(), 4u);
    }
    s = steady(6);
    s[3].timestamp_ms = s[2].timestamp_ms;
    try {
        evaluate_stream({}, s);
        FAIL();
    } catch (const VitalsError& e) {
        EXPECT_EQ(e.sample_index(), 3u);
    }
    s = steady(6);
    s[5].spo2 = 101;
    EXPECT_THROW(evaluate_stream({}, s), VitalsError);
    EXPECT_THROW(StreamEvaluator(ThresholdPolicy{180, 100, 92, 0}), std::invalid_argument);
}

TEST(StreamEvaluator, RejectedSampleLeavesStateUnchanged) {
    StreamEvaluator ev;
    ev.push(sample(10, 190, 90, 80, 97));
    ev.push(sample(20, 190, 90, 80, 97));
    EXPECT_THROW(ev.push(sample(15, 190, 90, 80, 97)), VitalsError);
    EXPECT_THROW(ev.push(sample(30, 190, 200, 80, 97)), VitalsError);
    EXPECT_EQ(ev.samples_seen(), 2u);
    const auto alert = ev.push(sample(30, 190, 90, 80, 97));
    ASSERT_TRUE(alert);
    EXPECT_EQ(alert->index, 2u);
}

TEST(StreamProperty, OnlineBatchAndWindowOracleAgree) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = random_stream(rng);
        ThresholdPolicy p;
        p.consecutive_required = 1 + trial % 4;
        StreamEvaluator online(p);
        std::optional<Alert> first;
        for (const auto& v : s) {
            const auto a = online.push(v);
            if (a && !first) first = a;
        }
        const auto batch = evaluate_stream(p, s);
        EXPECT_EQ(first, batch) << trial;
        EXPECT_EQ(batch, window_oracle(p, s)) << trial;
    }
}

TEST(StreamProperty, RaisingSystolicNeverUnfires) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        auto s = random_stream(rng);
        const auto before = evaluate_stream({}, s);
        const std::size_t i = rng() % s.size();
        s[i].systolic = std::min(300.0, s[i].systolic + 1 + static_cast<double>(rng() % 50));
        const auto after = evaluate_stream({}, s);
        if (before) {
            ASSERT_TRUE(after.has_value()) << trial;
            EXPECT_LE(after->index, before->index);
        }
    }
}

TEST(VitalsCsv, RoundTripAndErrors) {
    std::mt19937_64 rng(3);
    const auto s = random_stream(rng);
    EXPECT_EQ(parse_vitals_csv(format_vitals_csv(s)), s);
    EXPECT_EQ(parse_vitals_csv("timestamp_ms,systolic,diastolic,heart_rate,spo2\r\n1,120,80,70,98\r\n\r\n2, 121 ,80,70,98\n")
                  .size(),
              2u);
    EXPECT_THROW(parse_vitals_csv("ts,sys\n1,2\n"), VitalsError);
    try {
        parse_vitals_csv("timestamp_ms,systolic,diastolic,heart_rate,spo2\n1,120,80,70,98\n2,120,80,x,98\n");
        FAIL();
    } catch (const VitalsError& e) {
        EXPECT_EQ(e.sample_index(), 1u);
    }
    EXPECT_THROW(parse_vitals_csv("timestamp_ms,systolic,diastolic,heart_rate,spo2\n1,120,80,70\n"), VitalsError);
}

TEST(VascularConfidence, SeparatesNormalFromStrokeAndIsMonotone) {
    const svm::SvmModel m = trained_vitals_model();
    for (double w : m.weights) EXPECT_GE(w, 0.0);
    const double low = vascular_confidence(m, sample(0, 120, 80, 70, 99)).value();
    const double high = vascular_confidence(m, sample(0, 200, 110, 130, 85)).value();
    EXPECT_LT(low, 0.5);
    EXPECT_GT(high, 0.5);
    EXPECT_GT(low, 0.0);
    EXPECT_LT(high, 1.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> sys(100, 220), hr(50, 150), spo2(80, 100);
    for (int i = 0; i < 300; ++i) {
        VitalsSample s = sample(0, sys(rng), 70, hr(rng), spo2(rng));
        const double base = vascular_confidence(m, s).value();
        VitalsSample up = s;
        up.systolic += 5;
        EXPECT_GE(vascular_confidence(m, up).value(), base);
        up = s;
        up.heart_rate += 5;
        EXPECT_GE(vascular_confidence(m, up).value(), base);
        up = s;
        up.spo2 -= 2;
        EXPECT_GE(vascular_confidence(m, up).value(), base);
    }
}
