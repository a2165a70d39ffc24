#pragma once

// Shared helpers for session-level tests: stub scorers and a random command
// driver that exercises every transition, including the rejected ones.

#include <random>
#include <string>
#include <vector>

#include "strokesave/session.hpp"
#include "strokesave/svm.hpp"

namespace fixtures {

using namespace strokesave;

inline vascular::VitalsSample vitals(std::int64_t t, double sys, double hr = 72, double spo2 = 98) {
    return {t, sys, 80, hr, spo2};
}

inline svm::SvmModel equal_weight_fusion() {
    svm::SvmModel m;
    m.weights = {1, 1, 1, 1};
    m.bias = 0;
    m.feature_means = {0.5, 0.5, 0.5, 0.5};
    m.feature_scales = {0.25, 0.25, 0.25, 0.25};
    m.platt_a = -1.5;
    m.platt_b = 0;
    return m;
}

inline session::VascularScorer stub_vascular() {
    return [](const vascular::VitalsSample& s) { return ModalityConfidence(s.systolic >= 160 ? 0.9 : 0.2); };
}

inline session::FusionScorer stub_fuse() {
    return [](const fusion::FusionInput& in) { return fusion::fuse(equal_weight_fusion(), in, "stub"); };
}

/// Applies `steps` random commands. Rejections are expected and swallowed;
/// the caller checks invariants on the result.
struct RandomDriver {
    std::mt19937_64 rng;
    std::int64_t t = 0;
    std::int64_t clock = 1000;

    explicit RandomDriver(std::uint64_t seed) : rng(seed) {}

    bool step(session::Session& s) {
        std::uniform_int_distribution<int> pick(0, 9);
        std::uniform_real_distribution<double> u(0, 1);
        clock += 7;
        try {
            switch (pick(rng)) {
                case 0:
                case 1:
                case 2:
                case 3: {
                    // Vitals; about half of them high enough to build an alert run.
                    t += 1 + static_cast<std::int64_t>(rng() % 1500);
                    const double sys = u(rng) < 0.5 ? 185 : 120;
                    s.ingest_vitals(vitals(t, sys, 60 + 50 * u(rng), 90 + 9 * u(rng)), clock);
                    break;
                }
                case 4:
                case 5:
                case 6: {
                    const auto kind = static_cast<session::CaptureKind>(rng() % 3);
                    s.record_capture(kind, {std::string(64, "0123456789abcdef"[rng() % 16]), 10},
                                     ModalityConfidence(u(rng)), clock);
                    break;
                }
                case 7:
                case 8: s.diagnose(stub_vascular(), stub_fuse(), clock); break;
                case 9: s.clear(clock); break;
            }
            return true;
        } catch (const session::SessionError&) {
            return false;
        } catch (const vascular::VitalsError&) {
            return false;
        }
    }
};

/// True when a DIAGNOSED log holds alert, then both tier-2 confidences,
/// before the diagnosis, with no clear after the last alert.
inline bool tiers_in_order(const std::vector<session::Event>& events) {
    std::size_t last_alert = events.size();
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].kind == session::EventKind::alert) last_alert = i;
        if (events[i].kind != session::EventKind::diagnosis) continue;
        if (last_alert == events.size()) return false;
        bool voice = false, face = false;
        for (std::size_t j = last_alert + 1; j < i; ++j) {
            if (events[j].kind == session::EventKind::clear) return false;
            if (events[j].kind == session::EventKind::confidence) {
                const auto m = events[j].payload.at("modality").get<std::string>();
                voice = voice || m == "vocal";
                face = face || m == "face";
            }
        }
        if (!voice || !face) return false;
    }
    return true;
}

}  // namespace fixtures
