#include "strokesave/vascular.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace strokesave::vascular {

namespace {

void check_range(double v, double lo, double hi, const char* name, std::size_t index) {
    if (!(v >= lo && v <= hi)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s %g outside [%g, %g]", name, v, lo, hi);
        throw VitalsError(index, buf);
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_field(std::string_view field, std::size_t index, const char* name) {
    field = trim(field);
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw VitalsError(index, std::string("cannot parse ") + name + " '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

void validate_sample(const VitalsSample& s, std::size_t index) {
    check_range(s.systolic, 40, 300, "systolic", index);
    check_range(s.diastolic, 20, 300, "diastolic", index);
    if (!(s.diastolic < s.systolic)) throw VitalsError(index, "diastolic must be below systolic");
    check_range(s.heart_rate, 20, 250, "heart_rate", index);
    check_range(s.spo2, 50, 100, "spo2", index);
}

void ThresholdPolicy::validate() const {
    if (!(systolic_alert > 0 && heart_rate_alert > 0 && spo2_alert > 0)) {
        throw std::invalid_argument("threshold values must be positive");
    }
    if (consecutive_required < 1) throw std::invalid_argument("consecutive_required must be at least 1");
}

std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::systolic: return "systolic";
        case Criterion::heart_rate: return "heart_rate";
        case Criterion::spo2: return "spo2";
    }
    return "unknown";
}

std::optional<Criterion> parse_criterion(std::string_view s) {
    for (Criterion c : {Criterion::systolic, Criterion::heart_rate, Criterion::spo2}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

StreamEvaluator::StreamEvaluator(ThresholdPolicy policy) : policy_(policy) { policy_.validate(); }

std::optional<Alert> StreamEvaluator::push(const VitalsSample& s) {
    validate_sample(s, seen_);
    if (last_ && s.timestamp_ms <= last_->timestamp_ms) {
        throw VitalsError(seen_, "timestamp " + std::to_string(s.timestamp_ms) + " does not increase past " +
                                     std::to_string(last_->timestamp_ms));
    }
    const bool hits[3] = {s.systolic >= policy_.systolic_alert, s.heart_rate >= policy_.heart_rate_alert,
                          s.spo2 <= policy_.spo2_alert};
    for (int c = 0; c < 3; ++c) runs_[c] = hits[c] ? runs_[c] + 1 : 0;
    if (!alert_) {
        for (int c = 0; c < 3; ++c) {
            if (runs_[c] >= policy_.consecutive_required) {
                alert_ = Alert{seen_, static_cast<Criterion>(c)};
                break;
            }
        }
    }
    last_ = s;
    ++seen_;
    return alert_;
}

std::optional<Alert> evaluate_stream(const ThresholdPolicy& policy, std::span<const VitalsSample> samples) {
    StreamEvaluator ev(policy);
    for (const VitalsSample& s : samples) {
        if (ev.push(s)) break;
    }
    // Keep validating the tail so a bad stream is reported even after an alert.
    if (ev.alert()) {
        for (std::size_t i = ev.samples_seen(); i < samples.size(); ++i) {
            validate_sample(samples[i], i);
            if (samples[i].timestamp_ms <= samples[i - 1].timestamp_ms) {
                throw VitalsError(i, "timestamps must strictly increase");
            }
        }
    }
    return ev.alert();
}

std::vector<double> vascular_features(const VitalsSample& s) {
    return {s.systolic, s.diastolic, s.heart_rate, 100.0 - s.spo2};
}

ModalityConfidence vascular_confidence(const svm::SvmModel& model, const VitalsSample& s) {
    validate_sample(s, 0);
    return ModalityConfidence(svm::probability(model, vascular_features(s)));
}

std::vector<VitalsSample> parse_vitals_csv(std::string_view text) {
    std::vector<VitalsSample> out;
    bool header_seen = false;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t end = text.find('\n', line_start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(line_start, end - line_start));
        line_start = end + 1;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kVitalsCsvHeader) {
                throw VitalsError(0, "expected header '" + std::string(kVitalsCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        for (std::size_t from = 0;;) {
            const std::size_t comma = line.find(',', from);
            fields.push_back(line.substr(from, comma == std::string_view::npos ? std::string_view::npos : comma - from));
            if (comma == std::string_view::npos) break;
            from = comma + 1;
        }
        const std::size_t index = out.size();
        if (fields.size() != 5) throw VitalsError(index, "expected 5 comma-separated fields");
        VitalsSample s;
        s.timestamp_ms = parse_field<std::int64_t>(fields[0], index, "timestamp_ms");
        s.systolic = parse_field<double>(fields[1], index, "systolic");
        s.diastolic = parse_field<double>(fields[2], index, "diastolic");
        s.heart_rate = parse_field<double>(fields[3], index, "heart_rate");
        s.spo2 = parse_field<double>(fields[4], index, "spo2");
        validate_sample(s, index);
        if (!out.empty() && s.timestamp_ms <= out.back().timestamp_ms) {
            throw VitalsError(index, "timestamps must strictly increase");
        }
        out.push_back(s);
    }
    if (!header_seen) throw VitalsError(0, "empty vitals CSV");
    return out;
}

std::string format_vitals_csv(std::span<const VitalsSample> samples) {
    std::string out(kVitalsCsvHeader);
    out += '\n';
    char buf[160];
    for (const VitalsSample& s : samples) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(s.timestamp_ms),
                      s.systolic, s.diastolic, s.heart_rate, s.spo2);
        out += buf;
    }
    return out;
}

}  // namespace strokesave::vascular
