#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "strokesave/confidence.hpp"
#include "strokesave/svm.hpp"

namespace strokesave::vascular {

struct VitalsSample {
    std::int64_t timestamp_ms = 0;
    double systolic = 0;    // mmHg
    double diastolic = 0;   // mmHg
    double heart_rate = 0;  // beats/min
    double spo2 = 0;        // percent

    bool operator==(const VitalsSample&) const = default;
};

/// Invariant violation; `sample_index` is the position in the stream.
class VitalsError : public std::runtime_error {
public:
    VitalsError(std::size_t sample_index, const std::string& what)
        : std::runtime_error("sample " + std::to_string(sample_index) + ": " + what), index_(sample_index) {}
    std::size_t sample_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Range checks only (timestamp ordering is a stream property).
void validate_sample(const VitalsSample& s, std::size_t index);

struct ThresholdPolicy {
    double systolic_alert = 180;
    double heart_rate_alert = 100;
    double spo2_alert = 92;
    std::size_t consecutive_required = 3;

    void validate() const;
    bool operator==(const ThresholdPolicy&) const = default;
};

enum class Criterion { systolic, heart_rate, spo2 };
std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view s);

struct Alert {
    std::size_t index = 0;  // sample at which the run reached its required length
    Criterion criterion = Criterion::systolic;
    bool operator==(const Alert&) const = default;
};

/// Online form of evaluate_stream. A criterion fires once it holds
/// (systolic >= limit, heart_rate >= limit, spo2 <= limit) on
/// `consecutive_required` samples in a row. When several fire on the same
/// sample the order above decides. The first alert is latched.
class StreamEvaluator {
public:
    explicit StreamEvaluator(ThresholdPolicy policy = {});

    /// Validates and consumes one sample. A rejected sample leaves the
    /// evaluator untouched. Returns the latched alert, if any.
    std::optional<Alert> push(const VitalsSample& s);

    const std::optional<Alert>& alert() const noexcept { return alert_; }
    std::size_t samples_seen() const noexcept { return seen_; }
    const ThresholdPolicy& policy() const noexcept { return policy_; }
    const std::optional<VitalsSample>& last_sample() const noexcept { return last_; }

    bool operator==(const StreamEvaluator&) const = default;

private:
    ThresholdPolicy policy_;
    std::size_t seen_ = 0;
    std::size_t runs_[3] = {0, 0, 0};
    std::optional<VitalsSample> last_;
    std::optional<Alert> alert_;
};

std::optional<Alert> evaluate_stream(const ThresholdPolicy& policy, std::span<const VitalsSample> samples);

/// (systolic, diastolic, heart_rate, 100 - spo2): every coordinate grows with risk.
std::vector<double> vascular_features(const VitalsSample& s);

ModalityConfidence vascular_confidence(const svm::SvmModel& model, const VitalsSample& s);

inline constexpr std::string_view kVitalsCsvHeader = "timestamp_ms,systolic,diastolic,heart_rate,spo2";

/// Parses the CSV form; rows are validated as one stream.
std::vector<VitalsSample> parse_vitals_csv(std::string_view text);
std::string format_vitals_csv(std::span<const VitalsSample> samples);

}  // namespace strokesave::vascular
