#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace strokesave::metrics {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// An empty optional marks a metric whose denominator is zero; that is
/// different from a metric that evaluates to 0.
struct MetricsReport {
    std::optional<double> precision;
    std::optional<double> sensitivity;
    std::optional<double> f_beta;
    std::optional<double> accuracy;
};

/// Standard definitions: precision = tp/(tp+fp), sensitivity = tp/(tp+fn),
/// accuracy = (tp+tn)/total, f_beta = harmonic mean of precision and
/// sensitivity (beta = 1). Throws on an all-zero matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// 2 / (1/precision + 1/sensitivity); zero when either input is zero.
double harmonic_f_score(double precision, double sensitivity);

ConfusionMatrix evaluate_classifier(const std::vector<bool>& predictions, const std::vector<bool>& labels);

struct ReportRow {
    std::string modality;
    MetricsReport metrics;
};

/// Plain-text table with one Measurement/Value column pair per modality.
std::string format_table(std::span<const ReportRow> rows);

/// "modality,precision,sensitivity,f_beta,accuracy" CSV; undefined cells are
/// written as "undefined".
std::string format_csv(std::span<const ReportRow> rows);
std::vector<ReportRow> parse_csv(const std::string& text);

}  // namespace strokesave::metrics
