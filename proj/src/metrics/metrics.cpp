#include "strokesave/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace strokesave::metrics {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string cell(const std::optional<double>& v, bool percent) {
    if (!v) return "undefined";
    char buf[32];
    if (percent) {
        std::snprintf(buf, sizeof(buf), "%.2f%%", *v * 100.0);
    } else {
        std::snprintf(buf, sizeof(buf), "%.3f", *v);
    }
    return buf;
}

std::string csv_cell(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

double harmonic_f_score(double precision, double sensitivity) {
    if (precision <= 0.0 || sensitivity <= 0.0) return 0.0;
    return 2.0 / (1.0 / precision + 1.0 / sensitivity);
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw MetricsError("confusion matrix is empty");
    MetricsReport r;
    r.precision = ratio(cm.tp, cm.tp + cm.fp);
    r.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    if (r.precision && r.sensitivity) r.f_beta = harmonic_f_score(*r.precision, *r.sensitivity);
    return r;
}

ConfusionMatrix evaluate_classifier(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
    if (predictions.size() != labels.size()) {
        throw MetricsError("predictions (" + std::to_string(predictions.size()) + ") and labels (" +
                           std::to_string(labels.size()) + ") differ in length");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i]) {
            labels[i] ? ++cm.tp : ++cm.fp;
        } else {
            labels[i] ? ++cm.fn : ++cm.tn;
        }
    }
    return cm;
}

std::string format_table(std::span<const ReportRow> rows) {
    constexpr std::size_t kName = 13, kValue = 9;
    std::ostringstream os;
    for (const auto& r : rows) os << pad(r.modality, kName + kValue) << "  ";
    os << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) os << pad("Measurement", kName) << pad("Value", kValue) << "  ";
    os << '\n';
    const char* names[] = {"Precision", "Sensitivity", "F-Beta", "Accuracy"};
    for (int m = 0; m < 4; ++m) {
        for (const auto& r : rows) {
            const std::optional<double>* v = nullptr;
            switch (m) {
                case 0: v = &r.metrics.precision; break;
                case 1: v = &r.metrics.sensitivity; break;
                case 2: v = &r.metrics.f_beta; break;
                default: v = &r.metrics.accuracy; break;
            }
            os << pad(names[m], kName) << pad(cell(*v, m == 3), kValue) << "  ";
        }
        os << '\n';
    }
    return os.str();
}

std::string format_csv(std::span<const ReportRow> rows) {
    std::ostringstream os;
    os << "modality,precision,sensitivity,f_beta,accuracy\n";
    for (const auto& r : rows) {
        os << r.modality << ',' << csv_cell(r.metrics.precision) << ',' << csv_cell(r.metrics.sensitivity) << ','
           << csv_cell(r.metrics.f_beta) << ',' << csv_cell(r.metrics.accuracy) << '\n';
    }
    return os.str();
}

std::vector<ReportRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<ReportRow> rows;
    if (!std::getline(in, line) || line.rfind("modality,", 0) != 0) throw MetricsError("missing report header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string fields[5];
        for (auto& f : fields) {
            if (!std::getline(ls, f, ',')) throw MetricsError("short report row: " + line);
        }
        auto parse = [&](const std::string& s) -> std::optional<double> {
            if (s == "undefined") return std::nullopt;
            try {
                return std::stod(s);
            } catch (const std::exception&) {
                throw MetricsError("bad report cell '" + s + "'");
            }
        };
        rows.push_back({fields[0], {parse(fields[1]), parse(fields[2]), parse(fields[3]), parse(fields[4])}});
    }
    return rows;
}

}  // namespace strokesave::metrics
