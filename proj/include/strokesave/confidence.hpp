#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace strokesave {

/// Fusion order of the four detectors.
enum class Modality { vocal = 0, vascular = 1, retina = 2, face = 3 };

inline constexpr std::array<Modality, 4> kAllModalities{Modality::vocal, Modality::vascular, Modality::retina,
                                                        Modality::face};

inline std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::vocal: return "vocal";
        case Modality::vascular: return "vascular";
        case Modality::retina: return "retina";
        case Modality::face: return "face";
    }
    return "unknown";
}

inline std::optional<Modality> parse_modality(std::string_view s) {
    for (Modality m : kAllModalities) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

/// Probability in [0, 1] reported by one detector.
class ModalityConfidence {
public:
    explicit ModalityConfidence(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw std::out_of_range("confidence must lie in [0, 1], got " + std::to_string(value));
        }
    }
    double value() const noexcept { return value_; }
    bool operator==(const ModalityConfidence&) const = default;

private:
    double value_;
};

}  // namespace strokesave
