#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "strokesave/confidence.hpp"
#include "strokesave/svm.hpp"

namespace strokesave::face {

inline constexpr std::size_t kLandmarkCount = 68;

struct Point {
    double x = 0;
    double y = 0;
    bool operator==(const Point&) const = default;
};

/// 68 points in the usual annotation order, image coordinates (y down).
/// "Left" and "right" below always mean the image side.
struct LandmarkSet {
    std::array<Point, kLandmarkCount> points{};
    bool operator==(const LandmarkSet&) const = default;
};

enum class LandmarkErrorKind { wrong_count, malformed, degenerate };

class LandmarkError : public std::runtime_error {
public:
    LandmarkError(LandmarkErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    LandmarkErrorKind kind() const noexcept { return kind_; }

private:
    LandmarkErrorKind kind_;
};

/// Text "pts" format:
///   version: 1
///   n_points: 68
///   {
///   x y      (68 lines)
///   }
/// Any run of whitespace separates tokens and a colon may touch its key.
LandmarkSet parse_landmarks(std::string_view text);
std::string format_landmarks(const LandmarkSet& lm);

/// 0-based index of the horizontally mirrored counterpart of each point.
std::size_t mirror_index(std::size_t i);

/// Reflects x -> -x and relabels every point with its mirror counterpart,
/// so the result is again a valid annotation of the reflected face.
LandmarkSet mirror(const LandmarkSet& lm);

/// Eye centers are the means of points 37-42 and 43-48 (1-based).
Point left_eye_center(const LandmarkSet& lm);
Point right_eye_center(const LandmarkSet& lm);

/// Moves the midpoint between the eye centers to the origin and scales so
/// the interocular distance is 1. No rotation.
LandmarkSet normalize_shape(const LandmarkSet& lm);

enum class Region : std::uint8_t {
    left_brow,
    right_brow,
    left_eye,
    right_eye,
    nose,
    mouth,
    left_cheek,
    right_cheek,
};

inline constexpr std::size_t kRegionCount = 8;
std::string_view to_string(Region r);

/// Eight named 0-based index lists. The right-hand lists walk the mirror
/// images of the left-hand lists in the same order.
struct FaceRegions {
    std::array<std::vector<std::size_t>, kRegionCount> indices;

    const std::vector<std::size_t>& operator[](Region r) const { return indices[static_cast<std::size_t>(r)]; }
    std::vector<std::size_t>& operator[](Region r) { return indices[static_cast<std::size_t>(r)]; }
};

const FaceRegions& standard_regions();

/// Mean of the listed points. Mirror pairs inside one list are summed
/// together first, so a reflected face gives the exactly reflected centroid.
Point region_centroid(const LandmarkSet& lm, std::span<const std::size_t> indices);

struct Displacement {
    double magnitude = 0;
    double angle = 0;  // (-pi, pi]
    bool operator==(const Displacement&) const = default;
};

/// alpha: left cheek centroid minus nose centroid, as (|d|, atan2(dy, dx)).
/// beta: the same for the right cheek, measured in the mirrored frame
/// (atan2(dy, -dx)) so a symmetric face has alpha == beta.
/// asymmetry: (|alpha.magnitude - beta.magnitude|, |wrap(alpha.angle - beta.angle)|).
struct DisplacementFeature {
    Displacement alpha;
    Displacement beta;
    Displacement asymmetry;

    std::vector<double> as_vector() const;
    bool operator==(const DisplacementFeature&) const = default;
};

/// Normalizes the shape, then measures cheek displacement against the nose.
DisplacementFeature displacement_features(const LandmarkSet& lm, const FaceRegions& regions = standard_regions());

/// Symmetric reference face, already normalized (eye centers at (-0.5, 0)
/// and (0.5, 0)). Used as a template by the synthetic generator.
LandmarkSet reference_face();

ModalityConfidence paralysis_confidence(const svm::SvmModel& model, const LandmarkSet& lm);

}  // namespace strokesave::face
