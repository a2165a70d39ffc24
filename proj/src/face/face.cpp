#include "strokesave/face.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace strokesave::face {

namespace {

// 1-based mirror pairs of the 68-point scheme. Points not listed lie on the
// vertical midline and map to themselves.
constexpr std::pair<int, int> kMirrorPairs[] = {
    {1, 17},  {2, 16},  {3, 15},  {4, 14},  {5, 13},  {6, 12},  {7, 11},  {8, 10},   // jaw
    {18, 27}, {19, 26}, {20, 25}, {21, 24}, {22, 23},                                // brows
    {32, 36}, {33, 35},                                                              // nostrils
    {37, 46}, {38, 45}, {39, 44}, {40, 43}, {41, 48}, {42, 47},                      // eyes
    {49, 55}, {50, 54}, {51, 53}, {56, 60}, {57, 59}, {61, 65}, {62, 64}, {66, 68},  // mouth
};

std::array<std::size_t, kLandmarkCount> build_mirror_table() {
    std::array<std::size_t, kLandmarkCount> t{};
    for (std::size_t i = 0; i < kLandmarkCount; ++i) t[i] = i;
    for (auto [a, b] : kMirrorPairs) {
        t[a - 1] = static_cast<std::size_t>(b - 1);
        t[b - 1] = static_cast<std::size_t>(a - 1);
    }
    return t;
}

const std::array<std::size_t, kLandmarkCount>& mirror_table() {
    static const auto table = build_mirror_table();
    return table;
}

std::vector<std::size_t> one_based(std::initializer_list<int> idx) {
    std::vector<std::size_t> out;
    for (int i : idx) out.push_back(static_cast<std::size_t>(i - 1));
    return out;
}

FaceRegions build_regions() {
    FaceRegions r;
    r[Region::left_brow] = one_based({18, 19, 20, 21, 22});
    r[Region::right_brow] = one_based({27, 26, 25, 24, 23});
    r[Region::left_eye] = one_based({37, 38, 39, 40, 41, 42});
    r[Region::right_eye] = one_based({46, 45, 44, 43, 48, 47});
    r[Region::nose] = one_based({28, 29, 30, 31, 34, 32, 36, 33, 35});
    r[Region::mouth] = one_based({52, 58, 63, 67, 49, 55, 50, 54, 51, 53, 56, 60, 57, 59, 61, 65, 62, 64, 66, 68});
    r[Region::left_cheek] = one_based({2, 3, 4, 5, 6, 7});
    r[Region::right_cheek] = one_based({16, 15, 14, 13, 12, 11});
    return r;
}

struct Token {
    std::string_view text;
    std::size_t line;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t line = 1;
    std::size_t i = 0;
    auto separator = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ':' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        if (separator(text[i])) {
            if (text[i] == '\n') ++line;
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < text.size() && !separator(text[i])) ++i;
        tokens.push_back({text.substr(start, i - start), line});
    }
    return tokens;
}

double parse_number(const Token& t) {
    double v = 0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw LandmarkError(LandmarkErrorKind::malformed,
                            "line " + std::to_string(t.line) + ": expected a number, got '" + std::string(t.text) + "'");
    }
    return v;
}

double canonical_angle(double y, double x) {
    const double a = std::atan2(y, x);
    return a <= -std::numbers::pi ? std::numbers::pi : a;
}

double wrap_angle(double d) {
    if (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    if (d <= -std::numbers::pi) d += 2 * std::numbers::pi;
    return d;
}

}  // namespace

LandmarkSet parse_landmarks(std::string_view text) {
    const std::vector<Token> tokens = tokenize(text);
    std::size_t pos = 0;
    auto expect = [&](std::string_view word) {
        if (pos >= tokens.size()) {
            throw LandmarkError(LandmarkErrorKind::malformed, "unexpected end of file, expected '" + std::string(word) + "'");
        }
        if (tokens[pos].text != word) {
            throw LandmarkError(LandmarkErrorKind::malformed, "line " + std::to_string(tokens[pos].line) + ": expected '" +
                                                                  std::string(word) + "', got '" +
                                                                  std::string(tokens[pos].text) + "'");
        }
        ++pos;
    };
    auto number = [&]() {
        if (pos >= tokens.size()) throw LandmarkError(LandmarkErrorKind::malformed, "unexpected end of file");
        return parse_number(tokens[pos++]);
    };

    expect("version");
    number();
    expect("n_points");
    const double declared = number();
    if (declared != static_cast<double>(kLandmarkCount)) {
        throw LandmarkError(LandmarkErrorKind::wrong_count,
                            "n_points must be 68, file declares " + std::to_string(static_cast<long long>(declared)));
    }
    expect("{");
    std::vector<double> coords;
    while (pos < tokens.size() && tokens[pos].text != "}") coords.push_back(number());
    expect("}");
    if (pos != tokens.size()) {
        throw LandmarkError(LandmarkErrorKind::malformed,
                            "line " + std::to_string(tokens[pos].line) + ": trailing content after '}'");
    }
    if (coords.size() % 2 != 0) throw LandmarkError(LandmarkErrorKind::malformed, "odd number of coordinates");
    if (coords.size() != 2 * kLandmarkCount) {
        throw LandmarkError(LandmarkErrorKind::wrong_count,
                            "expected 68 points, found " + std::to_string(coords.size() / 2));
    }
    LandmarkSet lm;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) lm.points[i] = {coords[2 * i], coords[2 * i + 1]};
    return lm;
}

std::string format_landmarks(const LandmarkSet& lm) {
    std::string out = "version: 1\nn_points: 68\n{\n";
    char buf[64];
    for (const Point& p : lm.points) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
        out += buf;
    }
    out += "}\n";
    return out;
}

std::size_t mirror_index(std::size_t i) {
    if (i >= kLandmarkCount) throw LandmarkError(LandmarkErrorKind::degenerate, "landmark index out of range");
    return mirror_table()[i];
}

LandmarkSet mirror(const LandmarkSet& lm) {
    LandmarkSet out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const Point& src = lm.points[mirror_table()[i]];
        out.points[i] = {-src.x, src.y};
    }
    return out;
}

Point left_eye_center(const LandmarkSet& lm) { return region_centroid(lm, standard_regions()[Region::left_eye]); }
Point right_eye_center(const LandmarkSet& lm) { return region_centroid(lm, standard_regions()[Region::right_eye]); }

LandmarkSet normalize_shape(const LandmarkSet& lm) {
    const Point l = left_eye_center(lm);
    const Point r = right_eye_center(lm);
    const double d = std::hypot(r.x - l.x, r.y - l.y);
    if (!(d > 0) || !std::isfinite(d)) {
        throw LandmarkError(LandmarkErrorKind::degenerate, "eye centers coincide; cannot normalize");
    }
    const Point mid{(l.x + r.x) / 2, (l.y + r.y) / 2};
    LandmarkSet out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        out.points[i] = {(lm.points[i].x - mid.x) / d, (lm.points[i].y - mid.y) / d};
    }
    return out;
}

std::string_view to_string(Region r) {
    switch (r) {
        case Region::left_brow: return "left_brow";
        case Region::right_brow: return "right_brow";
        case Region::left_eye: return "left_eye";
        case Region::right_eye: return "right_eye";
        case Region::nose: return "nose";
        case Region::mouth: return "mouth";
        case Region::left_cheek: return "left_cheek";
        case Region::right_cheek: return "right_cheek";
    }
    return "unknown";
}

const FaceRegions& standard_regions() {
    static const FaceRegions regions = build_regions();
    return regions;
}

Point region_centroid(const LandmarkSet& lm, std::span<const std::size_t> indices) {
    if (indices.empty()) throw LandmarkError(LandmarkErrorKind::degenerate, "region has no points");
    std::vector<bool> used(kLandmarkCount, false);
    double sx = 0, sy = 0;
    for (std::size_t i : indices) {
        if (i >= kLandmarkCount) throw LandmarkError(LandmarkErrorKind::degenerate, "landmark index out of range");
        if (used[i]) continue;
        used[i] = true;
        const std::size_t m = mirror_table()[i];
        const bool pair_inside = m != i && std::find(indices.begin(), indices.end(), m) != indices.end();
        if (pair_inside) {
            used[m] = true;
            sx += lm.points[i].x + lm.points[m].x;
            sy += lm.points[i].y + lm.points[m].y;
        } else {
            sx += lm.points[i].x;
            sy += lm.points[i].y;
        }
    }
    const auto n = static_cast<double>(indices.size());
    return {sx / n, sy / n};
}

std::vector<double> DisplacementFeature::as_vector() const {
    return {alpha.magnitude, alpha.angle, beta.magnitude, beta.angle, asymmetry.magnitude, asymmetry.angle};
}

DisplacementFeature displacement_features(const LandmarkSet& lm, const FaceRegions& regions) {
    for (Region r : {Region::nose, Region::left_cheek, Region::right_cheek}) {
        if (regions[r].empty()) {
            throw LandmarkError(LandmarkErrorKind::degenerate, "region " + std::string(to_string(r)) + " is empty");
        }
    }
    const LandmarkSet n = normalize_shape(lm);
    const Point nose = region_centroid(n, regions[Region::nose]);
    const Point left = region_centroid(n, regions[Region::left_cheek]);
    const Point right = region_centroid(n, regions[Region::right_cheek]);

    const double lx = left.x - nose.x, ly = left.y - nose.y;
    const double rx = right.x - nose.x, ry = right.y - nose.y;

    DisplacementFeature f;
    f.alpha = {std::hypot(lx, ly), canonical_angle(ly, lx)};
    f.beta = {std::hypot(rx, ry), canonical_angle(ry, -rx)};
    f.asymmetry = {std::abs(f.alpha.magnitude - f.beta.magnitude), std::abs(wrap_angle(f.alpha.angle - f.beta.angle))};
    return f;
}

LandmarkSet reference_face() {
    LandmarkSet lm;
    auto set = [&](int one_based_index, double x, double y) { lm.points[one_based_index - 1] = {x, y}; };
    for (int k = 0; k <= 7; ++k) {
        const double t = std::numbers::pi * k / 16.0;
        set(k + 1, -0.95 * std::cos(t), 1.25 * std::sin(t));
    }
    set(9, 0.0, 1.25);
    const double brow[5][2] = {{-0.85, -0.3}, {-0.7, -0.38}, {-0.5, -0.4}, {-0.3, -0.38}, {-0.15, -0.32}};
    for (int k = 0; k < 5; ++k) set(18 + k, brow[k][0], brow[k][1]);
    set(28, 0.0, 0.12);
    set(29, 0.0, 0.25);
    set(30, 0.0, 0.38);
    set(31, 0.0, 0.5);
    set(32, -0.2, 0.62);
    set(33, -0.1, 0.66);
    set(34, 0.0, 0.68);
    const double eye[6][2] = {{-0.7, 0.0}, {-0.575, -0.07}, {-0.425, -0.07}, {-0.3, 0.0}, {-0.425, 0.07}, {-0.575, 0.07}};
    for (int k = 0; k < 6; ++k) set(37 + k, eye[k][0], eye[k][1]);
    set(49, -0.4, 0.95);
    set(50, -0.25, 0.87);
    set(51, -0.1, 0.83);
    set(52, 0.0, 0.85);
    set(58, 0.0, 1.12);
    set(59, -0.12, 1.1);
    set(60, -0.27, 1.05);
    set(61, -0.32, 0.95);
    set(62, -0.1, 0.91);
    set(63, 0.0, 0.92);
    set(67, 0.0, 1.0);
    set(68, -0.1, 0.99);
    for (auto [a, b] : kMirrorPairs) {
        const Point& left = lm.points[static_cast<std::size_t>(a - 1)];
        const Point& right = lm.points[static_cast<std::size_t>(b - 1)];
        // Fill whichever side of the pair was not set above.
        if (left.x < 0) {
            lm.points[static_cast<std::size_t>(b - 1)] = {-left.x, left.y};
        } else {
            lm.points[static_cast<std::size_t>(a - 1)] = {-right.x, right.y};
        }
    }
    return lm;
}

ModalityConfidence paralysis_confidence(const svm::SvmModel& model, const LandmarkSet& lm) {
    return ModalityConfidence(svm::probability(model, displacement_features(lm).as_vector()));
}

}  // namespace strokesave::face
