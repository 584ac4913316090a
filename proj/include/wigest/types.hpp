#pragma once

// Vocabulary shared by the extractor, segmenter, gesture engine and fusion.

#include <string>
#include <string_view>

#include "wigest/error.hpp"

namespace wigest {

enum class PrimitiveKind { RisingEdge, FallingEdge, Pause };
enum class Speed { High, Medium, Low, NA };
enum class Magnitude { High, Low, NA };

inline constexpr double kHighSpeedMaxS = 0.75;
inline constexpr double kMediumSpeedMaxS = 1.5;
inline constexpr double kMinPauseS = 0.5;

// High < 0.75 s <= Medium <= 1.5 s < Low
constexpr Speed speed_from_duration(double duration_s) noexcept {
    if (duration_s < kHighSpeedMaxS) return Speed::High;
    if (duration_s <= kMediumSpeedMaxS) return Speed::Medium;
    return Speed::Low;
}

struct PrimitiveEvent {
    PrimitiveKind kind = PrimitiveKind::Pause;
    double start_s = 0.0;
    double end_s = 0.0;
    double amplitude_db = 0.0;
    Speed speed = Speed::NA;
    Magnitude magnitude = Magnitude::NA;

    double duration_s() const noexcept { return end_s - start_s; }
    double mid_s() const noexcept { return 0.5 * (start_s + end_s); }
    bool is_edge() const noexcept { return kind != PrimitiveKind::Pause; }

    friend bool operator==(const PrimitiveEvent&, const PrimitiveEvent&) = default;
};

// Per-session parameters learnt from the preamble.
struct CalibrationProfile {
    double preamble_drop_db = 0.0;
    int motion_level = 5;
    bool polarity_flipped = false;
    double baseline_rssi_dbm = 0.0;
};

constexpr PrimitiveKind flipped(PrimitiveKind k) noexcept {
    switch (k) {
        case PrimitiveKind::RisingEdge: return PrimitiveKind::FallingEdge;
        case PrimitiveKind::FallingEdge: return PrimitiveKind::RisingEdge;
        case PrimitiveKind::Pause: return PrimitiveKind::Pause;
    }
    return k;
}

constexpr char sign_of(PrimitiveKind k) noexcept {
    switch (k) {
        case PrimitiveKind::RisingEdge: return '+';
        case PrimitiveKind::FallingEdge: return '-';
        case PrimitiveKind::Pause: return '0';
    }
    return '?';
}

inline PrimitiveKind kind_from_sign(char c) {
    switch (c) {
        case '+': return PrimitiveKind::RisingEdge;
        case '-': return PrimitiveKind::FallingEdge;
        case '0': return PrimitiveKind::Pause;
        default: fail(ErrorKind::Domain, std::string("invalid primitive sign '") + c + "'");
    }
}

inline std::string_view to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::RisingEdge: return "rising";
        case PrimitiveKind::FallingEdge: return "falling";
        case PrimitiveKind::Pause: return "pause";
    }
    return "?";
}

inline std::string_view to_string(Speed s) {
    switch (s) {
        case Speed::High: return "high";
        case Speed::Medium: return "medium";
        case Speed::Low: return "low";
        case Speed::NA: return "na";
    }
    return "?";
}

inline std::string_view to_string(Magnitude m) {
    switch (m) {
        case Magnitude::High: return "high";
        case Magnitude::Low: return "low";
        case Magnitude::NA: return "na";
    }
    return "?";
}

inline Speed parse_speed(std::string_view s) {
    if (s == "high") return Speed::High;
    if (s == "medium") return Speed::Medium;
    if (s == "low") return Speed::Low;
    fail(ErrorKind::Parse, "unknown speed class '" + std::string(s) + "'");
}

inline Magnitude parse_magnitude(std::string_view s) {
    if (s == "high") return Magnitude::High;
    if (s == "low") return Magnitude::Low;
    fail(ErrorKind::Parse, "unknown magnitude class '" + std::string(s) + "'");
}

}  // namespace wigest
