#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "strokesave/confidence.hpp"
#include "strokesave/fusion.hpp"
#include "strokesave/vascular.hpp"

namespace strokesave::session {

enum class SessionState { monitoring, alert, tier2_pending, tier3_pending, diagnosed };

std::string_view to_string(SessionState s);  // "MONITORING", "ALERT", ...
std::optional<SessionState> parse_session_state(std::string_view s);

enum class EventKind { vitals, alert, capture, confidence, diagnosis, clear };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

/// Capture kinds accepted from clients. Voice maps onto the vocal slot.
enum class CaptureKind { voice, face, retina };

std::string_view to_string(CaptureKind k);
std::optional<CaptureKind> parse_capture_kind(std::string_view s);
Modality modality_of(CaptureKind k);

struct Event {
    std::uint64_t sequence = 0;  // 1-based, no gaps
    std::int64_t timestamp_ms = 0;
    EventKind kind = EventKind::vitals;
    nlohmann::json payload;

    bool operator==(const Event&) const = default;
};

nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);
std::vector<std::uint8_t> encode_event(const Event& e);
Event decode_event(std::span<const std::uint8_t> bytes);

nlohmann::json diagnosis_to_json(const fusion::Diagnosis& d);
fusion::Diagnosis diagnosis_from_json(const nlohmann::json& j);
nlohmann::json sample_to_json(const vascular::VitalsSample& s);
vascular::VitalsSample sample_from_json(const nlohmann::json& j);

class SessionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The request is valid on its own but not in the session's current tier.
class TierOrderError : public SessionError {
public:
    using SessionError::SessionError;
};

/// An event that cannot follow the current state (corrupt or foreign log).
class ReplayError : public SessionError {
public:
    using SessionError::SessionError;
};

struct CaptureRef {
    std::string digest;
    std::size_t size = 0;
    bool operator==(const CaptureRef&) const = default;
};

using VascularScorer = std::function<ModalityConfidence(const vascular::VitalsSample&)>;
using FusionScorer = std::function<fusion::Diagnosis(const fusion::FusionInput&)>;

/// One screening session. All state is derived from the event list: every
/// command validates first, then emits events through apply(), so replaying
/// the same events rebuilds an identical session.
class Session {
public:
    static constexpr std::size_t kDefaultWindow = 120;

    explicit Session(std::string id, vascular::ThresholdPolicy policy = {}, std::size_t window = kDefaultWindow);

    static Session replay(std::string id, std::span<const Event> events, vascular::ThresholdPolicy policy = {},
                          std::size_t window = kDefaultWindow);

    /// Folds one event in. Throws ReplayError if it cannot follow.
    void apply(const Event& e);

    // Commands. Each returns the events it appended; on any exception the
    // session is unchanged.
    std::vector<Event> ingest_vitals(const vascular::VitalsSample& s, std::int64_t now_ms);
    /// Throws TierOrderError when `kind` cannot be captured now.
    void check_capture_allowed(CaptureKind kind) const;
    std::vector<Event> record_capture(CaptureKind kind, const CaptureRef& ref, ModalityConfidence confidence,
                                      std::int64_t now_ms);
    /// Appends the vascular confidence and the diagnosis. A diagnosed
    /// session returns no new events and keeps its recorded diagnosis.
    std::vector<Event> diagnose(const VascularScorer& vascular, const FusionScorer& fuse, std::int64_t now_ms);
    std::vector<Event> clear(std::int64_t now_ms, const std::string& reason = "manual");

    const std::string& id() const noexcept { return id_; }
    SessionState state() const noexcept { return state_; }
    const std::vector<Event>& events() const noexcept { return events_; }
    std::uint64_t last_sequence() const noexcept { return events_.empty() ? 0 : events_.back().sequence; }
    const std::optional<vascular::Alert>& alert() const noexcept { return alert_; }
    const std::array<std::optional<double>, 4>& confidences() const noexcept { return confidences_; }
    std::optional<double> confidence(Modality m) const { return confidences_[static_cast<std::size_t>(m)]; }
    const std::map<std::string, CaptureRef>& captures() const noexcept { return captures_; }
    const std::deque<vascular::VitalsSample>& vitals_window() const noexcept { return window_; }
    const std::optional<fusion::Diagnosis>& diagnosis() const noexcept { return diagnosis_; }
    const std::optional<vascular::VitalsSample>& last_sample() const noexcept { return last_sample_; }

    /// Summary for the API: id, state, alert, confidences, captures,
    /// diagnosis, last sequence.
    nlohmann::json summary() const;

    bool operator==(const Session&) const = default;

private:
    Event make_event(EventKind kind, std::int64_t now_ms, nlohmann::json payload) const;
    std::vector<Event> emit(std::vector<Event> staged);

    std::string id_;
    vascular::ThresholdPolicy policy_;
    std::size_t window_size_;
    SessionState state_ = SessionState::monitoring;
    vascular::StreamEvaluator evaluator_;
    std::optional<vascular::Alert> alert_;
    std::optional<vascular::VitalsSample> last_sample_;
    std::deque<vascular::VitalsSample> window_;
    std::array<std::optional<double>, 4> confidences_{};
    std::map<std::string, CaptureRef> captures_;
    std::optional<fusion::Diagnosis> diagnosis_;
    std::vector<Event> events_;
};

}  // namespace strokesave::session
