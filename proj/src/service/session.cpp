#include "strokesave/session.hpp"

namespace strokesave::session {

using nlohmann::json;

std::string_view to_string(SessionState s) {
    switch (s) {
        case SessionState::monitoring: return "MONITORING";
        case SessionState::alert: return "ALERT";
        case SessionState::tier2_pending: return "TIER2_PENDING";
        case SessionState::tier3_pending: return "TIER3_PENDING";
        case SessionState::diagnosed: return "DIAGNOSED";
    }
    return "UNKNOWN";
}

std::optional<SessionState> parse_session_state(std::string_view s) {
    for (auto v : {SessionState::monitoring, SessionState::alert, SessionState::tier2_pending,
                   SessionState::tier3_pending, SessionState::diagnosed}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::vitals: return "vitals";
        case EventKind::alert: return "alert";
        case EventKind::capture: return "capture";
        case EventKind::confidence: return "confidence";
        case EventKind::diagnosis: return "diagnosis";
        case EventKind::clear: return "clear";
    }
    return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::vitals, EventKind::alert, EventKind::capture, EventKind::confidence,
                   EventKind::diagnosis, EventKind::clear}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(CaptureKind k) {
    switch (k) {
        case CaptureKind::voice: return "voice";
        case CaptureKind::face: return "face";
        case CaptureKind::retina: return "retina";
    }
    return "unknown";
}

std::optional<CaptureKind> parse_capture_kind(std::string_view s) {
    for (auto k : {CaptureKind::voice, CaptureKind::face, CaptureKind::retina}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

Modality modality_of(CaptureKind k) {
    switch (k) {
        case CaptureKind::voice: return Modality::vocal;
        case CaptureKind::face: return Modality::face;
        case CaptureKind::retina: return Modality::retina;
    }
    throw std::invalid_argument("bad capture kind");
}

json event_to_json(const Event& e) {
    return {{"seq", e.sequence}, {"ts", e.timestamp_ms}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Event event_from_json(const json& j) {
    Event e;
    e.sequence = j.at("seq").get<std::uint64_t>();
    e.timestamp_ms = j.at("ts").get<std::int64_t>();
    const auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw ReplayError("unknown event kind " + j.at("kind").dump());
    e.kind = *kind;
    e.payload = j.at("payload");
    return e;
}

std::vector<std::uint8_t> encode_event(const Event& e) {
    const std::string s = event_to_json(e).dump();
    return {s.begin(), s.end()};
}

Event decode_event(std::span<const std::uint8_t> bytes) {
    try {
        return event_from_json(json::parse(bytes.begin(), bytes.end()));
    } catch (const json::exception& ex) {
        throw ReplayError(std::string("undecodable event: ") + ex.what());
    }
}

json diagnosis_to_json(const fusion::Diagnosis& d) {
    json contributions = json::object(), imputed = json::object();
    for (Modality m : kAllModalities) {
        const auto i = static_cast<std::size_t>(m);
        contributions[std::string(to_string(m))] = d.contributions[i];
        imputed[std::string(to_string(m))] = d.imputed[i];
    }
    return {{"at_risk", d.at_risk},
            {"risk_percent", d.risk_percent},
            {"contributions", contributions},
            {"imputed", imputed},
            {"model_version", d.model_version}};
}

fusion::Diagnosis diagnosis_from_json(const json& j) {
    fusion::Diagnosis d;
    d.at_risk = j.at("at_risk").get<bool>();
    d.risk_percent = j.at("risk_percent").get<double>();
    for (Modality m : kAllModalities) {
        const auto i = static_cast<std::size_t>(m);
        d.contributions[i] = j.at("contributions").at(std::string(to_string(m))).get<double>();
        d.imputed[i] = j.at("imputed").at(std::string(to_string(m))).get<bool>();
    }
    d.model_version = j.at("model_version").get<std::string>();
    return d;
}

json sample_to_json(const vascular::VitalsSample& s) {
    return {{"timestamp_ms", s.timestamp_ms},
            {"systolic", s.systolic},
            {"diastolic", s.diastolic},
            {"heart_rate", s.heart_rate},
            {"spo2", s.spo2}};
}

vascular::VitalsSample sample_from_json(const json& j) {
    vascular::VitalsSample s;
    s.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    s.systolic = j.at("systolic").get<double>();
    s.diastolic = j.at("diastolic").get<double>();
    s.heart_rate = j.at("heart_rate").get<double>();
    s.spo2 = j.at("spo2").get<double>();
    return s;
}

Session::Session(std::string id, vascular::ThresholdPolicy policy, std::size_t window)
    : id_(std::move(id)), policy_(policy), window_size_(window), evaluator_(policy) {
    if (window_size_ == 0) throw std::invalid_argument("vitals window must hold at least one sample");
}

Session Session::replay(std::string id, std::span<const Event> events, vascular::ThresholdPolicy policy,
                        std::size_t window) {
    Session s(std::move(id), policy, window);
    for (const Event& e : events) s.apply(e);
    return s;
}

// Every branch checks before it mutates, so a throwing apply() leaves the
// session as it was.
void Session::apply(const Event& e) {
    if (e.sequence != last_sequence() + 1) {
        throw ReplayError("event sequence " + std::to_string(e.sequence) + " does not follow " +
                          std::to_string(last_sequence()));
    }
    try {
        switch (e.kind) {
            case EventKind::vitals: {
                const auto s = sample_from_json(e.payload);
                vascular::validate_sample(s, 0);
                if (last_sample_ && s.timestamp_ms <= last_sample_->timestamp_ms) {
                    throw ReplayError("vitals timestamp does not increase");
                }
                if (state_ == SessionState::monitoring) evaluator_.push(s);
                last_sample_ = s;
                window_.push_back(s);
                if (window_.size() > window_size_) window_.pop_front();
                break;
            }
            case EventKind::alert: {
                if (state_ != SessionState::monitoring) throw ReplayError("alert outside MONITORING");
                const auto crit = vascular::parse_criterion(e.payload.at("criterion").get<std::string>());
                if (!evaluator_.alert() || !crit || evaluator_.alert()->criterion != *crit) {
                    throw ReplayError("alert event does not match the vitals stream");
                }
                alert_ = evaluator_.alert();
                state_ = SessionState::alert;
                break;
            }
            case EventKind::capture: {
                const auto kind = parse_capture_kind(e.payload.at("kind").get<std::string>());
                if (!kind) throw ReplayError("unknown capture kind");
                check_capture_allowed(*kind);
                captures_[std::string(to_string(*kind))] = {e.payload.at("digest").get<std::string>(),
                                                             e.payload.at("size").get<std::size_t>()};
                break;
            }
            case EventKind::confidence: {
                const auto m = parse_modality(e.payload.at("modality").get<std::string>());
                if (!m) throw ReplayError("unknown modality in confidence event");
                const double v = ModalityConfidence(e.payload.at("value").get<double>()).value();
                if (*m == Modality::vascular) {
                    if (state_ != SessionState::tier3_pending) throw ReplayError("vascular confidence before tier 3");
                } else {
                    const CaptureKind k = *m == Modality::vocal ? CaptureKind::voice
                                          : *m == Modality::face ? CaptureKind::face
                                                                 : CaptureKind::retina;
                    if (!captures_.count(std::string(to_string(k)))) {
                        throw ReplayError("confidence for " + std::string(to_string(*m)) + " without a capture");
                    }
                }
                confidences_[static_cast<std::size_t>(*m)] = v;
                if (*m == Modality::vocal || *m == Modality::face) {
                    if (state_ == SessionState::alert) state_ = SessionState::tier2_pending;
                    if (state_ == SessionState::tier2_pending && confidence(Modality::vocal) &&
                        confidence(Modality::face)) {
                        state_ = SessionState::tier3_pending;
                    }
                }
                break;
            }
            case EventKind::diagnosis: {
                if (state_ != SessionState::tier3_pending || !confidence(Modality::vascular)) {
                    throw ReplayError("diagnosis before tier 3 completed");
                }
                diagnosis_ = diagnosis_from_json(e.payload);
                state_ = SessionState::diagnosed;
                break;
            }
            case EventKind::clear: {
                if (state_ != SessionState::alert) throw ReplayError("clear is only valid in ALERT");
                state_ = SessionState::monitoring;
                alert_.reset();
                evaluator_ = vascular::StreamEvaluator(policy_);
                break;
            }
        }
    } catch (const json::exception& ex) {
        throw ReplayError(std::string("malformed ") + std::string(to_string(e.kind)) + " event: " + ex.what());
    } catch (const ReplayError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ReplayError(std::string(to_string(e.kind)) + " event rejected: " + ex.what());
    }
    events_.push_back(e);
}

Event Session::make_event(EventKind kind, std::int64_t now_ms, json payload) const {
    return {last_sequence() + 1, now_ms, kind, std::move(payload)};
}

std::vector<Event> Session::emit(std::vector<Event> staged) {
    for (auto& e : staged) {
        e.sequence = last_sequence() + 1;
        apply(e);
    }
    return staged;
}

std::vector<Event> Session::ingest_vitals(const vascular::VitalsSample& s, std::int64_t now_ms) {
    vascular::validate_sample(s, 0);
    if (last_sample_ && s.timestamp_ms <= last_sample_->timestamp_ms) {
        throw vascular::VitalsError(0, "timestamp " + std::to_string(s.timestamp_ms) +
                                           " does not follow the previous sample at " +
                                           std::to_string(last_sample_->timestamp_ms));
    }
    std::vector<Event> staged{make_event(EventKind::vitals, now_ms, sample_to_json(s))};
    if (state_ == SessionState::monitoring) {
        vascular::StreamEvaluator probe = evaluator_;
        if (const auto fired = probe.push(s)) {
            staged.push_back(make_event(EventKind::alert, now_ms,
                                        {{"criterion", to_string(fired->criterion)}, {"index", fired->index}}));
        }
    }
    return emit(std::move(staged));
}

void Session::check_capture_allowed(CaptureKind kind) const {
    switch (state_) {
        case SessionState::monitoring: throw TierOrderError("no active alert");
        case SessionState::diagnosed: throw TierOrderError("session is already diagnosed");
        case SessionState::alert:
        case SessionState::tier2_pending:
            if (kind == CaptureKind::retina) throw TierOrderError("complete voice and face first");
            return;
        case SessionState::tier3_pending: return;
    }
}

std::vector<Event> Session::record_capture(CaptureKind kind, const CaptureRef& ref, ModalityConfidence confidence,
                                           std::int64_t now_ms) {
    check_capture_allowed(kind);
    return emit({make_event(EventKind::capture, now_ms,
                            {{"kind", to_string(kind)}, {"digest", ref.digest}, {"size", ref.size}}),
                 make_event(EventKind::confidence, now_ms,
                            {{"modality", to_string(modality_of(kind))}, {"value", confidence.value()}})});
}

std::vector<Event> Session::diagnose(const VascularScorer& vascular, const FusionScorer& fuse, std::int64_t now_ms) {
    if (state_ == SessionState::diagnosed) return {};
    if (state_ != SessionState::tier3_pending) throw TierOrderError("complete voice and face first");
    if (!last_sample_) throw TierOrderError("no vitals recorded");

    const ModalityConfidence vc = vascular(*last_sample_);
    fusion::FusionInput input;
    for (Modality m : kAllModalities) {
        if (m == Modality::vascular) {
            input.set(m, vc);
        } else if (const auto v = confidence(m)) {
            input.set(m, ModalityConfidence(*v));
        }
    }
    const fusion::Diagnosis d = fuse(input);
    return emit({make_event(EventKind::confidence, now_ms, {{"modality", "vascular"}, {"value", vc.value()}}),
                 make_event(EventKind::diagnosis, now_ms, diagnosis_to_json(d))});
}

std::vector<Event> Session::clear(std::int64_t now_ms, const std::string& reason) {
    if (state_ != SessionState::alert) {
        throw TierOrderError("only an ALERT session can be cleared; state is " + std::string(to_string(state_)));
    }
    return emit({make_event(EventKind::clear, now_ms, {{"reason", reason}})});
}

json Session::summary() const {
    json conf = json::object();
    for (Modality m : kAllModalities) {
        const auto v = confidence(m);
        conf[std::string(to_string(m))] = v ? json(*v) : json(nullptr);
    }
    json caps = json::object();
    for (const auto& [k, ref] : captures_) caps[k] = {{"digest", ref.digest}, {"size", ref.size}};
    return {{"session_id", id_},
            {"state", to_string(state_)},
            {"alert", alert_ ? json{{"criterion", to_string(alert_->criterion)}, {"index", alert_->index}}
                             : json(nullptr)},
            {"confidences", conf},
            {"captures", caps},
            {"latest_vitals", last_sample_ ? sample_to_json(*last_sample_) : json(nullptr)},
            {"diagnosis", diagnosis_ ? diagnosis_to_json(*diagnosis_) : json(nullptr)},
            {"last_sequence", last_sequence()}};
}

}  // namespace strokesave::session
