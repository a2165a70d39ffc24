#include "strokesave/service.hpp"

#include <algorithm>
#include <cstdio>

#include "strokesave/audio.hpp"
#include "strokesave/face.hpp"
#include "strokesave/model_io.hpp"
#include "strokesave/retina.hpp"
#include "strokesave/svm.hpp"

namespace strokesave::service {

using session::CaptureKind;
using session::Event;
using session::Session;

const CaptureScorer& DetectorSuite::scorer(CaptureKind kind) const {
    switch (kind) {
        case CaptureKind::voice: return voice;
        case CaptureKind::face: return face;
        case CaptureKind::retina: return retina;
    }
    throw std::invalid_argument("bad capture kind");
}

std::string model_file_name(std::string_view modality) { return std::string(modality) + ".model"; }

DetectorSuite load_detectors(const std::filesystem::path& dir) {
    auto need = [&](std::string_view m) {
        const auto p = dir / model_file_name(m);
        if (!std::filesystem::exists(p)) throw NotFoundError("missing model file " + p.string());
        return p;
    };
    auto vocal = std::make_shared<nn::Model>(nn::load_model(need("vocal")));
    auto retina = std::make_shared<nn::Model>(nn::load_model(need("retina")));
    auto face = std::make_shared<svm::SvmModel>(svm::load_svm(need("face")));
    auto vasc = std::make_shared<svm::SvmModel>(svm::load_svm(need("vascular")));
    const auto fusion_path = need("fusion");
    auto fus = std::make_shared<svm::SvmModel>(svm::load_svm(fusion_path));
    if (fus->weights.size() != 4) throw std::runtime_error("fusion model must have 4 weights");

    DetectorSuite d;
    d.model_version = "fusion-" + store::sha256_hex(nn::read_file(fusion_path)).substr(0, 12);
    d.voice = [vocal](std::span<const std::uint8_t> bytes) {
        audio::AudioClip clip;
        try {
            clip = audio::decode_wav(bytes);
            if (clip.samples.empty()) throw InvalidCaptureError("voice capture holds no samples");
        } catch (const audio::WavError& e) {
            throw InvalidCaptureError(std::string("voice capture: ") + e.what());
        }
        return audio::vocal_confidence(*vocal, clip);
    };
    d.retina = [retina](std::span<const std::uint8_t> bytes) {
        try {
            return retina::retina_confidence(*retina, retina::decode_image(bytes));
        } catch (const retina::ImageError& e) {
            throw InvalidCaptureError(std::string("retina capture: ") + e.what());
        }
    };
    d.face = [face](std::span<const std::uint8_t> bytes) {
        try {
            const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
            return face::paralysis_confidence(*face, face::parse_landmarks(text));
        } catch (const face::LandmarkError& e) {
            throw InvalidCaptureError(std::string("face capture: ") + e.what());
        }
    };
    d.vascular = [vasc](const vascular::VitalsSample& s) { return vascular::vascular_confidence(*vasc, s); };
    d.fuse = [fus, version = d.model_version](const fusion::FusionInput& in) { return fusion::fuse(*fus, in, version); };
    return d;
}

struct ScreeningService::Slot {
    Slot(Session s, std::unique_ptr<store::EventLog> l) : session(std::move(s)), log(std::move(l)) {}
    mutable std::mutex mutex;
    std::condition_variable changed;
    Session session;
    std::unique_ptr<store::EventLog> log;
};

ScreeningService::ScreeningService(ServiceOptions options, DetectorSuite detectors)
    : options_(std::move(options)), detectors_(std::move(detectors)), blobs_(options_.store_dir / "blobs") {
    options_.policy.validate();
    const auto dir = options_.store_dir / "sessions";
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".log") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& path : logs) {
        const std::string id = path.stem().string();
        auto log = std::make_unique<store::EventLog>(path, options_.sync_writes);
        if (log->recovered_torn_tail()) ++torn_recovered_;
        std::vector<Event> events;
        for (const auto& rec : log->recovered()) events.push_back(session::decode_event(rec));
        Session s = Session::replay(id, events, options_.policy);
        sessions_.emplace(id, std::make_unique<Slot>(std::move(s), std::move(log)));
        unsigned long long n = 0;
        if (std::sscanf(id.c_str(), "s%llu", &n) == 1) next_id_ = std::max<std::uint64_t>(next_id_, n + 1);
    }
}

ScreeningService::~ScreeningService() { shutdown(); }

std::int64_t ScreeningService::now() const {
    if (options_.clock) return options_.clock();
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string ScreeningService::create_session() {
    std::lock_guard lock(map_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%06llu", static_cast<unsigned long long>(next_id_++));
    const std::string id = buf;
    auto log = std::make_unique<store::EventLog>(options_.store_dir / "sessions" / (id + ".log"), options_.sync_writes);
    sessions_.emplace(id, std::make_unique<Slot>(Session(id, options_.policy), std::move(log)));
    return id;
}

std::vector<std::string> ScreeningService::session_ids() const {
    std::lock_guard lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
}

ScreeningService::Slot& ScreeningService::slot(const std::string& id) const {
    std::lock_guard lock(map_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
    return *it->second;
}

void ScreeningService::persist(Slot& s, const std::vector<Event>& events) {
    try {
        for (const Event& e : events) s.log->append(session::encode_event(e));
    } catch (...) {
        // Memory ran ahead of disk: rebuild the session from what the log holds.
        s.log.reset();
        auto log = std::make_unique<store::EventLog>(options_.store_dir / "sessions" / (s.session.id() + ".log"),
                                                     options_.sync_writes);
        std::vector<Event> kept;
        for (const auto& rec : log->recovered()) kept.push_back(session::decode_event(rec));
        s.session = Session::replay(s.session.id(), kept, options_.policy);
        s.log = std::move(log);
        throw;
    }
    if (!events.empty()) s.changed.notify_all();
}

std::vector<Event> ScreeningService::ingest_vitals(const std::string& id,
                                                   std::span<const vascular::VitalsSample> batch) {
    Slot& s = slot(id);
    std::lock_guard lock(s.mutex);
    // Validate the whole batch against the session before touching it.
    std::optional<std::int64_t> prev;
    if (s.session.last_sample()) prev = s.session.last_sample()->timestamp_ms;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        vascular::validate_sample(batch[i], i);
        if (prev && batch[i].timestamp_ms <= *prev) {
            throw vascular::VitalsError(i, "sample " + std::to_string(i) + " timestamp does not increase");
        }
        prev = batch[i].timestamp_ms;
    }
    std::vector<Event> out;
    const std::int64_t t = now();
    for (const auto& sample : batch) {
        auto ev = s.session.ingest_vitals(sample, t);
        out.insert(out.end(), ev.begin(), ev.end());
    }
    persist(s, out);
    return out;
}

CaptureOutcome ScreeningService::submit_capture(const std::string& id, CaptureKind kind,
                                                std::span<const std::uint8_t> bytes) {
    Slot& s = slot(id);
    std::lock_guard lock(s.mutex);
    s.session.check_capture_allowed(kind);
    const auto& score = detectors_.scorer(kind);
    if (!score) throw std::runtime_error("no detector loaded for " + std::string(session::to_string(kind)));
    const ModalityConfidence confidence = score(bytes);
    const std::string digest = blobs_.put(bytes);

    CaptureOutcome out;
    out.confidence = confidence;
    out.events = s.session.record_capture(kind, {digest, bytes.size()}, confidence, now());
    if (kind == CaptureKind::retina && s.session.state() == session::SessionState::tier3_pending) {
        auto more = s.session.diagnose(detectors_.vascular, detectors_.fuse, now());
        out.events.insert(out.events.end(), more.begin(), more.end());
    }
    persist(s, out.events);
    out.state = s.session.state();
    out.diagnosis = s.session.diagnosis();
    return out;
}

fusion::Diagnosis ScreeningService::diagnose(const std::string& id) {
    Slot& s = slot(id);
    std::lock_guard lock(s.mutex);
    persist(s, s.session.diagnose(detectors_.vascular, detectors_.fuse, now()));
    return *s.session.diagnosis();
}

std::vector<Event> ScreeningService::clear(const std::string& id) {
    Slot& s = slot(id);
    std::lock_guard lock(s.mutex);
    auto events = s.session.clear(now());
    persist(s, events);
    return events;
}

Session ScreeningService::snapshot(const std::string& id) const {
    Slot& s = slot(id);
    std::lock_guard lock(s.mutex);
    return s.session;
}

std::vector<Event> ScreeningService::events_since(const std::string& id, std::uint64_t since,
                                                  std::chrono::milliseconds wait) {
    Slot& s = slot(id);
    std::unique_lock lock(s.mutex);
    const auto ready = [&] { return stopping_ || s.session.last_sequence() > since; };
    if (wait.count() > 0) s.changed.wait_for(lock, wait, ready);
    const auto& all = s.session.events();
    // Sequences are 1-based and gap-free, so the index is since.
    std::vector<Event> out;
    for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(since, all.size())); i < all.size(); ++i) {
        out.push_back(all[i]);
    }
    return out;
}

std::vector<std::uint8_t> ScreeningService::capture_bytes(const std::string& id, CaptureKind kind) const {
    Slot& s = slot(id);
    std::string digest;
    {
        std::lock_guard lock(s.mutex);
        const auto it = s.session.captures().find(std::string(session::to_string(kind)));
        if (it == s.session.captures().end()) {
            throw NotFoundError("session " + id + " has no " + std::string(session::to_string(kind)) + " capture");
        }
        digest = it->second.digest;
    }
    return blobs_.get(digest);
}

void ScreeningService::shutdown() {
    std::vector<Slot*> all;
    {
        std::lock_guard lock(map_mutex_);
        stopping_ = true;
        for (auto& [_, s] : sessions_) all.push_back(s.get());
    }
    for (Slot* s : all) {
        std::lock_guard lock(s->mutex);
        s->changed.notify_all();
    }
}

}  // namespace strokesave::service
