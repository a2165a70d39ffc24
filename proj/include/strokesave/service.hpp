#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "strokesave/session.hpp"
#include "strokesave/store.hpp"

namespace strokesave::service {

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A capture body that its modality's decoder rejected.
class InvalidCaptureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using CaptureScorer = std::function<ModalityConfidence(std::span<const std::uint8_t>)>;

/// The five trained models behind plain callables, so tests can swap in
/// stubs while the service logic stays the same.
struct DetectorSuite {
    CaptureScorer voice;
    CaptureScorer face;
    CaptureScorer retina;
    session::VascularScorer vascular;
    session::FusionScorer fuse;
    std::string model_version = "unversioned";

    const CaptureScorer& scorer(session::CaptureKind kind) const;
};

/// File name expected under the models directory for each modality.
std::string model_file_name(std::string_view modality);

/// Loads vocal, retina, face, vascular and fusion models from `dir`. The
/// model version is derived from the fusion model bytes.
DetectorSuite load_detectors(const std::filesystem::path& dir);

struct ServiceOptions {
    std::filesystem::path store_dir;
    vascular::ThresholdPolicy policy;
    bool sync_writes = true;
    std::function<std::int64_t()> clock;  // ms since epoch; defaults to the system clock
};

struct CaptureOutcome {
    ModalityConfidence confidence{0.0};
    session::SessionState state = session::SessionState::monitoring;
    std::vector<session::Event> events;
    std::optional<fusion::Diagnosis> diagnosis;
};

/// Owns every session. Sessions are independent; commands on one session
/// are serialized by its own lock, so each log has a single writer. The
/// store directory holds sessions/<id>.log and blobs/.
class ScreeningService {
public:
    ScreeningService(ServiceOptions options, DetectorSuite detectors);
    ~ScreeningService();

    std::string create_session();
    std::vector<std::string> session_ids() const;

    /// Applies the whole batch or nothing.
    std::vector<session::Event> ingest_vitals(const std::string& id, std::span<const vascular::VitalsSample> batch);
    /// A retina capture in TIER3_PENDING also runs the diagnosis.
    CaptureOutcome submit_capture(const std::string& id, session::CaptureKind kind,
                                  std::span<const std::uint8_t> bytes);
    fusion::Diagnosis diagnose(const std::string& id);
    std::vector<session::Event> clear(const std::string& id);

    session::Session snapshot(const std::string& id) const;
    /// Events with sequence > since. Blocks up to `wait` when none exist yet.
    std::vector<session::Event> events_since(const std::string& id, std::uint64_t since,
                                             std::chrono::milliseconds wait = std::chrono::milliseconds(0));
    /// Stored capture bytes, checked against their digest.
    std::vector<std::uint8_t> capture_bytes(const std::string& id, session::CaptureKind kind) const;

    const DetectorSuite& detectors() const noexcept { return detectors_; }
    const std::filesystem::path& store_dir() const noexcept { return options_.store_dir; }
    /// Number of logs whose torn tail was cut during startup.
    std::size_t torn_logs_recovered() const noexcept { return torn_recovered_; }

    /// Wakes every long-poll waiter; later waits return immediately.
    void shutdown();

private:
    struct Slot;
    Slot& slot(const std::string& id) const;
    void persist(Slot& s, const std::vector<session::Event>& events);
    std::int64_t now() const;

    ServiceOptions options_;
    DetectorSuite detectors_;
    store::BlobStore blobs_;
    mutable std::mutex map_mutex_;
    std::map<std::string, std::unique_ptr<Slot>> sessions_;
    std::uint64_t next_id_ = 1;
    std::size_t torn_recovered_ = 0;
    std::atomic<bool> stopping_{false};
};

}  // namespace strokesave::service
