#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "strokesave/http_api.hpp"
#include "strokesave/service.hpp"
#include "strokesave/synth.hpp"
#include "support/session_fixtures.hpp"

using namespace strokesave;
using namespace strokesave::service;
using session::CaptureKind;
using session::SessionState;
using fixtures::vitals;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("strokesave_service_" + name);
    std::filesystem::remove_all(p);
    return p;
}

// Real decoders, fixed scores: exercises the decode-failure path without
// needing trained models.
DetectorSuite stub_detectors() {
    DetectorSuite d;
    d.voice = [](std::span<const std::uint8_t> b) {
        try {
            audio::decode_wav(b);
        } catch (const audio::WavError& e) {
            throw InvalidCaptureError(e.what());
        }
        return ModalityConfidence(0.8);
    };
    d.face = [](std::span<const std::uint8_t> b) {
        try {
            face::parse_landmarks(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
        } catch (const face::LandmarkError& e) {
            throw InvalidCaptureError(e.what());
        }
        return ModalityConfidence(0.7);
    };
    d.retina = [](std::span<const std::uint8_t> b) {
        try {
            retina::decode_image(b);
        } catch (const retina::ImageError& e) {
            throw InvalidCaptureError(e.what());
        }
        return ModalityConfidence(0.6);
    };
    d.vascular = fixtures::stub_vascular();
    d.fuse = fixtures::stub_fuse();
    d.model_version = "stub";
    return d;
}

struct Artifacts {
    std::vector<std::uint8_t> wav, pts, pgm;
};

const Artifacts& artifacts() {
    static const Artifacts a = [] {
        synth::Rng rng(3);
        Artifacts out;
        out.wav = audio::encode_wav(synth::make_voice(rng, true, 0.3));
        const std::string pts = face::format_landmarks(synth::make_face(rng, 0.2, 0.01));
        out.pts.assign(pts.begin(), pts.end());
        out.pgm = retina::encode_pgm(synth::make_fundus(rng, true, 0.3));
        return out;
    }();
    return a;
}

ServiceOptions options(const std::filesystem::path& dir) {
    ServiceOptions o;
    o.store_dir = dir;
    o.sync_writes = false;
    o.clock = [] { return std::int64_t{1700000000000}; };
    return o;
}

void raise_alert(ScreeningService& svc, const std::string& id, std::int64_t t0 = 1000) {
    std::vector<vascular::VitalsSample> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(vitals(t0 + 1000 * i, 185));
    svc.ingest_vitals(id, batch);
}

}  // namespace

TEST(ScreeningService, FullFlowAndRecovery) {
    const auto dir = scratch("flow");
    std::string id;
    session::Session live("x");
    {
        ScreeningService svc(options(dir), stub_detectors());
        id = svc.create_session();
        raise_alert(svc, id);
        EXPECT_EQ(svc.snapshot(id).state(), SessionState::alert);
        EXPECT_EQ(svc.submit_capture(id, CaptureKind::voice, artifacts().wav).state, SessionState::tier2_pending);
        EXPECT_EQ(svc.submit_capture(id, CaptureKind::face, artifacts().pts).state, SessionState::tier3_pending);
        const CaptureOutcome out = svc.submit_capture(id, CaptureKind::retina, artifacts().pgm);
        EXPECT_EQ(out.state, SessionState::diagnosed);
        ASSERT_TRUE(out.diagnosis);
        EXPECT_TRUE(out.diagnosis->at_risk);
        EXPECT_EQ(svc.diagnose(id), *out.diagnosis);
        EXPECT_EQ(svc.capture_bytes(id, CaptureKind::face), artifacts().pts);
        live = svc.snapshot(id);
    }
    ScreeningService again(options(dir), stub_detectors());
    EXPECT_EQ(again.snapshot(id), live);
    EXPECT_EQ(again.torn_logs_recovered(), 0u);
    EXPECT_NE(again.create_session(), id);
    std::filesystem::remove_all(dir);
}

TEST(ScreeningService, TornTailIsCutOnRestart) {
    const auto dir = scratch("torn");
    std::string id;
    std::size_t n = 0;
    {
        ScreeningService svc(options(dir), stub_detectors());
        id = svc.create_session();
        raise_alert(svc, id);
        n = svc.snapshot(id).events().size();
    }
    {
        std::ofstream out(dir / "sessions" / (id + ".log"), std::ios::binary | std::ios::app);
        out.write("\x40\x00\x00\x00\x01\x02", 6);
    }
    ScreeningService again(options(dir), stub_detectors());
    EXPECT_EQ(again.torn_logs_recovered(), 1u);
    EXPECT_EQ(again.snapshot(id).events().size(), n);
    again.submit_capture(id, CaptureKind::voice, artifacts().wav);
    EXPECT_EQ(again.snapshot(id).last_sequence(), n + 2);
    std::filesystem::remove_all(dir);
}

TEST(ScreeningService, BadCaptureAndBadBatchChangeNothing) {
    const auto dir = scratch("bad");
    ScreeningService svc(options(dir), stub_detectors());
    const std::string id = svc.create_session();
    EXPECT_THROW(svc.submit_capture(id, CaptureKind::voice, artifacts().wav), session::TierOrderError);
    raise_alert(svc, id);
    const auto before = svc.snapshot(id);
    const std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e'};
    EXPECT_THROW(svc.submit_capture(id, CaptureKind::voice, junk), InvalidCaptureError);
    EXPECT_THROW(svc.submit_capture(id, CaptureKind::face, junk), InvalidCaptureError);
    std::vector<vascular::VitalsSample> batch{vitals(9000, 120), vitals(9500, 120), vitals(9400, 120)};
    EXPECT_THROW(svc.ingest_vitals(id, batch), vascular::VitalsError);
    EXPECT_EQ(svc.snapshot(id), before);
    EXPECT_THROW(svc.snapshot("s999999"), NotFoundError);
    std::filesystem::remove_all(dir);
}

TEST(ScreeningService, TamperedBlobIsAnIntegrityError) {
    const auto dir = scratch("tamper");
    ScreeningService svc(options(dir), stub_detectors());
    const std::string id = svc.create_session();
    raise_alert(svc, id);
    svc.submit_capture(id, CaptureKind::voice, artifacts().wav);
    const std::string digest = svc.snapshot(id).captures().at("voice").digest;
    {
        std::ofstream out(dir / "blobs" / digest.substr(0, 2) / digest, std::ios::binary | std::ios::app);
        out << "x";
    }
    EXPECT_THROW(svc.capture_bytes(id, CaptureKind::voice), store::IntegrityError);
    std::filesystem::remove_all(dir);
}

TEST(ScreeningService, LongPollWakesOnNewEvents) {
    const auto dir = scratch("poll");
    ScreeningService svc(options(dir), stub_detectors());
    const std::string id = svc.create_session();
    EXPECT_TRUE(svc.events_since(id, 0).empty());
    std::thread writer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        svc.ingest_vitals(id, std::vector{vitals(1, 120)});
    });
    const auto t0 = std::chrono::steady_clock::now();
    const auto ev = svc.events_since(id, 0, std::chrono::milliseconds(5000));
    writer.join();
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(4));
    EXPECT_TRUE(svc.events_since(id, 1, std::chrono::milliseconds(20)).empty());
    std::filesystem::remove_all(dir);
}

class HttpApiTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = scratch("http");
        svc_ = std::make_unique<ScreeningService>(options(dir_), stub_detectors());
        api_ = std::make_unique<ApiServer>(*svc_);
        port_ = api_->bind("127.0.0.1", 0);
        thread_ = std::thread([this] { api_->listen(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(10, 0);
    }
    void TearDown() override {
        api_->stop();
        thread_.join();
        api_.reset();
        svc_.reset();
        std::filesystem::remove_all(dir_);
    }
    std::string new_session() {
        auto r = client_->Post("/v1/sessions");
        EXPECT_EQ(r->status, 201);
        return nlohmann::json::parse(r->body).at("session_id");
    }
    httplib::Result post_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
        return client_->Post(path, std::string(b.begin(), b.end()), "application/octet-stream");
    }

    std::filesystem::path dir_;
    std::unique_ptr<ScreeningService> svc_;
    std::unique_ptr<ApiServer> api_;
    std::thread thread_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpApiTest, StatusCodes) {
    EXPECT_EQ(client_->Get("/v1/sessions/nope")->status, 404);
    const std::string id = new_session();
    const std::string base = "/v1/sessions/" + id;
    EXPECT_EQ(post_bytes(base + "/capture/voice", artifacts().wav)->status, 409);
    EXPECT_EQ(post_bytes(base + "/capture/ears", artifacts().wav)->status, 404);
    EXPECT_EQ(client_->Post(base + "/vitals", "{not json", "application/json")->status, 400);
    EXPECT_EQ(client_->Post(base + "/vitals", R"({"timestamp_ms":1,"systolic":120,"diastolic":150,"heart_rate":70,"spo2":98})",
                            "application/json")
                  ->status,
              400);
    EXPECT_EQ(client_->Get(base + "/diagnosis")->status, 409);
    EXPECT_EQ(client_->Post(base + "/diagnose")->status, 409);
    EXPECT_EQ(client_->Post(base + "/clear")->status, 409);
    EXPECT_EQ(client_->Get(base + "/events?since=abc")->status, 400);
    EXPECT_EQ(client_->Get("/v1/health")->status, 200);
}

TEST_F(HttpApiTest, ScreeningOverHttp) {
    const std::string id = new_session();
    const std::string base = "/v1/sessions/" + id;
    const std::string csv =
        "timestamp_ms,systolic,diastolic,heart_rate,spo2\n1000,120,80,70,98\n2000,185,100,80,97\n"
        "3000,186,100,80,97\n4000,187,100,80,97\n";
    auto r = client_->Post(base + "/vitals", csv, "text/csv");
    ASSERT_EQ(r->status, 200) << r->body;
    auto j = nlohmann::json::parse(r->body);
    EXPECT_EQ(j.at("state"), "ALERT");
    EXPECT_EQ(j.at("alert").at("criterion"), "systolic");
    EXPECT_EQ(j.at("accepted"), 4);

    EXPECT_EQ(post_bytes(base + "/capture/retina", artifacts().pgm)->status, 409);
    EXPECT_EQ(post_bytes(base + "/capture/voice", {'x'})->status, 400);
    r = post_bytes(base + "/capture/voice", artifacts().wav);
    ASSERT_EQ(r->status, 200) << r->body;
    EXPECT_EQ(nlohmann::json::parse(r->body).at("state"), "TIER2_PENDING");
    r = post_bytes(base + "/capture/face", artifacts().pts);
    EXPECT_EQ(nlohmann::json::parse(r->body).at("state"), "TIER3_PENDING");
    r = post_bytes(base + "/capture/retina", artifacts().pgm);
    j = nlohmann::json::parse(r->body);
    EXPECT_EQ(j.at("state"), "DIAGNOSED");

    const auto d1 = client_->Get(base + "/diagnosis");
    const auto d2 = client_->Post(base + "/diagnose");
    ASSERT_EQ(d1->status, 200);
    EXPECT_EQ(d1->body, d2->body);
    EXPECT_EQ(nlohmann::json::parse(d1->body), j.at("diagnosis"));

    // Resume by sequence: the tail after any point equals the full list's tail.
    const auto all = nlohmann::json::parse(client_->Get(base + "/events?since=0")->body).at("events");
    const auto tail = nlohmann::json::parse(client_->Get(base + "/events?since=3")->body).at("events");
    ASSERT_EQ(tail.size() + 3, all.size());
    for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_EQ(tail[i], all[i + 3]);
    const auto full = nlohmann::json::parse(client_->Get(base)->body);
    EXPECT_EQ(full.at("events"), all);
}

TEST_F(HttpApiTest, EventsLongPoll) {
    const std::string id = new_session();
    std::thread feeder([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        httplib::Client c("127.0.0.1", port_);
        c.Post("/v1/sessions/" + id + "/vitals",
               R"([{"timestamp_ms":1,"systolic":120,"diastolic":80,"heart_rate":70,"spo2":98}])", "application/json");
    });
    auto r = client_->Get("/v1/sessions/" + id + "/events?since=0&wait_ms=5000");
    feeder.join();
    ASSERT_EQ(r->status, 200);
    const auto j = nlohmann::json::parse(r->body);
    ASSERT_EQ(j.at("events").size(), 1u);
    EXPECT_EQ(j.at("events")[0].at("kind"), "vitals");
    EXPECT_EQ(j.at("last_sequence"), 1);
}
