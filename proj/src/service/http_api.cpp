#include "strokesave/http_api.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>

namespace strokesave::service {

using nlohmann::json;
using session::Event;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}, {"status", status}});
}

json events_json(const std::vector<Event>& events) {
    json arr = json::array();
    for (const auto& e : events) arr.push_back(session::event_to_json(e));
    return arr;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument(std::string("bad ") + what);
    return v;
}

std::vector<vascular::VitalsSample> parse_vitals_body(const httplib::Request& req) {
    const std::string type = req.get_header_value("Content-Type");
    const bool csv = type.find("csv") != std::string::npos || req.body.rfind("timestamp_ms,", 0) == 0;
    if (csv) return vascular::parse_vitals_csv(req.body);
    const json j = json::parse(req.body);
    std::vector<vascular::VitalsSample> out;
    if (j.is_array()) {
        for (const auto& item : j) out.push_back(session::sample_from_json(item));
    } else if (j.is_object()) {
        out.push_back(session::sample_from_json(j));
    } else {
        throw std::invalid_argument("vitals body must be a JSON object, a JSON array, or CSV");
    }
    return out;
}

// Maps every exception to a status code so handlers can stay straight-line.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const NotFoundError& e) {
            send_error(res, 404, e.what());
        } catch (const session::TierOrderError& e) {
            send_error(res, 409, e.what());
        } catch (const InvalidCaptureError& e) {
            send_error(res, 400, e.what());
        } catch (const vascular::VitalsError& e) {
            send_error(res, 400, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("malformed JSON: ") + e.what());
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, e.what());
        } catch (const std::out_of_range& e) {
            send_error(res, 400, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

}  // namespace

ApiServer::ApiServer(ScreeningService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& svc = service_;
    auto& srv = *server_;

    // The console is served from another origin.
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    srv.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    srv.set_payload_max_length(64u << 20);

    srv.Get("/v1/health", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, {{"status", "ok"}, {"model_version", svc.detectors().model_version}});
            }));

    srv.Post("/v1/sessions", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                 const std::string id = svc.create_session();
                 send_json(res, 201, svc.snapshot(id).summary());
             }));

    srv.Get("/v1/sessions", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, {{"sessions", svc.session_ids()}});
            }));

    srv.Get(R"(/v1/sessions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const auto s = svc.snapshot(req.matches[1]);
                json body = s.summary();
                body["events"] = events_json(s.events());
                send_json(res, 200, body);
            }));

    srv.Post(R"(/v1/sessions/([^/]+)/vitals)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 svc.snapshot(id);  // 404 before parsing the body
                 const auto batch = parse_vitals_body(req);
                 const auto events = svc.ingest_vitals(id, batch);
                 json body = svc.snapshot(id).summary();
                 body["accepted"] = batch.size();
                 body["events"] = events_json(events);
                 send_json(res, 200, body);
             }));

    srv.Post(R"(/v1/sessions/([^/]+)/capture/([^/]+))",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 const auto kind = session::parse_capture_kind(std::string(req.matches[2]));
                 if (!kind) {
                     send_error(res, 404, "unknown capture kind '" + std::string(req.matches[2]) + "'");
                     return;
                 }
                 const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(req.body.data()),
                                                           req.body.size());
                 const CaptureOutcome out = svc.submit_capture(id, *kind, bytes);
                 json body = {{"modality", session::to_string(*kind)},
                              {"confidence", out.confidence.value()},
                              {"state", session::to_string(out.state)},
                              {"events", events_json(out.events)}};
                 body["diagnosis"] = out.diagnosis ? session::diagnosis_to_json(*out.diagnosis) : json(nullptr);
                 send_json(res, 200, body);
             }));

    srv.Post(R"(/v1/sessions/([^/]+)/diagnose)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, session::diagnosis_to_json(svc.diagnose(req.matches[1])));
             }));

    srv.Get(R"(/v1/sessions/([^/]+)/diagnosis)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const auto s = svc.snapshot(req.matches[1]);
                if (!s.diagnosis()) {
                    send_error(res, 409, "session is " + std::string(session::to_string(s.state())) +
                                             "; no diagnosis yet");
                    return;
                }
                send_json(res, 200, session::diagnosis_to_json(*s.diagnosis()));
            }));

    srv.Post(R"(/v1/sessions/([^/]+)/clear)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 const auto events = svc.clear(id);
                 json body = svc.snapshot(id).summary();
                 body["events"] = events_json(events);
                 send_json(res, 200, body);
             }));

    srv.Get(R"(/v1/sessions/([^/]+)/events)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                const std::uint64_t since = req.has_param("since") ? parse_u64(req.get_param_value("since"), "since") : 0;
                std::uint64_t wait = req.has_param("wait_ms") ? parse_u64(req.get_param_value("wait_ms"), "wait_ms") : 0;
                wait = std::min<std::uint64_t>(wait, kMaxWaitMs);
                const auto events = svc.events_since(id, since, std::chrono::milliseconds(wait));
                const auto s = svc.snapshot(id);
                send_json(res, 200,
                          {{"session_id", id},
                           {"state", session::to_string(s.state())},
                           {"last_sequence", s.last_sequence()},
                           {"events", events_json(events)}});
            }));
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ApiServer::listen() { server_->listen_after_bind(); }

void ApiServer::stop() {
    service_.shutdown();
    if (server_) server_->stop();
}

}  // namespace strokesave::service
