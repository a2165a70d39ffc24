#pragma once

#include <memory>
#include <string>

#include "strokesave/service.hpp"

namespace httplib {
class Server;
}

namespace strokesave::service {

// Routes (all JSON unless noted):
//   GET  /v1/health
//   POST /v1/sessions                          -> 201 session summary
//   GET  /v1/sessions                          -> ids
//   GET  /v1/sessions/{id}                     -> summary + events
//   POST /v1/sessions/{id}/vitals              JSON sample, JSON array, or CSV body
//   POST /v1/sessions/{id}/capture/{kind}      raw WAV / PGM-PPM / pts body
//   POST /v1/sessions/{id}/diagnose
//   GET  /v1/sessions/{id}/diagnosis
//   POST /v1/sessions/{id}/clear
//   GET  /v1/sessions/{id}/events?since=N&wait_ms=M
// Errors carry {"error": message} with 400, 404, 409 or 500.

inline constexpr int kMaxWaitMs = 30000;

class ApiServer {
public:
    explicit ApiServer(ScreeningService& service);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

private:
    ScreeningService& service_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace strokesave::service
