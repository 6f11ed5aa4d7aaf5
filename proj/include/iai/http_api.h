#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "iai/errors.h"
#include "iai/survey.h"

namespace iai::survey {

struct HttpOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> static_dir;
};

// HTTP status for an error kind: not_found 404, ordering 409, capacity 503,
// persistence and network 500, other input errors 400.
int status_for(const Error& e);

// JSON API over a SurveyStore:
//   POST /api/analysts              {certified, state}       -> {analyst_id, ...}
//   POST /api/sessions              {analyst_id}             -> {session_id, ...}
//   GET  /api/sessions/{id}/next                             -> {pair_index, firm_a, firm_b} | {complete}
//   POST /api/sessions/{id}/votes   {pair_index, winner}     -> {seq, ...}
//   GET  /api/ratings?k=&cutoff=&certified_only=             -> ranked array
//   GET  /api/export/votes.csv
//   GET  /api/health
// Anything else is served from `static_dir` when set.
class HttpServer {
public:
    HttpServer(SurveyStore& store, HttpOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds the listening socket and returns the port.
    int bind();
    // Serves until stop() is called. Binds first if needed.
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace iai::survey
