#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "socialbot/service/engine.hpp"

namespace httplib {
class Server;
}

namespace socialbot::service {

/// JSON API over an Engine:
///   POST   /api/session                    -> {session_id}
///   POST   /api/session/{id}/message       {text} -> {response, turn, trace_id}
///   GET    /api/session/{id}/trace/{turn}  -> turn trace
///   GET    /api/metrics                    -> metrics report
///   DELETE /api/session/{id}               -> closes the session
class HttpServer {
public:
    explicit HttpServer(Engine& engine);
    ~HttpServer();

    /// Serves files under `dir` at "/" (the browser console build).
    void mount_static(const std::filesystem::path& dir);

    /// Binds to `port` (0 picks a free one); returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen();
    void stop();

private:
    Engine& engine_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace socialbot::service
