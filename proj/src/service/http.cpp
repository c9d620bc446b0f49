#include "socialbot/service/http.hpp"

#include <httplib.h>

namespace socialbot::service {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

/// Maps engine exceptions onto status codes.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const UnknownSession& e) {
        send_error(res, 404, e.what());
    } catch (const SessionClosed& e) {
        send_error(res, 409, e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, std::string("bad request body: ") + e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
}

}  // namespace

HttpServer::HttpServer(Engine& engine) : engine_(engine), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            SessionOptions opts;
            opts.user_id = body.value("user_id", "");
            if (body.contains("profile") && body.at("profile").is_object()) {
                opts.profile = PersonaProfile::from_json(body.at("profile"));
            }
            send_json(res, 200, {{"session_id", engine_.create_session(std::move(opts))}});
        });
    });

    srv.Post(R"(/api/session/([^/]+)/message)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            if (!body.contains("text") || !body.at("text").is_string()) {
                throw std::invalid_argument("body needs a string field \"text\"");
            }
            const ChatReply r = engine_.chat_turn(req.matches[1], body.at("text").get<std::string>());
            send_json(res, 200, r.to_json());
        });
    });

    srv.Get(R"(/api/session/([^/]+)/trace/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto trace = engine_.get_trace(req.matches[1], std::stoul(req.matches[2]));
            if (!trace) {
                send_error(res, 404, "no such turn");
                return;
            }
            send_json(res, 200, *trace);
        });
    });

    srv.Get(R"(/api/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, engine_.session_log(req.matches[1]).to_json()); });
    });

    srv.Get("/api/metrics", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            MetricsWindow w;
            if (req.has_param("from_ms")) w.from_ms = std::stoll(req.get_param_value("from_ms"));
            if (req.has_param("to_ms")) w.to_ms = std::stoll(req.get_param_value("to_ms"));
            send_json(res, 200, engine_.metrics(w).to_json());
        });
    });

    srv.Delete(R"(/api/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            engine_.close_session(req.matches[1], CloseReason::User);
            send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"closed", true}});
        });
    });
}

HttpServer::~HttpServer() = default;

void HttpServer::mount_static(const std::filesystem::path& dir) {
    if (!server_->set_mount_point("/", dir.string())) throw DataError("cannot serve " + dir.string());
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() {
    return server_->listen_after_bind();
}

void HttpServer::stop() {
    server_->stop();
}

}  // namespace socialbot::service
