#include "relanno/review_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include "relanno/error.hpp"

namespace relanno::orchestrator {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kPlaceholder = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>relanno review</title></head>
<body>
<h1>relanno review service</h1>
<p>No UI assets were configured (start <code>relanno serve</code> with <code>--ui-dir</code>).
The JSON API is available under <a href="/api/progress">/api</a>.</p>
</body></html>
)";

void send_json(httplib::Response& res, const ordered_json& j, int status = 200)
{
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message)
{
    send_json(res, {{"error", message}}, status);
}

} // namespace

ReviewServer::ReviewServer(ReviewStore& store, std::optional<std::filesystem::path> ui_dir)
    : store_(store), server_(std::make_unique<httplib::Server>())
{
    auto& s = *server_;

    s.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t limit = 20;
        if (req.has_param("limit")) {
            try {
                const long v = std::stol(req.get_param_value("limit"));
                if (v < 0)
                    throw std::invalid_argument("negative");
                limit = static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                send_error(res, 400, "limit must be a non-negative integer");
                return;
            }
        }
        ordered_json out = ordered_json::array();
        for (const auto& item : store_.queue(limit))
            out.push_back(to_json(item));
        send_json(res, out);
    });

    s.Get(R"(/api/items/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto item = store_.item(req.matches[1]);
        if (!item)
            send_error(res, 404, "unknown instance " + std::string(req.matches[1]));
        else
            send_json(res, to_json(*item));
    });

    s.Post("/api/decision", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error&) {
            send_error(res, 400, "body must be JSON");
            return;
        }
        if (!body.is_object() || !body.contains("instance_id") || !body["instance_id"].is_string() ||
            !body.contains("label") || !body["label"].is_string()) {
            send_error(res, 400, "expected {instance_id, label, reviewer}");
            return;
        }
        const std::string reviewer =
            body.contains("reviewer") && body["reviewer"].is_string() ? body["reviewer"].get<std::string>() : "";
        try {
            const auto out = store_.decide(body["instance_id"], body["label"], reviewer);
            send_json(res, {{"remaining", out.remaining},
                            {"superseded", out.superseded},
                            {"seq", out.decision.seq},
                            {"timestamp", out.decision.timestamp}});
        } catch (const NotFoundError& e) {
            send_error(res, 404, e.what());
        } catch (const ValidationError& e) {
            send_error(res, 422, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    s.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, to_json(store_.progress()));
    });

    s.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(store_.export_jsonl(), "application/x-ndjson");
    });

    if (ui_dir) {
        if (!s.set_mount_point("/", ui_dir->string()))
            throw NotFoundError("UI directory " + ui_dir->string() + " does not exist");
    } else {
        s.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kPlaceholder, "text/html"); });
    }
}

ReviewServer::~ReviewServer() = default;

int ReviewServer::bind(const std::string& host, int port)
{
    if (port == 0)
        return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::run() { return server_->listen_after_bind(); }

void ReviewServer::stop() { server_->stop(); }

} // namespace relanno::orchestrator
