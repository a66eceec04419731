#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "relanno/backends.hpp"
#include "relanno/error.hpp"

namespace relanno::backends {

namespace {

struct Endpoint {
    std::string origin;   // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url)
{
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

HttpAnnotator::HttpAnnotator(HttpTransport transport) : transport_(std::move(transport)) {}

std::string HttpAnnotator::request_body(const HttpTransport& t, const std::vector<prompting::Message>& messages,
                                        double temperature, std::optional<std::int64_t> seed)
{
    nlohmann::ordered_json body;
    body["model"] = t.model;
    auto msgs = nlohmann::ordered_json::array();
    for (const auto& m : messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = msgs;
    body["temperature"] = temperature;
    if (seed)
        body["seed"] = *seed;
    return body.dump();
}

std::string HttpAnnotator::extract_text(std::string_view body)
{
    const auto j = nlohmann::json::parse(body);
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
            return c["message"]["content"].get<std::string>();
        if (c.contains("text") && c["text"].is_string())
            return c["text"].get<std::string>();
    }
    for (const char* key : {"content", "text", "output"})
        if (j.contains(key) && j[key].is_string())
            return j[key].get<std::string>();
    throw TransportError("response body carries no completion text", 1);
}

Completion HttpAnnotator::complete(const prompting::RenderedPrompt&, const std::vector<prompting::Message>& messages,
                                   const CallContext& ctx)
{
    const BackendConfig* cfg = ctx.config;
    const RetryPolicy retry = cfg ? cfg->retry : RetryPolicy{};

    httplib::Headers headers;
    if (!transport_.auth_env.empty()) {
        const char* token = std::getenv(transport_.auth_env.c_str());
        if (!token || !*token)
            throw ConfigError("environment variable " + transport_.auth_env + " holding the API token is not set");
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    const auto ep = split_endpoint(transport_.endpoint);
    httplib::Client client(ep.origin);
    const auto timeout = std::chrono::duration<double>(transport_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    const auto body = request_body(transport_, messages, cfg ? cfg->temperature : 0.0, cfg ? cfg->seed : std::nullopt);

    std::string last_error;
    const auto started = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (res && res->status == 200) {
            Completion c;
            c.text = extract_text(res->body);
            c.latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            c.attempts = attempt;
            return c;
        }
        if (res) {
            last_error = "HTTP " + std::to_string(res->status);
            if (!retryable(res->status))
                throw TransportError(transport_.endpoint + ": " + last_error, attempt);
        } else {
            last_error = httplib::to_string(res.error());
        }
        if (attempt < retry.max_attempts)
            std::this_thread::sleep_for(
                std::chrono::duration<double>(retry.backoff_seconds * std::pow(2.0, attempt - 1)));
    }
    throw TransportError(transport_.endpoint + ": " + last_error + " after " + std::to_string(retry.max_attempts) +
                             " attempts",
                         retry.max_attempts);
}

} // namespace relanno::backends
