#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "relanno/review.hpp"

namespace httplib {
class Server;
}

namespace relanno::orchestrator {

/// /api endpoints over a ReviewStore, plus static UI assets at /.
class ReviewServer {
public:
    ReviewServer(ReviewStore& store, std::optional<std::filesystem::path> ui_dir = std::nullopt);
    ~ReviewServer();

    /// Binds to an ephemeral port when `port` is 0 and returns the bound port (-1 on failure).
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool run();
    void stop();

private:
    ReviewStore& store_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace relanno::orchestrator
