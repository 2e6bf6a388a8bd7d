#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "glyphforge/knowledge.hpp"

namespace httplib {
class Server;
}

namespace glyphforge {

// Failure that maps onto an HTTP status code.
class ApiError : public std::runtime_error {
public:
    ApiError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

// Mutex that grants the lock in request order.
class FifoMutex {
public:
    void lock();
    void unlock();

private:
    std::mutex mutex_;
    std::condition_variable turn_;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t serving_ = 0;
};

// One knowledge base served over HTTP. Reads run concurrently; mutations are
// applied one at a time in arrival order and written to disk before they are
// acknowledged, so the in-memory state never runs ahead of the file.
class ApiSession {
public:
    ApiSession(std::filesystem::path kb_path, KnowledgeBase kb);

    // Loads `kb_path`, or creates and persists an empty knowledge base of
    // `create_dims` when the file does not exist. Throws DimsMismatch when both
    // exist and disagree, IoError when neither is available.
    static ApiSession open(const std::filesystem::path& kb_path, std::optional<GridDims> create_dims);

    ApiSession(ApiSession&&) = delete;

    nlohmann::json meta() const;
    nlohmann::json labels() const;
    nlohmann::json weights(const std::string& label) const;
    nlohmann::json classify(const nlohmann::json& request) const;
    nlohmann::json teach(const nlohmann::json& request);
    nlohmann::json forget(const std::string& label);

    std::uint64_t version() const;
    KnowledgeBase snapshot() const;
    const std::filesystem::path& kb_path() const noexcept { return kb_path_; }

private:
    std::filesystem::path kb_path_;
    mutable std::shared_mutex state_mutex_;
    FifoMutex writer_mutex_;
    KnowledgeBase kb_;
    std::uint64_t version_ = 0;
};

// Registers the /api routes (and, if given, a static asset directory at "/").
void mount_routes(httplib::Server& server, ApiSession& session,
                  const std::optional<std::filesystem::path>& static_dir = std::nullopt);

// "host:port" (or ":port", meaning 127.0.0.1). Throws InvalidArgument.
std::pair<std::string, int> parse_bind_address(const std::string& text);

}  // namespace glyphforge
