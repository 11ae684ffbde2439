#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "cotkit/chat_client.hpp"

namespace cotkit {

/// Key fields serialized with sorted keys and no whitespace.
std::string canonical_request(const ChatRequest& r);
/// Lowercase hex SHA-256 of canonical_request().
std::string request_key(const ChatRequest& r);

struct CacheEntry {
    std::string key;
    std::string model;
    ChatResponse response;
    std::string created_at;  // UTC, ISO 8601
};

/// Append-only JSONL store. An empty path keeps entries in memory only.
/// Unreadable lines are skipped with a warning and counted.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path path);

    std::optional<CacheEntry> lookup(const std::string& key) const;
    /// First write wins; later entries under the same key are ignored.
    void insert(const CacheEntry& entry);

    std::size_t size() const;
    std::size_t skipped_lines() const noexcept { return skipped_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::unordered_map<std::string, CacheEntry> entries_;
    std::size_t skipped_ = 0;
    std::ofstream out_;
    mutable std::mutex mu_;
};

struct CachedResponse {
    ChatResponse response;
    bool from_cache = false;
};

CachedResponse cached_call(ResponseCache& cache, const ChatRequest& request, ChatClient& client);

}  // namespace cotkit
