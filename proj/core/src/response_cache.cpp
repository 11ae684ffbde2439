#include "cotkit/response_cache.hpp"

#include <chrono>
#include <ctime>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "cotkit/errors.hpp"

namespace cotkit {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw RuntimeError("SHA-256 digest failed");
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string canonical_request(const ChatRequest& r) {
    // nlohmann::json objects keep keys sorted, so dump() is canonical.
    json j{{"model", r.model},
           {"system", r.system},
           {"user", r.user},
           {"temperature", r.temperature},
           {"top_p", r.top_p},
           {"max_tokens", r.max_tokens}};
    return j.dump();
}

std::string request_key(const ChatRequest& r) { return sha256_hex(canonical_request(r)); }

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.empty()) return;
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_);
        if (!in) throw RuntimeError("cannot read cache " + path_.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const auto j = json::parse(line);
                if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::runtime_error("schema_version");
                CacheEntry e;
                e.key = j.at("key").get<std::string>();
                e.model = j.value("model", std::string{});
                e.response.text = j.at("response").get<std::string>();
                e.response.usage.prompt_tokens = j.at("usage").value("prompt_tokens", std::size_t{0});
                e.response.usage.completion_tokens = j.at("usage").value("completion_tokens", std::size_t{0});
                e.created_at = j.value("created_at", std::string{});
                entries_.try_emplace(e.key, std::move(e));
            } catch (const std::exception& ex) {
                ++skipped_;
                spdlog::warn("cache {}:{}: skipping unreadable line ({})", path_.string(), lineno, ex.what());
            }
        }
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    bool torn_tail = false;
    if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
        std::ifstream tail(path_, std::ios::binary | std::ios::ate);
        tail.seekg(-1, std::ios::end);
        torn_tail = tail.get() != '\n';
    }
    out_.open(path_, std::ios::app);
    if (!out_) throw RuntimeError("cannot open cache " + path_.string() + " for appending");
    // A crash mid-append leaves a partial line; start fresh after it.
    if (torn_tail) out_ << '\n';
}

std::optional<CacheEntry> ResponseCache::lookup(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::insert(const CacheEntry& entry) {
    std::lock_guard lock(mu_);
    if (!entries_.try_emplace(entry.key, entry).second) return;
    if (!out_.is_open()) return;
    json j{{"schema_version", kSchemaVersion},
           {"key", entry.key},
           {"model", entry.model},
           {"response", entry.response.text},
           {"usage",
            {{"prompt_tokens", entry.response.usage.prompt_tokens},
             {"completion_tokens", entry.response.usage.completion_tokens}}},
           {"created_at", entry.created_at}};
    out_ << j.dump() << '\n';
    out_.flush();
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

CachedResponse cached_call(ResponseCache& cache, const ChatRequest& request, ChatClient& client) {
    const auto key = request_key(request);
    if (auto hit = cache.lookup(key)) return {hit->response, true};
    auto response = client.complete(request);
    cache.insert({key, request.model, response, utc_now()});
    return {std::move(response), false};
}

}  // namespace cotkit
