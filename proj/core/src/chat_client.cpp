#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "cotkit/chat_client.hpp"

#include <cmath>
#include <random>
#include <regex>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cotkit/errors.hpp"
#include "cotkit/stats.hpp"
#include "cotkit/tokenizer.hpp"

namespace cotkit {

using nlohmann::json;

namespace {

constexpr const char* kCompletionsPath = "/v1/chat/completions";

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string completion_body(const std::string& content, std::size_t prompt_tokens) {
    json j{{"id", "mock"},
           {"object", "chat.completion"},
           {"choices", json::array({json{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", content}}},
                                         {"finish_reason", "stop"}}})},
           {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", Tokenizer::approximate().count(content)}}}};
    return j.dump();
}

struct ParsedRequest {
    std::string model;
    std::string user;
};

ParsedRequest parse_request(const std::string& body) {
    const auto j = json::parse(body);
    ParsedRequest r;
    r.model = j.at("model").get<std::string>();
    for (const auto& m : j.at("messages"))
        if (m.at("role") == "user") r.user = m.at("content").get<std::string>();
    return r;
}

std::string error_message(const std::string& body) {
    try {
        const auto j = json::parse(body);
        if (j.contains("error")) {
            const auto& e = j.at("error");
            if (e.is_string()) return e.get<std::string>();
            if (e.is_object() && e.contains("message")) return e.at("message").get<std::string>();
        }
    } catch (const json::exception&) {
    }
    return body.substr(0, 200);
}

}  // namespace

void ChatRequest::validate() const {
    if (model.empty()) throw ValidationError("chat request needs a model");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ValidationError("temperature must lie in [0,2]");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError("top_p must lie in (0,1]");
    if (max_tokens == 0) throw ValidationError("max_tokens must be at least 1");
}

ChatRequest thinking_request(std::string model, std::string user) {
    return {std::move(model), {}, std::move(user), 0.7, 0.95, 4096};
}

ChatRequest answering_request(std::string model, std::string user) {
    return {std::move(model), {}, std::move(user), 0.1, 0.95, 16};
}

ChatRequest summarizer_request(std::string model, std::string system, std::string user) {
    return {std::move(model), std::move(system), std::move(user), 0.3, 0.95, 1024};
}

std::string request_body(const ChatRequest& r) {
    json messages = json::array();
    if (!r.system.empty()) messages.push_back({{"role", "system"}, {"content", r.system}});
    messages.push_back({{"role", "user"}, {"content", r.user}});
    json j{{"model", r.model},
           {"messages", messages},
           {"temperature", r.temperature},
           {"top_p", r.top_p},
           {"max_tokens", r.max_tokens}};
    return j.dump();
}

ChatResponse parse_response_body(const std::string& body) {
    try {
        const auto j = json::parse(body);
        ChatResponse r;
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage") && j.at("usage").is_object()) {
            r.usage.prompt_tokens = j.at("usage").value("prompt_tokens", std::size_t{0});
            r.usage.completion_tokens = j.at("usage").value("completion_tokens", std::size_t{0});
        }
        return r;
    } catch (const json::exception& e) {
        throw RemoteError(200, std::string("malformed completion body: ") + e.what());
    }
}

HttpTransport::HttpTransport(std::string endpoint, std::string api_key, std::chrono::seconds read_timeout)
    : api_key_(std::move(api_key)), read_timeout_(read_timeout) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(endpoint, m, url)) throw ConfigError("endpoint must be an http(s) URL: " + endpoint);
    base_ = m[1].str();
    prefix_ = m[2].str();
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    // Accept endpoints given with the API path already attached.
    if (prefix_.ends_with("/v1/chat/completions")) prefix_.resize(prefix_.size() - 20);
}

HttpReply HttpTransport::post(const std::string& path, const std::string& body) {
    httplib::Client cli(base_);
    cli.set_connection_timeout(std::chrono::seconds(10));
    cli.set_read_timeout(read_timeout_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(prefix_ + path, headers, body, "application/json");
    if (!res) throw TransportError("request to " + base_ + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

MockTransport::MockTransport(Handler handler) : handler_(std::move(handler)) {}

HttpReply MockTransport::post(const std::string& path, const std::string& body) {
    ++calls_;
    return handler_(path, body);
}

std::shared_ptr<MockTransport> MockTransport::echo() {
    return std::make_shared<MockTransport>([](const std::string&, const std::string& body) {
        const auto req = parse_request(body);
        return HttpReply{200, completion_body(req.user, Tokenizer::approximate().count(req.user))};
    });
}

std::shared_ptr<MockTransport> MockTransport::offline_model() {
    return std::make_shared<MockTransport>([](const std::string&, const std::string& body) {
        const auto req = parse_request(body);
        return HttpReply{200, completion_body(mock_reply(req.model, req.user), Tokenizer::approximate().count(req.user))};
    });
}

std::shared_ptr<MockTransport> MockTransport::scripted(std::vector<int> statuses, std::string reply) {
    auto step = std::make_shared<std::atomic<std::size_t>>(0);
    return std::make_shared<MockTransport>(
        [statuses = std::move(statuses), reply = std::move(reply), step](const std::string&, const std::string&) {
            const auto i = step->fetch_add(1);
            if (i < statuses.size() && statuses[i] != 200)
                return HttpReply{statuses[i], R"({"error":{"message":"scripted failure"}})"};
            return HttpReply{200, completion_body(reply, 0)};
        });
}

std::string mock_reply(const std::string& model, const std::string& user) {
    const char letter = static_cast<char>('A' + fnv1a(model + '\n' + user) % 5);
    const auto reasoning_at = user.find("Reasoning:\n");
    const auto instruction_at = user.rfind("\n\nAnswer with a single letter");
    if (instruction_at != std::string::npos) {
        if (reasoning_at != std::string::npos && reasoning_at < instruction_at) {
            static const std::regex answer_is(R"(answer is:?\s*\(?([A-E])\b)", std::regex::icase);
            const std::string reasoning = user.substr(reasoning_at, instruction_at - reasoning_at);
            std::string found;
            for (auto it = std::sregex_iterator(reasoning.begin(), reasoning.end(), answer_is);
                 it != std::sregex_iterator(); ++it)
                found = (*it)[1].str();
            if (!found.empty())
                return "The answer is " + std::string(1, static_cast<char>(std::toupper(found[0]))) + ".";
        }
        return "My best guess is " + std::string(1, letter) + ".";
    }
    return "Okay, let me think about this question step by step. The findings described point toward option " +
           std::string(1, letter) + ". Therefore, the answer is " + std::string(1, letter) + ".";
}

std::shared_ptr<Transport> make_transport(const std::string& endpoint, const std::string& api_key) {
    if (endpoint.empty()) throw ConfigError("no endpoint configured (set COTKIT_ENDPOINT or use \"mock\")");
    if (endpoint == "mock") return MockTransport::offline_model();
    return std::make_shared<HttpTransport>(endpoint, api_key);
}

std::chrono::milliseconds RetryPolicy::delay(std::size_t retry, std::uint64_t salt) const {
    const double cap = static_cast<double>(base.count()) * std::pow(factor, static_cast<double>(retry));
    std::mt19937_64 rng(resample_seed(seed ^ salt, retry));
    std::uniform_real_distribution<double> u(0.0, cap);
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(u(rng))));
}

bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

ChatClient::ChatClient(std::shared_ptr<Transport> transport, RetryPolicy retry)
    : transport_(std::move(transport)), retry_(std::move(retry)) {
    if (!transport_) throw ConfigError("chat client needs a transport");
    if (retry_.max_tries == 0) throw ConfigError("retry policy needs at least one try");
    if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
    request.validate();
    const std::string body = request_body(request);
    const std::uint64_t salt = fnv1a(body);
    std::string last;
    for (std::size_t attempt = 0; attempt < retry_.max_tries; ++attempt) {
        ++calls_;
        const auto t0 = std::chrono::steady_clock::now();
        auto elapsed_ms = [&] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                .count();
        };
        try {
            const auto reply = transport_->post(kCompletionsPath, body);
            spdlog::debug("chat model={} status={} duration_ms={}", request.model, reply.status, elapsed_ms());
            if (reply.status >= 200 && reply.status < 300) return parse_response_body(reply.body);
            if (!is_retryable_status(reply.status)) throw RemoteError(reply.status, error_message(reply.body));
            last = "status " + std::to_string(reply.status) + ": " + error_message(reply.body);
        } catch (const TransportError& e) {
            spdlog::debug("chat model={} transport failure after {} ms: {}", request.model, elapsed_ms(), e.what());
            last = e.what();
        }
        if (attempt + 1 < retry_.max_tries) {
            ++retries_;
            retry_.sleep(retry_.delay(attempt, salt));
        }
    }
    throw TransportError("giving up after " + std::to_string(retry_.max_tries) + " tries: " + last);
}

ChatResponse llm_complete(const ChatRequest& request, ChatClient& client) { return client.complete(request); }

}  // namespace cotkit
