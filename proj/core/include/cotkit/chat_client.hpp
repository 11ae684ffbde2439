#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace cotkit {

struct ChatRequest {
    std::string model;
    std::string system;
    std::string user;
    double temperature = 0.1;
    double top_p = 0.95;
    std::size_t max_tokens = 1024;

    /// Throws ValidationError on out-of-range sampling settings.
    void validate() const;
};

/// Role presets: reasoning generation, answering, and the optional refiner.
ChatRequest thinking_request(std::string model, std::string user);
ChatRequest answering_request(std::string model, std::string user);
ChatRequest summarizer_request(std::string model, std::string system, std::string user);

struct Usage {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    Usage usage;
};

/// Request body as sent on the wire (chat-completions JSON).
std::string request_body(const ChatRequest& r);
/// Parses choices[0].message.content and usage. Throws RemoteError(200, ...)
/// when the body is not a completion.
ChatResponse parse_response_body(const std::string& body);

struct HttpReply {
    int status = 0;
    std::string body;
};

/// Something that can POST a JSON body. Throws TransportError when no
/// HTTP status was obtained at all.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpReply post(const std::string& path, const std::string& body) = 0;
};

/// Plain HTTP(S) endpoint, e.g. "http://127.0.0.1:8000". Sends
/// "Authorization: Bearer <key>" when a key is given.
class HttpTransport : public Transport {
public:
    HttpTransport(std::string endpoint, std::string api_key = {},
                  std::chrono::seconds read_timeout = std::chrono::seconds(300));
    HttpReply post(const std::string& path, const std::string& body) override;

private:
    std::string base_;
    std::string prefix_;
    std::string api_key_;
    std::chrono::seconds read_timeout_;
};

/// In-process endpoint. Every call is counted.
class MockTransport : public Transport {
public:
    using Handler = std::function<HttpReply(const std::string& path, const std::string& body)>;
    explicit MockTransport(Handler handler);

    /// Replies with the last user message verbatim.
    static std::shared_ptr<MockTransport> echo();
    /// Offline stand-in for a served model; see mock_reply().
    static std::shared_ptr<MockTransport> offline_model();
    /// Replays `statuses` in order (then 200 forever) with `reply` as the 200 text.
    static std::shared_ptr<MockTransport> scripted(std::vector<int> statuses, std::string reply);

    HttpReply post(const std::string& path, const std::string& body) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    Handler handler_;
    std::atomic<std::size_t> calls_{0};
};

/// Deterministic reply of the offline model: answering prompts get the
/// letter named by an "answer is X" phrase in their reasoning section (or a
/// letter derived from a hash of the prompt); other prompts get a short
/// canned reasoning chain.
std::string mock_reply(const std::string& model, const std::string& user);

/// Builds a HttpTransport, or the offline model for "mock".
std::shared_ptr<Transport> make_transport(const std::string& endpoint, const std::string& api_key = {});

struct RetryPolicy {
    std::size_t max_tries = 5;
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    std::uint64_t seed = 0;
    /// Injected for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;

    /// Full jitter: uniform in [0, base * factor^retry].
    std::chrono::milliseconds delay(std::size_t retry, std::uint64_t salt) const;
};

bool is_retryable_status(int status);

class ChatClient {
public:
    ChatClient(std::shared_ptr<Transport> transport, RetryPolicy retry = {});

    /// Retries 429, 5xx and transport failures. Exhausted retries throw
    /// TransportError; other non-2xx replies throw RemoteError at once.
    ChatResponse complete(const ChatRequest& request);

    std::size_t network_calls() const noexcept { return calls_.load(); }
    std::size_t retries() const noexcept { return retries_.load(); }

private:
    std::shared_ptr<Transport> transport_;
    RetryPolicy retry_;
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> retries_{0};
};

ChatResponse llm_complete(const ChatRequest& request, ChatClient& client);

}  // namespace cotkit
