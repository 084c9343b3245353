#pragma once
// Uniform clients for the three external services (chat LLM, text
// embeddings, web search) behind a deterministic record/replay cache.
//
// REPLAY is hermetic: lookups hit the immutable in-memory snapshot loaded at
// construction and the backend is never touched. RECORD calls the backend on
// a miss and persists the response; repeated requests hit the stored entry.
// All clients are safe for concurrent use; cache writes are serialized
// through a single writer lock.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rave/errors.hpp"

namespace rave {

enum class GatewayMode { Live, Replay, Record };

std::string to_string(GatewayMode mode);
std::optional<GatewayMode> gateway_mode_from_string(std::string_view s);

enum class ServiceKind { Chat, Embed, Search };

std::string to_string(ServiceKind kind);

struct LlmRequest {
    std::string prompt;
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 500;
    std::string model_id;
};

// A web-search hit before an origin entity is attached.
struct SearchResult {
    std::string text;
    std::string domain;  // lowercase host of url
    std::string title;
    std::string url;
    int rank_in_search = 1;
};

struct CacheKey {
    ServiceKind kind = ServiceKind::Chat;
    std::string digest;  // sha256 of the canonical request payload

    bool operator==(const CacheKey&) const = default;
};

// Documented key function: the prompt is normalized by trimming trailing
// whitespace only, then the request is serialized as canonical JSON
// (sorted keys) and hashed. Field order can never change the key.
std::string normalize_prompt(std::string_view prompt);
std::string canonical_chat_request(const LlmRequest& request);
std::string canonical_embed_request(const std::string& text, const std::string& model_id);
std::string canonical_search_request(const std::string& query, int results_per_query);
CacheKey chat_cache_key(const LlmRequest& request);
CacheKey embed_cache_key(const std::string& text, const std::string& model_id);
CacheKey search_cache_key(const std::string& query, int results_per_query);

// Upstream transport. Implementations: LiveBackend (HTTP), SimulatedBackend
// (deterministic offline), NullBackend (always throws), test stubs.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual std::string chat(const LlmRequest& request) = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                                   const std::string& model_id) = 0;
    virtual std::vector<SearchResult> search(const std::string& query, int results_per_query) = 0;
};

// Backend that fails on any use. Stands in when REPLAY needs no transport.
class NullBackend : public Backend {
public:
    std::string name() const override { return "null"; }
    std::string chat(const LlmRequest&) override { return fail(); }
    std::vector<std::vector<double>> embed(const std::vector<std::string>&,
                                           const std::string&) override {
        fail();
        return {};
    }
    std::vector<SearchResult> search(const std::string&, int) override {
        fail();
        return {};
    }

private:
    [[noreturn]] std::string fail() const {
        throw TransportError("network is disabled for this run");
    }
};

// Append-only content-addressed store, one JSONL file per service kind.
// Line format: {"v":1,"key":...,"kind":...,"request":{...},"response":{...},"ts":...}
class FixtureCache {
public:
    explicit FixtureCache(std::string dir);

    // Loads all three service files that exist under dir.
    void load();

    // Marks the snapshot immutable; lookups skip locking from then on.
    void freeze();

    std::optional<std::string> lookup(const CacheKey& key) const;

    // Persists and indexes one entry; serialized through a single writer
    // lock. Entries already present are left untouched.
    void append(const CacheKey& key, const std::string& request_json,
                const std::string& response_json);

    std::size_t size() const;
    // Digest over the sorted (key, response) pairs; stable across load order.
    std::string digest() const;

private:
    std::string path_for(ServiceKind kind) const;

    std::string dir_;
    bool frozen_ = false;
    std::map<std::string, std::string> entries_;  // "kind:digest" -> response payload
    mutable std::shared_mutex mutex_;
};

struct GatewayConfig {
    GatewayMode mode = GatewayMode::Replay;
    std::string cache_dir = "fixtures/cache";
    std::string model_id = "gpt-4o-2024-08-06";
    std::string embed_model_id = "text-embedding-3-small";
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 500;
    int results_per_query = 5;
    int retries = 3;                    // retryable failures before giving up
    double retry_backoff_seconds = 0.5; // doubled after each attempt
};

class Gateway {
public:
    Gateway(GatewayConfig config, std::unique_ptr<Backend> backend);

    // Fills model parameters from the config.
    std::string chat(const std::string& prompt);
    std::string chat(const LlmRequest& request);

    // One vector per input text, order-preserving, constant dimension.
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

    std::vector<SearchResult> search(const std::string& query);
    std::vector<SearchResult> search(const std::string& query, int results_per_query);

    const GatewayConfig& config() const { return config_; }
    const FixtureCache& cache() const { return cache_; }

    // Number of calls that reached the backend. Zero for a hermetic run.
    std::uint64_t backend_calls() const { return backend_calls_.load(); }

private:
    std::string cached_or_fetch(const CacheKey& key, const std::string& request_json,
                                const std::function<std::string()>& fetch);
    template <typename Fn>
    auto with_retries(ServiceKind kind, Fn&& fn);

    GatewayConfig config_;
    std::unique_ptr<Backend> backend_;
    FixtureCache cache_;
    std::atomic<std::uint64_t> backend_calls_{0};
};

}  // namespace rave
