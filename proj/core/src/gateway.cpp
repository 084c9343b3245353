#include "rave/gateway.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json_util.hpp"
#include "rave/digest.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

std::string to_string(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Replay: return "replay";
        case GatewayMode::Record: return "record";
    }
    return "replay";
}

std::optional<GatewayMode> gateway_mode_from_string(std::string_view s) {
    if (s == "live") return GatewayMode::Live;
    if (s == "replay") return GatewayMode::Replay;
    if (s == "record") return GatewayMode::Record;
    return std::nullopt;
}

std::string to_string(ServiceKind kind) {
    switch (kind) {
        case ServiceKind::Chat: return "chat";
        case ServiceKind::Embed: return "embed";
        case ServiceKind::Search: return "search";
    }
    return "chat";
}

// ---------------------------------------------------------------------------
// Cache keys

std::string normalize_prompt(std::string_view prompt) { return trim_right(prompt); }

std::string canonical_chat_request(const LlmRequest& request) {
    // nlohmann objects serialize with sorted keys, which makes the payload
    // canonical regardless of insertion order.
    json j{{"prompt", normalize_prompt(request.prompt)},
           {"temperature", request.temperature},
           {"top_p", request.top_p},
           {"max_tokens", request.max_tokens},
           {"model_id", request.model_id}};
    return j.dump();
}

std::string canonical_embed_request(const std::string& text, const std::string& model_id) {
    json j{{"text", text}, {"model_id", model_id}};
    return j.dump();
}

std::string canonical_search_request(const std::string& query, int results_per_query) {
    json j{{"query", query}, {"results_per_query", results_per_query}};
    return j.dump();
}

CacheKey chat_cache_key(const LlmRequest& request) {
    return CacheKey{ServiceKind::Chat, sha256_hex(canonical_chat_request(request))};
}

CacheKey embed_cache_key(const std::string& text, const std::string& model_id) {
    return CacheKey{ServiceKind::Embed, sha256_hex(canonical_embed_request(text, model_id))};
}

CacheKey search_cache_key(const std::string& query, int results_per_query) {
    return CacheKey{ServiceKind::Search,
                    sha256_hex(canonical_search_request(query, results_per_query))};
}

// ---------------------------------------------------------------------------
// FixtureCache

FixtureCache::FixtureCache(std::string dir) : dir_(std::move(dir)) {}

std::string FixtureCache::path_for(ServiceKind kind) const {
    return dir_ + "/" + to_string(kind) + ".jsonl";
}

void FixtureCache::load() {
    for (ServiceKind kind : {ServiceKind::Chat, ServiceKind::Embed, ServiceKind::Search}) {
        std::ifstream in(path_for(kind));
        if (!in) continue;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (j.is_discarded() || !j.is_object()) {
                throw RecordParseError(path_for(kind) + ":" + std::to_string(line_no) +
                                       ": cache line is not a JSON object");
            }
            std::string key = jsonu::require_string(j, "key");
            std::string kind_tag = jsonu::require_string(j, "kind");
            if (!j.contains("response")) {
                throw RecordParseError(path_for(kind) + ": cache line missing response",
                                       "response");
            }
            // First capture wins; an exact re-record is a no-op.
            entries_.emplace(kind_tag + ":" + key, j.at("response").dump());
        }
    }
}

void FixtureCache::freeze() { frozen_ = true; }

std::optional<std::string> FixtureCache::lookup(const CacheKey& key) const {
    const std::string map_key = to_string(key.kind) + ":" + key.digest;
    if (frozen_) {
        auto it = entries_.find(map_key);
        return it == entries_.end() ? std::nullopt : std::optional<std::string>(it->second);
    }
    std::shared_lock lock(mutex_);
    auto it = entries_.find(map_key);
    return it == entries_.end() ? std::nullopt : std::optional<std::string>(it->second);
}

void FixtureCache::append(const CacheKey& key, const std::string& request_json,
                          const std::string& response_json) {
    if (frozen_) throw ConfigError("cannot append to a frozen fixture cache");
    std::unique_lock lock(mutex_);
    std::string map_key = to_string(key.kind) + ":" + key.digest;
    if (entries_.contains(map_key)) return;

    std::filesystem::create_directories(dir_);
    json line{{"v", 1},
              {"key", key.digest},
              {"kind", to_string(key.kind)},
              {"request", json::parse(request_json)},
              {"response", json::parse(response_json)},
              {"ts", utc_timestamp()}};
    std::ofstream out(path_for(key.kind), std::ios::app);
    if (!out) throw ConfigError("cannot append to cache file: " + path_for(key.kind));
    out << line.dump() << '\n';
    entries_.emplace(std::move(map_key), json::parse(response_json).dump());
}

std::size_t FixtureCache::size() const { return entries_.size(); }

std::string FixtureCache::digest() const {
    std::string material;
    for (const auto& [key, response] : entries_) {
        material += key;
        material += '=';
        material += response;
        material += '\n';
    }
    return sha256_hex(material);
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(GatewayConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)), cache_(config_.cache_dir) {
    if (!backend_) backend_ = std::make_unique<NullBackend>();
    cache_.load();
    if (config_.mode == GatewayMode::Replay) cache_.freeze();
}

template <typename Fn>
auto Gateway::with_retries(ServiceKind kind, Fn&& fn) {
    int attempts = 0;
    double backoff = config_.retry_backoff_seconds;
    for (;;) {
        ++attempts;
        try {
            backend_calls_.fetch_add(1, std::memory_order_relaxed);
            return fn();
        } catch (const ServiceError& e) {
            if (!e.retryable() || attempts > config_.retries) throw;
            log::warn(to_string(kind) + " service error (attempt " + std::to_string(attempts) +
                      "): " + e.what());
        } catch (const TransportError& e) {
            if (attempts > config_.retries) {
                throw TransportError(std::string(e.what()) + " (after " +
                                         std::to_string(attempts) + " attempts)",
                                     attempts);
            }
            log::warn(to_string(kind) + " transport error (attempt " + std::to_string(attempts) +
                      "): " + e.what());
        }
        if (backoff > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
    }
}

std::string Gateway::cached_or_fetch(const CacheKey& key, const std::string& request_json,
                                     const std::function<std::string()>& fetch) {
    if (auto hit = cache_.lookup(key)) return *hit;
    if (config_.mode == GatewayMode::Replay) {
        throw CacheMissError("replay cache miss for " + to_string(key.kind) + " key " + key.digest,
                             to_string(key.kind), key.digest);
    }
    std::string response = fetch();
    if (config_.mode == GatewayMode::Record) cache_.append(key, request_json, response);
    return response;
}

std::string Gateway::chat(const std::string& prompt) {
    LlmRequest request;
    request.prompt = prompt;
    request.temperature = config_.temperature;
    request.top_p = config_.top_p;
    request.max_tokens = config_.max_tokens;
    request.model_id = config_.model_id;
    return chat(request);
}

std::string Gateway::chat(const LlmRequest& request) {
    CacheKey key = chat_cache_key(request);
    std::string response = cached_or_fetch(key, canonical_chat_request(request), [&] {
        std::string text = with_retries(ServiceKind::Chat, [&] { return backend_->chat(request); });
        return json{{"text", text}}.dump();
    });
    json j = json::parse(response);
    return jsonu::require_string(j, "text");
}

std::vector<std::vector<double>> Gateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ConfigError("embed requires a non-empty text list");
    for (const std::string& t : texts) {
        if (t.empty()) throw ConfigError("embed requires non-empty texts");
    }

    std::vector<std::vector<double>> vectors(texts.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CacheKey key = embed_cache_key(texts[i], config_.embed_model_id);
        if (auto hit = cache_.lookup(key)) {
            json j = json::parse(*hit);
            vectors[i] = jsonu::require_array(j, "vector").get<std::vector<double>>();
        } else if (config_.mode == GatewayMode::Replay) {
            throw CacheMissError("replay cache miss for embed key " + key.digest, "embed",
                                 key.digest);
        } else {
            missing.push_back(i);
        }
    }
    if (!missing.empty()) {
        std::vector<std::string> batch;
        batch.reserve(missing.size());
        for (std::size_t i : missing) batch.push_back(texts[i]);
        auto fetched = with_retries(ServiceKind::Embed,
                                    [&] { return backend_->embed(batch, config_.embed_model_id); });
        if (fetched.size() != batch.size()) {
            throw ServiceError("embedding service returned " + std::to_string(fetched.size()) +
                                   " vectors for " + std::to_string(batch.size()) + " texts",
                               502);
        }
        for (std::size_t n = 0; n < missing.size(); ++n) {
            vectors[missing[n]] = fetched[n];
            if (config_.mode == GatewayMode::Record) {
                CacheKey key = embed_cache_key(texts[missing[n]], config_.embed_model_id);
                cache_.append(key, canonical_embed_request(texts[missing[n]], config_.embed_model_id),
                              json{{"vector", fetched[n]}}.dump());
            }
        }
    }

    // Shape contract: constant dimension per model.
    std::size_t dim = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != dim) {
            throw ServiceError("embedding dimensions are inconsistent within one batch", 502);
        }
    }
    return vectors;
}

std::vector<SearchResult> Gateway::search(const std::string& query) {
    return search(query, config_.results_per_query);
}

std::vector<SearchResult> Gateway::search(const std::string& query, int results_per_query) {
    if (trim(query).empty()) throw ConfigError("search requires a non-empty query");
    if (results_per_query < 1) throw ConfigError("results_per_query must be >= 1");

    CacheKey key = search_cache_key(query, results_per_query);
    std::string response =
        cached_or_fetch(key, canonical_search_request(query, results_per_query), [&] {
            auto results = with_retries(
                ServiceKind::Search, [&] { return backend_->search(query, results_per_query); });
            json items = json::array();
            for (const SearchResult& r : results) {
                items.push_back(json{{"text", r.text},
                                     {"domain", r.domain},
                                     {"title", r.title},
                                     {"url", r.url},
                                     {"rank", r.rank_in_search}});
            }
            return json{{"results", items}}.dump();
        });

    json j = json::parse(response);
    std::vector<SearchResult> out;
    for (const json& item : jsonu::require_array(j, "results")) {
        SearchResult r;
        r.text = jsonu::require_string(item, "text");
        r.domain = jsonu::require_string(item, "domain");
        r.title = jsonu::require_string(item, "title");
        r.url = jsonu::require_string(item, "url");
        r.rank_in_search = static_cast<int>(jsonu::require_integer(item, "rank"));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace rave
