#include <cstdlib>

#ifdef RAVE_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "json_util.hpp"
#include "rave/backends.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

namespace {

struct SplitUrl {
    std::string scheme_host;  // "https://api.openai.com"
    std::string path_prefix;  // "/v1"
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    return {base_url.substr(0, path_start), base_url.substr(path_start)};
}

json post_json(const std::string& base_url, const std::string& path, const json& body,
               const std::string& bearer_token) {
    SplitUrl url = split_base_url(base_url);
    httplib::Client client(url.scheme_host);
    client.set_connection_timeout(15);
    client.set_read_timeout(60);

    httplib::Headers headers{{"Authorization", "Bearer " + bearer_token}};
    auto res = client.Post(url.path_prefix + path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransportError("POST " + base_url + path + " failed: " +
                             httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ServiceError("POST " + base_url + path + " returned " +
                               std::to_string(res->status) + ": " + res->body,
                           res->status);
    }
    json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
        throw ServiceError("service returned unparseable JSON body", 502);
    }
    return parsed;
}

std::optional<std::string> env_value(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

}  // namespace

LiveBackend::LiveBackend(LiveEndpoints endpoints, LiveCredentials credentials)
    : endpoints_(std::move(endpoints)), credentials_(std::move(credentials)) {
    if (credentials_.llm_api_key.empty()) {
        throw ConfigError("live mode requires RAVE_LLM_API_KEY");
    }
    if (credentials_.embed_api_key.empty()) credentials_.embed_api_key = credentials_.llm_api_key;
    if (credentials_.search_api_key.empty()) {
        throw ConfigError("live mode requires RAVE_SEARCH_API_KEY");
    }
    if (credentials_.search_engine_id.empty()) {
        throw ConfigError("live mode requires RAVE_SEARCH_ENGINE_ID");
    }
}

std::unique_ptr<LiveBackend> LiveBackend::from_env(LiveEndpoints endpoints) {
    LiveCredentials credentials;
    credentials.llm_api_key = env_value("RAVE_LLM_API_KEY").value_or("");
    credentials.embed_api_key = env_value("RAVE_EMBED_API_KEY").value_or("");
    credentials.search_api_key = env_value("RAVE_SEARCH_API_KEY").value_or("");
    credentials.search_engine_id = env_value("RAVE_SEARCH_ENGINE_ID").value_or("");
    return std::make_unique<LiveBackend>(std::move(endpoints), std::move(credentials));
}

std::string LiveBackend::chat(const LlmRequest& request) {
    json body{{"model", request.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"top_p", request.top_p},
              {"max_tokens", request.max_tokens}};
    json res = post_json(endpoints_.llm_base_url, "/chat/completions", body,
                         credentials_.llm_api_key);
    if (!res.contains("choices") || !res["choices"].is_array() || res["choices"].empty()) {
        throw ServiceError("chat response has no choices", 502);
    }
    const json& message = res["choices"][0];
    if (!message.contains("message") || !message["message"].contains("content")) {
        throw ServiceError("chat response has no message content", 502);
    }
    return message["message"]["content"].get<std::string>();
}

std::vector<std::vector<double>> LiveBackend::embed(const std::vector<std::string>& texts,
                                                    const std::string& model_id) {
    json body{{"model", model_id}, {"input", texts}};
    json res = post_json(endpoints_.embed_base_url, "/embeddings", body,
                         credentials_.embed_api_key);
    if (!res.contains("data") || !res["data"].is_array()) {
        throw ServiceError("embedding response has no data array", 502);
    }
    std::vector<std::vector<double>> out(texts.size());
    for (const json& item : res["data"]) {
        auto index = item.value("index", -1);
        if (index < 0 || index >= static_cast<int>(out.size())) {
            throw ServiceError("embedding response has an out-of-range index", 502);
        }
        out[index] = item.at("embedding").get<std::vector<double>>();
    }
    return out;
}

std::vector<SearchResult> LiveBackend::search(const std::string& query, int results_per_query) {
    SplitUrl url = split_base_url(endpoints_.search_base_url);
    httplib::Client client(url.scheme_host);
    client.set_connection_timeout(15);
    client.set_read_timeout(60);

    httplib::Params params{{"key", credentials_.search_api_key},
                           {"cx", credentials_.search_engine_id},
                           {"q", query},
                           {"num", std::to_string(results_per_query)}};
    auto res = client.Get(url.path_prefix, params, httplib::Headers{});
    if (!res) {
        throw TransportError("GET " + endpoints_.search_base_url + " failed: " +
                             httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ServiceError("search returned " + std::to_string(res->status) + ": " + res->body,
                           res->status);
    }
    json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
        throw ServiceError("search returned unparseable JSON body", 502);
    }

    std::vector<SearchResult> out;
    if (!parsed.contains("items") || !parsed["items"].is_array()) return out;  // legitimately empty
    int rank = 0;
    for (const json& item : parsed["items"]) {
        if (static_cast<int>(out.size()) >= results_per_query) break;
        SearchResult r;
        r.title = item.value("title", "");
        r.url = item.value("link", "");
        r.text = item.value("snippet", "");
        r.domain = domain_of_url(r.url);
        r.rank_in_search = ++rank;
        if (r.url.empty() || r.domain.empty()) continue;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace rave
