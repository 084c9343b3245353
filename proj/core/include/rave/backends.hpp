#pragma once
// Backend implementations for the gateway.
//
// LiveBackend talks to real services over HTTPS (OpenAI-style chat and
// embeddings, Google Custom Search). SimulatedBackend is a fully
// deterministic offline stand-in used for fixture recording and smoke runs;
// identical requests always produce identical responses, so caches recorded
// against it replay byte-identically.

#include <memory>
#include <string>
#include <vector>

#include "rave/gateway.hpp"

namespace rave {

class SimulatedBackend : public Backend {
public:
    SimulatedBackend() = default;

    std::string name() const override { return "simulated"; }
    std::string chat(const LlmRequest& request) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                           const std::string& model_id) override;
    std::vector<SearchResult> search(const std::string& query, int results_per_query) override;

    // Embedding dimension of the simulated model.
    static constexpr int kDim = 64;
};

struct LiveEndpoints {
    std::string llm_base_url = "https://api.openai.com/v1";
    std::string embed_base_url = "https://api.openai.com/v1";
    std::string search_base_url = "https://www.googleapis.com/customsearch/v1";
};

struct LiveCredentials {
    std::string llm_api_key;     // RAVE_LLM_API_KEY
    std::string embed_api_key;   // RAVE_EMBED_API_KEY (falls back to the LLM key)
    std::string search_api_key;  // RAVE_SEARCH_API_KEY
    std::string search_engine_id;  // RAVE_SEARCH_ENGINE_ID (Custom Search cx)
};

class LiveBackend : public Backend {
public:
    LiveBackend(LiveEndpoints endpoints, LiveCredentials credentials);

    // Reads credentials from the documented environment variables and
    // throws ConfigError if a required key is missing.
    static std::unique_ptr<LiveBackend> from_env(LiveEndpoints endpoints);

    std::string name() const override { return "live"; }
    std::string chat(const LlmRequest& request) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                           const std::string& model_id) override;
    std::vector<SearchResult> search(const std::string& query, int results_per_query) override;

private:
    LiveEndpoints endpoints_;
    LiveCredentials credentials_;
};

}  // namespace rave
