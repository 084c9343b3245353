#include "rave/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

namespace {

double parse_double(const std::string& key, const std::string& value) {
    std::size_t consumed = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &consumed);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs a number, got '" + value + "'");
    }
    if (consumed != value.size()) {
        throw ConfigError("config key '" + key + "' needs a number, got '" + value + "'");
    }
    return parsed;
}

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t consumed = 0;
    long long parsed = 0;
    try {
        parsed = std::stoll(value, &consumed);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs an integer, got '" + value + "'");
    }
    if (consumed != value.size()) {
        throw ConfigError("config key '" + key + "' needs an integer, got '" + value + "'");
    }
    return parsed;
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = to_lower_ascii(trim(value));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' needs a boolean, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& part : split(value, ',')) {
        std::string p = trim(part);
        if (p.empty()) continue;
        out.push_back(parse_double(key, p));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' needs a non-empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const std::string& part : split(value, ',')) {
        std::string p = trim(part);
        if (p.empty()) continue;
        out.push_back(static_cast<int>(parse_int(key, p)));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' needs a non-empty list");
    return out;
}

template <typename T>
std::string join_list(const std::vector<T>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out << ',';
        out << values[i];
    }
    return out.str();
}

struct KeyDescriptor {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyDescriptor>& key_table() {
    static const std::vector<KeyDescriptor> table = {
        {"mode",
         [](RunConfig& c, const std::string& v) {
             auto mode = gateway_mode_from_string(to_lower_ascii(trim(v)));
             if (!mode) throw ConfigError("mode must be live, replay, or record; got '" + v + "'");
             c.mode = *mode;
         },
         [](const RunConfig& c) { return to_string(c.mode); }},
        {"backend",
         [](RunConfig& c, const std::string& v) {
             std::string b = to_lower_ascii(trim(v));
             if (b != "live" && b != "simulated") {
                 throw ConfigError("backend must be live or simulated; got '" + v + "'");
             }
             c.backend = b;
         },
         [](const RunConfig& c) { return c.backend; }},
        {"model_id", [](RunConfig& c, const std::string& v) { c.model_id = trim(v); },
         [](const RunConfig& c) { return c.model_id; }},
        {"embed_model_id", [](RunConfig& c, const std::string& v) { c.embed_model_id = trim(v); },
         [](const RunConfig& c) { return c.embed_model_id; }},
        {"temperature",
         [](RunConfig& c, const std::string& v) {
             c.temperature = parse_double("temperature", v);
             if (c.temperature < 0.0 || c.temperature > 2.0) {
                 throw ConfigError("temperature must be in [0, 2]");
             }
         },
         [](const RunConfig& c) { return std::to_string(c.temperature); }},
        {"top_p",
         [](RunConfig& c, const std::string& v) {
             c.top_p = parse_double("top_p", v);
             if (c.top_p <= 0.0 || c.top_p > 1.0) throw ConfigError("top_p must be in (0, 1]");
         },
         [](const RunConfig& c) { return std::to_string(c.top_p); }},
        {"max_tokens",
         [](RunConfig& c, const std::string& v) {
             c.max_tokens = static_cast<int>(parse_int("max_tokens", v));
             if (c.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.max_tokens); }},
        {"results_per_query",
         [](RunConfig& c, const std::string& v) {
             c.results_per_query = static_cast<int>(parse_int("results_per_query", v));
             if (c.results_per_query < 1) throw ConfigError("results_per_query must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.results_per_query); }},
        {"retries",
         [](RunConfig& c, const std::string& v) {
             c.retries = static_cast<int>(parse_int("retries", v));
             if (c.retries < 0) throw ConfigError("retries must be >= 0");
         },
         [](const RunConfig& c) { return std::to_string(c.retries); }},
        {"retry_backoff_seconds",
         [](RunConfig& c, const std::string& v) {
             c.retry_backoff_seconds = parse_double("retry_backoff_seconds", v);
             if (c.retry_backoff_seconds < 0.0) {
                 throw ConfigError("retry_backoff_seconds must be >= 0");
             }
         },
         [](const RunConfig& c) { return std::to_string(c.retry_backoff_seconds); }},
        {"llm_base_url", [](RunConfig& c, const std::string& v) { c.llm_base_url = trim(v); },
         [](const RunConfig& c) { return c.llm_base_url; }},
        {"embed_base_url", [](RunConfig& c, const std::string& v) { c.embed_base_url = trim(v); },
         [](const RunConfig& c) { return c.embed_base_url; }},
        {"search_base_url",
         [](RunConfig& c, const std::string& v) { c.search_base_url = trim(v); },
         [](const RunConfig& c) { return c.search_base_url; }},
        {"alpha",
         [](RunConfig& c, const std::string& v) {
             c.alpha = parse_double("alpha", v);
             if (c.alpha < 0.0 || c.alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
         },
         [](const RunConfig& c) { return std::to_string(c.alpha); }},
        {"k",
         [](RunConfig& c, const std::string& v) {
             c.k = static_cast<int>(parse_int("k", v));
             if (c.k < 1) throw ConfigError("k must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.k); }},
        {"strategy",
         [](RunConfig& c, const std::string& v) {
             auto s = strategy_from_string(trim(v));
             if (!s) throw ConfigError("unknown strategy '" + v + "'");
             c.strategy = *s;
         },
         [](const RunConfig& c) { return to_string(c.strategy); }},
        {"corpus", [](RunConfig& c, const std::string& v) { c.corpus_path = trim(v); },
         [](const RunConfig& c) { return c.corpus_path; }},
        {"corpus_format",
         [](RunConfig& c, const std::string& v) {
             auto f = corpus_format_from_string(to_lower_ascii(trim(v)));
             if (!f) throw ConfigError("unknown corpus format '" + v + "'");
             c.corpus_format = *f;
         },
         [](const RunConfig& c) { return to_string(c.corpus_format); }},
        {"seed",
         [](RunConfig& c, const std::string& v) {
             c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"workers",
         [](RunConfig& c, const std::string& v) {
             c.workers = static_cast<int>(parse_int("workers", v));
             if (c.workers < 0) throw ConfigError("workers must be >= 0");
         },
         [](const RunConfig& c) { return std::to_string(c.workers); }},
        {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = trim(v); },
         [](const RunConfig& c) { return c.out_dir; }},
        {"cache_dir", [](RunConfig& c, const std::string& v) { c.cache_dir = trim(v); },
         [](const RunConfig& c) { return c.cache_dir; }},
        {"assets_dir", [](RunConfig& c, const std::string& v) { c.assets_dir = trim(v); },
         [](const RunConfig& c) { return c.assets_dir; }},
        {"claim_fallback_search",
         [](RunConfig& c, const std::string& v) {
             c.claim_fallback_search = parse_bool("claim_fallback_search", v);
         },
         [](const RunConfig& c) { return c.claim_fallback_search ? "true" : "false"; }},
        {"alpha_grid",
         [](RunConfig& c, const std::string& v) {
             c.alpha_grid = parse_double_list("alpha_grid", v);
             for (double a : c.alpha_grid) {
                 if (a < 0.0 || a > 1.0) throw ConfigError("alpha_grid values must be in [0, 1]");
             }
         },
         [](const RunConfig& c) { return join_list(c.alpha_grid); }},
        {"bootstrap_resamples",
         [](RunConfig& c, const std::string& v) {
             c.bootstrap_resamples = static_cast<int>(parse_int("bootstrap_resamples", v));
             if (c.bootstrap_resamples < 1) {
                 throw ConfigError("bootstrap_resamples must be >= 1");
             }
         },
         [](const RunConfig& c) { return std::to_string(c.bootstrap_resamples); }},
        {"one_se_prefer",
         [](RunConfig& c, const std::string& v) {
             std::string p = to_lower_ascii(trim(v));
             if (p == "smaller") {
                 c.one_se_prefer = OneSePrefer::Smaller;
             } else if (p == "larger") {
                 c.one_se_prefer = OneSePrefer::Larger;
             } else {
                 throw ConfigError("one_se_prefer must be smaller or larger; got '" + v + "'");
             }
         },
         [](const RunConfig& c) {
             return c.one_se_prefer == OneSePrefer::Smaller ? "smaller" : "larger";
         }},
        {"k_grid",
         [](RunConfig& c, const std::string& v) {
             c.k_grid = parse_int_list("k_grid", v);
             for (int k : c.k_grid) {
                 if (k < 1) throw ConfigError("k_grid values must be >= 1");
             }
         },
         [](const RunConfig& c) { return join_list(c.k_grid); }},
    };
    return table;
}

const KeyDescriptor* find_key(const std::string& name) {
    for (const KeyDescriptor& d : key_table()) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

std::string json_value_to_string(const std::string& key, const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    if (value.is_number()) {
        std::ostringstream out;
        out << value.get<double>();
        return out.str();
    }
    if (value.is_array()) {
        std::ostringstream out;
        bool first = true;
        for (const json& item : value) {
            if (!first) out << ',';
            first = false;
            out << json_value_to_string(key, item);
        }
        return out.str();
    }
    throw ConfigError("config key '" + key + "' has an unsupported value type");
}

}  // namespace

EnvReader system_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const KeyDescriptor& d : key_table()) out.push_back(d.name);
        return out;
    }();
    return keys;
}

RunConfig load_config(const std::map<std::string, std::string>& flags, const EnvReader& env,
                      const std::optional<std::string>& config_file_path) {
    RunConfig config;

    // 1) Config file (lowest of the explicit layers).
    if (config_file_path) {
        std::ifstream in(*config_file_path);
        if (!in) throw ConfigError("cannot open config file: " + *config_file_path);
        json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            throw ConfigError("config file is not a JSON object: " + *config_file_path);
        }
        for (const auto& [key, value] : j.items()) {
            const KeyDescriptor* d = find_key(key);
            if (!d) throw ConfigError("unknown config key '" + key + "' in " + *config_file_path);
            d->set(config, json_value_to_string(key, value));
        }
    }

    // 2) Environment: RAVE_<UPPER KEY>.
    for (const KeyDescriptor& d : key_table()) {
        std::string env_name = "RAVE_";
        for (char c : d.name) env_name.push_back(static_cast<char>(std::toupper(c)));
        if (auto value = env(env_name)) d.set(config, *value);
    }

    // 3) Flags.
    for (const auto& [key, value] : flags) {
        const KeyDescriptor* d = find_key(key);
        if (!d) throw ConfigError("unknown config key '" + key + "'");
        d->set(config, value);
    }

    return config;
}

std::map<std::string, std::string> config_snapshot(const RunConfig& config) {
    std::map<std::string, std::string> out;
    for (const KeyDescriptor& d : key_table()) out[d.name] = d.get(config);
    return out;
}

}  // namespace rave
