#include <doctest.h>

#include <fstream>

#include "rave/config.hpp"
#include "test_support.hpp"

using namespace rave;
using rave::testing::fresh_dir;

namespace {

EnvReader no_env() {
    return [](const std::string&) { return std::optional<std::string>{}; };
}

EnvReader env_with(std::map<std::string, std::string> values) {
    return [values = std::move(values)](const std::string& name) -> std::optional<std::string> {
        auto it = values.find(name);
        if (it == values.end()) return std::nullopt;
        return it->second;
    };
}

}  // namespace

TEST_CASE("defaults reproduce the reference setup") {
    RunConfig config = load_config({}, no_env(), std::nullopt);
    CHECK(config.alpha == 0.6);
    CHECK(config.k == 3);
    CHECK(config.temperature == 0.0);
    CHECK(config.top_p == 1.0);
    CHECK(config.max_tokens == 500);
    CHECK(config.results_per_query == 5);
    CHECK(config.retries == 3);
    CHECK(config.model_id == "gpt-4o-2024-08-06");
    CHECK(config.strategy == Strategy::Rave);
    CHECK(config.mode == GatewayMode::Replay);
    CHECK(config.alpha_grid == std::vector<double>{0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
    CHECK(config.k_grid == std::vector<int>{1, 3, 5, 8, 10});
    CHECK(!config.claim_fallback_search);
}

TEST_CASE("precedence: flags beat env beats file beats defaults") {
    std::string dir = fresh_dir("config_prec");
    std::string file = dir + "/config.json";
    {
        std::ofstream out(file);
        out << R"({"alpha": 0.3, "k": 5, "model_id": "from-file"})";
    }

    // File only.
    RunConfig from_file = load_config({}, no_env(), file);
    CHECK(from_file.alpha == 0.3);
    CHECK(from_file.k == 5);
    CHECK(from_file.model_id == "from-file");

    // Env overrides file.
    auto env = env_with({{"RAVE_ALPHA", "0.4"}, {"RAVE_MODEL_ID", "from-env"}});
    RunConfig from_env = load_config({}, env, file);
    CHECK(from_env.alpha == 0.4);
    CHECK(from_env.k == 5);
    CHECK(from_env.model_id == "from-env");

    // Flags override both.
    RunConfig from_flags = load_config({{"alpha", "0.8"}}, env, file);
    CHECK(from_flags.alpha == 0.8);
    CHECK(from_flags.model_id == "from-env");
}

TEST_CASE("unknown keys are rejected, never ignored") {
    CHECK_THROWS_AS(load_config({{"alhpa", "0.5"}}, no_env(), std::nullopt), ConfigError);

    std::string dir = fresh_dir("config_unknown");
    std::string file = dir + "/config.json";
    {
        std::ofstream out(file);
        out << R"({"mistyped_key": 1})";
    }
    CHECK_THROWS_AS(load_config({}, no_env(), file), ConfigError);
}

TEST_CASE("out-of-range values are rejected") {
    CHECK_THROWS_AS(load_config({{"alpha", "1.5"}}, no_env(), std::nullopt), ConfigError);
    CHECK_THROWS_AS(load_config({{"alpha", "-0.1"}}, no_env(), std::nullopt), ConfigError);
    CHECK_THROWS_AS(load_config({{"k", "0"}}, no_env(), std::nullopt), ConfigError);
    CHECK_THROWS_AS(load_config({{"results_per_query", "0"}}, no_env(), std::nullopt),
                    ConfigError);
    CHECK_THROWS_AS(load_config({{"temperature", "3.0"}}, no_env(), std::nullopt), ConfigError);
    CHECK_THROWS_AS(load_config({{"alpha", "abc"}}, no_env(), std::nullopt), ConfigError);
    CHECK_THROWS_AS(load_config({{"mode", "offline"}}, no_env(), std::nullopt), ConfigError);
    CHECK_THROWS_AS(load_config({{"strategy", "RAVE_ULTRA"}}, no_env(), std::nullopt),
                    ConfigError);
    CHECK_THROWS_AS(load_config({{"one_se_prefer", "sideways"}}, no_env(), std::nullopt),
                    ConfigError);
    CHECK_THROWS_AS(load_config({{"alpha_grid", "0.5,1.4"}}, no_env(), std::nullopt), ConfigError);
}

TEST_CASE("list-valued keys parse from csv strings and json arrays") {
    RunConfig config = load_config({{"k_grid", "2, 4, 6"}}, no_env(), std::nullopt);
    CHECK(config.k_grid == std::vector<int>{2, 4, 6});

    std::string dir = fresh_dir("config_lists");
    std::string file = dir + "/config.json";
    {
        std::ofstream out(file);
        out << R"({"alpha_grid": [0.2, 0.5], "k_grid": [1, 9]})";
    }
    RunConfig from_file = load_config({}, no_env(), file);
    CHECK(from_file.alpha_grid == std::vector<double>{0.2, 0.5});
    CHECK(from_file.k_grid == std::vector<int>{1, 9});
}

TEST_CASE("the config snapshot echoes every documented key") {
    RunConfig config = load_config({{"alpha", "0.7"}}, no_env(), std::nullopt);
    auto snapshot = config_snapshot(config);
    for (const std::string& key : config_keys()) {
        CAPTURE(key);
        CHECK(snapshot.contains(key));
    }
    CHECK(snapshot.at("alpha").rfind("0.7", 0) == 0);
    CHECK(snapshot.at("strategy") == "RAVE");
}
