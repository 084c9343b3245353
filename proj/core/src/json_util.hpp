#pragma once
// Internal JSON helpers. Not installed; vendor types stay out of public
// headers so the core library is consumable without the vendored json.

#include <optional>
#include <string>

#include <json.hpp>

#include "rave/errors.hpp"

namespace rave::jsonu {

using nlohmann::json;

inline std::string require_string(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw RecordParseError(std::string("missing or non-string field '") + field + "'", field);
    }
    return j.at(field).get<std::string>();
}

inline double require_number(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number()) {
        throw RecordParseError(std::string("missing or non-numeric field '") + field + "'", field);
    }
    return j.at(field).get<double>();
}

inline long long require_integer(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number_integer()) {
        throw RecordParseError(std::string("missing or non-integer field '") + field + "'", field);
    }
    return j.at(field).get<long long>();
}

inline const json& require_array(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_array()) {
        throw RecordParseError(std::string("missing or non-array field '") + field + "'", field);
    }
    return j.at(field);
}

inline const json& require_object(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_object()) {
        throw RecordParseError(std::string("missing or non-object field '") + field + "'", field);
    }
    return j.at(field);
}

inline std::optional<std::string> optional_string(const json& j, const char* field) {
    if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
    if (!j.at(field).is_string()) {
        throw RecordParseError(std::string("field '") + field + "' must be a string", field);
    }
    return j.at(field).get<std::string>();
}

// Extracts the first balanced top-level JSON object embedded in free text.
// Tolerates surrounding prose and code fences; returns nullopt if no
// parseable object exists.
std::optional<json> find_json_object(const std::string& text);

}  // namespace rave::jsonu
