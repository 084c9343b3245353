#pragma once
// Small text and URL helpers shared across modules. ASCII-only case folding;
// claim text may be arbitrary UTF-8 and passes through untouched.

#include <string>
#include <string_view>
#include <vector>

namespace rave {

std::string trim(std::string_view s);
std::string trim_right(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Collapses whitespace runs to single spaces and trims both ends.
std::string normalize_whitespace(std::string_view s);

// normalize_whitespace + ASCII lowercasing; the key used for entity
// dedup and surface-grounding checks.
std::string fold_for_match(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Hostname part of a URL: scheme, userinfo, port stripped; leading "www."
// removed; lowercased. Best effort for non-URL input (returns up to the
// first '/' of whatever is there).
std::string domain_of_url(std::string_view url);

// Canonical URL key for snippet dedup: lowercased host, scheme stripped,
// trailing slash stripped, fragment stripped; query string retained.
// Unparseable input falls back to the verbatim string.
std::string canonical_url_key(std::string_view url);

// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace rave
