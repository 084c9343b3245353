#include "rave/text.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>

namespace rave {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string trim_right(std::string_view s) {
    std::size_t e = s.size();
    while (e > 0 && is_space(s[e - 1])) --e;
    return std::string(s.substr(0, e));
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // swallow leading whitespace
    for (char c : s) {
        if (is_space(c)) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_ws = false;
        }
    }
    return out;
}

std::string fold_for_match(std::string_view s) { return to_lower_ascii(normalize_whitespace(s)); }

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

namespace {

// Strips "scheme://" and "user@" if present, returns authority + rest.
std::string_view strip_scheme(std::string_view url) {
    auto pos = url.find("://");
    if (pos != std::string_view::npos) return url.substr(pos + 3);
    return url;
}

std::string_view authority_of(std::string_view rest) {
    auto slash = rest.find('/');
    auto authority = (slash == std::string_view::npos) ? rest : rest.substr(0, slash);
    auto at = authority.rfind('@');
    if (at != std::string_view::npos) authority = authority.substr(at + 1);
    return authority;
}

std::string host_of_authority(std::string_view authority) {
    auto colon = authority.find(':');
    auto host = (colon == std::string_view::npos) ? authority : authority.substr(0, colon);
    std::string lowered = to_lower_ascii(host);
    if (lowered.rfind("www.", 0) == 0) lowered = lowered.substr(4);
    return lowered;
}

}  // namespace

std::string domain_of_url(std::string_view url) {
    std::string trimmed = trim(url);
    std::string_view rest = strip_scheme(trimmed);
    return host_of_authority(authority_of(rest));
}

std::string canonical_url_key(std::string_view url) {
    std::string trimmed = trim(url);
    if (trimmed.empty()) return trimmed;

    std::string_view rest = strip_scheme(trimmed);
    std::string_view authority = authority_of(rest);
    std::string host = host_of_authority(authority);
    if (host.empty()) return trimmed;  // unparseable: verbatim fallback

    std::string_view path_and_more =
        rest.size() > authority.size() ? rest.substr(rest.find('/')) : std::string_view{};
    auto hash_pos = path_and_more.find('#');
    if (hash_pos != std::string_view::npos) path_and_more = path_and_more.substr(0, hash_pos);

    std::string path(path_and_more);
    // Trailing slash is stripped from the path part only, never the query.
    auto query_pos = path.find('?');
    std::string query = (query_pos == std::string::npos) ? "" : path.substr(query_pos);
    if (query_pos != std::string::npos) path = path.substr(0, query_pos);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return host + path + query;
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

}  // namespace rave
