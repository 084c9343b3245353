#pragma once
// Versioned prompt templates. Templates ship as text assets; the digest of
// the exact template text is recorded in run provenance.

#include <map>
#include <string>

namespace rave {

struct PromptTemplate {
    std::string text;    // contains {{slot}} placeholders
    std::string digest;  // sha256 of text

    static PromptTemplate from_text(std::string text);
    static PromptTemplate load(const std::string& path);

    // Replaces every {{key}} with its value. Unknown placeholders are left
    // untouched; missing slots in `slots` throw ConfigError.
    std::string render(const std::map<std::string, std::string>& slots) const;
};

}  // namespace rave
