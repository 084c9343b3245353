#include "rave/prompt.hpp"

#include <fstream>
#include <sstream>

#include "rave/digest.hpp"
#include "rave/errors.hpp"

namespace rave {

PromptTemplate PromptTemplate::from_text(std::string text) {
    PromptTemplate tpl;
    tpl.digest = sha256_hex(text);
    tpl.text = std::move(text);
    return tpl;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open prompt template: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
    std::string out = text;
    for (const auto& [key, value] : slots) {
        const std::string placeholder = "{{" + key + "}}";
        bool replaced = false;
        for (std::size_t pos = out.find(placeholder); pos != std::string::npos;
             pos = out.find(placeholder, pos + value.size())) {
            out.replace(pos, placeholder.size(), value);
            replaced = true;
        }
        if (!replaced) {
            throw ConfigError("template has no placeholder for slot '" + key + "'");
        }
    }
    return out;
}

}  // namespace rave
