#include "rave/extraction.hpp"

#include "json_util.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

namespace {

constexpr const char* kRepairReminder =
    "\n\nREMINDER: respond with exactly one JSON object of the form "
    "{\"entities\": [{\"surface\": \"...\", \"kind\": \"...\"}]} and nothing else.";

// The structured block must be a JSON object with an "entities" array of
// {surface, kind} objects; prose around the block is tolerated.
std::optional<std::vector<json>> entity_items(const std::string& raw) {
    auto block = jsonu::find_json_object(raw);
    if (!block || !block->contains("entities") || !(*block)["entities"].is_array()) {
        return std::nullopt;
    }
    std::vector<json> items;
    for (const json& item : (*block)["entities"]) {
        if (!item.is_object()) return std::nullopt;
        items.push_back(item);
    }
    return items;
}

}  // namespace

std::string render_extraction_prompt(const PromptTemplate& tpl, const Claim& claim) {
    return tpl.render({{"claim", claim.text}});
}

std::vector<Entity> parse_entity_output(const std::string& raw, const Claim& claim,
                                        ExtractionDrops* drops) {
    auto items = entity_items(raw);
    if (!items) {
        throw ExtractionFormatError("extraction output has no parseable entities block", raw);
    }

    std::string folded_claim = fold_for_match(claim.text);
    std::vector<Entity> entities;
    std::vector<std::string> dedup_keys;
    for (const json& item : *items) {
        if (!item.contains("surface") || !item["surface"].is_string() ||
            !item.contains("kind") || !item["kind"].is_string()) {
            throw ExtractionFormatError("entity item is missing surface or kind", raw);
        }
        std::string surface = item["surface"].get<std::string>();
        std::string kind_str = item["kind"].get<std::string>();

        auto kind = entity_kind_from_string(kind_str);
        if (!kind) {
            if (drops) ++drops->unknown_kind;
            log::warn("dropping entity with unknown kind '" + kind_str + "'");
            continue;
        }
        std::string folded_surface = fold_for_match(surface);
        if (folded_surface.empty()) continue;
        // Grounding guard: surfaces must occur in the claim or they are
        // treated as hallucinations.
        if (folded_claim.find(folded_surface) == std::string::npos) {
            if (drops) ++drops->hallucinated;
            log::warn("dropping hallucinated surface '" + surface + "' for claim " + claim.id);
            continue;
        }
        std::string dedup = to_string(*kind) + "|" + folded_surface;
        bool seen = false;
        for (const std::string& k : dedup_keys) seen = seen || k == dedup;
        if (seen) continue;
        dedup_keys.push_back(std::move(dedup));
        entities.push_back(Entity{std::move(surface), *kind});
    }
    return entities;
}

ExtractionResult extract_entities(Gateway& gateway, const PromptTemplate& tpl, const Claim& claim,
                                  ExtractionDrops* drops) {
    validate(claim);
    std::string prompt = render_extraction_prompt(tpl, claim);
    std::string raw = gateway.chat(prompt);

    ExtractionResult result;
    result.claim_id = claim.id;
    result.prompt_digest = tpl.digest;

    try {
        result.entities = parse_entity_output(raw, claim, drops);
        result.raw_model_output = raw;
        return result;
    } catch (const ExtractionFormatError&) {
        if (drops) ++drops->repairs;
        log::warn("extraction output unparseable for claim " + claim.id + "; re-prompting once");
    }

    std::string repaired = gateway.chat(prompt + kRepairReminder);
    result.entities = parse_entity_output(repaired, claim, drops);  // may throw
    result.raw_model_output = repaired;
    return result;
}

}  // namespace rave
