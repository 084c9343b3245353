#pragma once
// Zero-shot prompt-based extraction of the five entity kinds from a claim.
// Extraction is exclusively LLM-driven; there is no statistical NER model.

#include <string>
#include <vector>

#include "rave/gateway.hpp"
#include "rave/model.hpp"
#include "rave/prompt.hpp"

namespace rave {

// Counters for surfaces the parser refused and repair round-trips.
struct ExtractionDrops {
    int unknown_kind = 0;   // model produced a kind outside the five-element set
    int hallucinated = 0;   // surface does not occur in the claim text
    int repairs = 0;        // format-repair re-prompts that were needed
};

// Renders the template with the claim inserted exactly once. The template is
// required to name all five kinds and demand strict JSON output.
std::string render_extraction_prompt(const PromptTemplate& tpl, const Claim& claim);

// Extracts typed entities. Unknown kinds and ungrounded surfaces are
// dropped (counted in drops); duplicates collapse by (normalized surface,
// kind) keeping the first occurrence. An empty entity list is a valid
// result. Unparseable output gets one repair re-prompt, then throws
// ExtractionFormatError.
ExtractionResult extract_entities(Gateway& gateway, const PromptTemplate& tpl, const Claim& claim,
                                  ExtractionDrops* drops = nullptr);

// Parse/filter step without the gateway round-trip; used by extract_entities
// and directly testable.
std::vector<Entity> parse_entity_output(const std::string& raw, const Claim& claim,
                                        ExtractionDrops* drops);

}  // namespace rave
