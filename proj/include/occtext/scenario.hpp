#pragma once

#include "occtext/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace occtext {

/// One occluded-text generation case: clean base prompt, occluder-aware edit
/// prompt, the target string with its coarse layout rectangle, the text/occluder
/// token index sets, and the anchor placement controls.
///
/// Token index sets are supplied explicitly for the toy backbone; adapters for
/// real models derive them from their own tokenizer.
struct Scenario {
    std::string id;
    std::string base_prompt;
    std::string edit_prompt;
    std::string target_text;
    std::string occluder_phrase;                // detector query for evaluation
    Rect layout_rect{0.0, 0.0, 1.0, 1.0};
    std::vector<int> text_token_indices;        // Q
    std::vector<int> occluder_token_indices;    // O
    std::uint64_t seed = 0;
    Real anchor_strength = 0.5;                 // rho in [0,1]
    Real anchor_fraction = 0.5;                 // horizontal anchor position along the band
};

/// Throws std::invalid_argument naming the offending field.
void validate_scenario(const Scenario& s);

}  // namespace occtext
