#include "occtext/scenario.hpp"

namespace occtext {

void validate_scenario(const Scenario& s) {
    require(!s.id.empty(), "scenario: id must be nonempty");
    require(!s.base_prompt.empty(), "scenario '", s.id, "': base_prompt must be nonempty");
    require(!s.edit_prompt.empty(), "scenario '", s.id, "': edit_prompt must be nonempty");
    require(!s.target_text.empty(), "scenario '", s.id, "': target_text must be nonempty");
    require(s.layout_rect.area() > 0.0, "scenario '", s.id, "': layout_rect must have positive area");
    require(s.layout_rect.left >= 0.0 && s.layout_rect.top >= 0.0 &&
                s.layout_rect.right <= 1.0 && s.layout_rect.bottom <= 1.0,
            "scenario '", s.id, "': layout_rect must lie inside [0,1]^2");
    require(!s.text_token_indices.empty(),
            "scenario '", s.id, "': text_token_indices must be nonempty");
    require(!s.occluder_token_indices.empty(),
            "scenario '", s.id, "': occluder_token_indices must be nonempty");
    for (int q : s.text_token_indices) {
        require(q >= 0, "scenario '", s.id, "': text_token_indices must be >= 0");
    }
    for (int o : s.occluder_token_indices) {
        require(o >= 0, "scenario '", s.id, "': occluder_token_indices must be >= 0");
    }
    require(s.anchor_strength >= 0.0 && s.anchor_strength <= 1.0,
            "scenario '", s.id, "': anchor_strength must be in [0,1], got ", s.anchor_strength);
    require(s.anchor_fraction >= 0.0 && s.anchor_fraction <= 1.0,
            "scenario '", s.id, "': anchor_fraction must be in [0,1], got ", s.anchor_fraction);
}

}  // namespace occtext
