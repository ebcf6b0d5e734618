#pragma once

#include "occtext/backbone.hpp"
#include "occtext/dualstream.hpp"
#include "occtext/eval.hpp"
#include "occtext/localization.hpp"
#include "occtext/scenario.hpp"
#include "occtext/schedule.hpp"
#include "occtext/toy_backbone.hpp"

#include <string>
#include <vector>

namespace occtext {

/// Declarative attention profile for the toy backbone's script, resolved onto
/// the token grid at run time.
struct ScriptProfileSpec {
    int token = 0;
    std::string kind;  // "rect" | "gaussian" | "point"
    // rect: 1 for tokens whose center lies inside, 0 outside.
    Rect rect{0.0, 0.0, 1.0, 1.0};
    // gaussian: bump at (center_y*(H-1), center_x*(W-1)) with sigma_tokens.
    Real center_x = 0.5;
    Real center_y = 0.5;
    Real sigma_tokens = 1.0;
    // point: single token.
    int token_row = 0;
    int token_col = 0;
};

Vec build_profile(const ScriptProfileSpec& spec, TokenGrid grid);

ToyBackboneScript build_script(const std::vector<ScriptProfileSpec>& specs, TokenGrid grid);

struct ScheduleSpec {
    int num_transitions = 28;
    int reasoning_cutoff = 7;
    Real window_lo = 0.1;
    Real window_hi = 0.4;
    Real glyph_strength = 1.0;

    DenoiseSchedule build() const {
        return build_schedule(num_transitions, reasoning_cutoff, {window_lo, window_hi},
                              glyph_strength);
    }
};

struct SiteSpec {
    int total = 57;
    std::vector<int> replace = {1, 2, 4, 26, 30, 54, 55};
    AggregationPolicy::Sites aggregation = AggregationPolicy::Sites::kDoubleStream;
    std::vector<int> aggregation_sites;  // for kExplicit
    AggregationPolicy::Heads head_aggregation = AggregationPolicy::Heads::kMean;
};

struct FileDefaults {
    ScheduleSpec schedule;
    SiteSpec sites;
    MaskParams mask_params;
    GlyphPriorOptions glyph;
    ToyBackboneConfig backbone;  // grid, channels, text_length, heads, head_dim, seed
    EvalOptions eval;
    bool accumulate_attention = false;
};

struct ScenarioEntry {
    Scenario scenario;
    std::vector<ScriptProfileSpec> script;
};

/// Parsed scenario file: global defaults plus the scenario list, order
/// preserved.
struct ScenarioFile {
    FileDefaults defaults;
    std::vector<ScenarioEntry> entries;
};

/// Loads and fully validates a scenario file. Parse errors report line and
/// column; unknown keys and invariant violations report their field path.
ScenarioFile load_scenarios(const std::string& path);

ScenarioFile parse_scenarios(const std::string& text, const std::string& origin = "<string>");

/// Canonical serialization (all defaults written out). parse(serialize(f))
/// reproduces f.
std::string serialize_scenarios(const ScenarioFile& file);

void save_scenarios(const ScenarioFile& file, const std::string& path);

bool operator==(const ScenarioFile& a, const ScenarioFile& b);

/// Pipeline options implied by the defaults, validated against an adapter.
PipelineOptions make_pipeline_options(const FileDefaults& defaults, int total_sites);

}  // namespace occtext
