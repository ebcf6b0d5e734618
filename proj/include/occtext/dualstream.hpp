#pragma once

#include "occtext/backbone.hpp"
#include "occtext/glyph.hpp"
#include "occtext/localization.hpp"
#include "occtext/scenario.hpp"
#include "occtext/schedule.hpp"

#include <optional>
#include <vector>

namespace occtext {

struct PipelineOptions {
    AttentionSiteSet replace_sites;  // S: sites that take K/V substitution
    AggregationPolicy aggregation;   // sites/heads feeding localization maps
    GlyphPriorOptions glyph;
    /// When set, localization maps are averaged over steps 0..s_r instead of
    /// taken from the cutoff-step forward pass alone.
    bool accumulate_attention = false;
};

/// Everything Pass A derives: localization maps, the text band, the anchor,
/// the weighted candidate, and the hard fusion mask.
struct ReasoningOutput {
    SpatialMap a_text;
    SpatialMap a_obj;
    TextBand band;
    bool band_from_layout = false;  // layout_rect substitute was used
    SpatialMap anchor;
    Real anchor_center_row = 0.0;
    Real anchor_center_col = 0.0;
    SpatialMap candidate;  // A-tilde
    HardMask mask;         // M
    bool used_fallback = false;
};

struct FinalEditOutput {
    LatentTokens edit_latent;  // x^edit_N, decoded into the output image
    LatentTokens base_latent;  // final base-stream latent, for diagnostics
    std::vector<std::vector<int>> overridden_sites;  // per step
};

/// Pass A: run both streams step-locked up to the reasoning cutoff. The base
/// stream carries glyph injection and same-step K/V capture at the replacement
/// sites; the edit stream probes under full base image-K/V substitution (the
/// masked mixture with an all-zero mask). At the cutoff the text map is
/// extracted from the base stream over Q and the occluder map from the edit
/// stream over O, and the band/anchor/candidate/mask chain is derived.
ReasoningOutput reasoning_pass(const Scenario& scenario, const DenoiseSchedule& schedule,
                               const BackboneAdapter& adapter, const GlyphPrior& glyph,
                               const LatentTokens& z0, const MaskParams& params,
                               const PipelineOptions& options);

/// Pass B: restart both streams from the same z0 and run the full schedule,
/// recomputing base references every step and applying mask-guided image-token
/// K/V replacement at the replacement sites.
FinalEditOutput final_edit_pass(const Scenario& scenario, const DenoiseSchedule& schedule,
                                const BackboneAdapter& adapter, const GlyphPrior& glyph,
                                const LatentTokens& z0, const HardMask& mask,
                                const PipelineOptions& options);

/// Plain sampling loop for one stream, optionally with glyph injection.
/// Used by the ablation modes.
LatentTokens simple_sample(const BackboneAdapter& adapter, const Conditioning& conditioning,
                           const DenoiseSchedule& schedule, const LatentTokens& z0,
                           const GlyphPrior* glyph = nullptr);

enum class RunMode { kTextOnly, kTextSgmi, kStacking, kFull };

const char* run_mode_name(RunMode mode);
RunMode parse_run_mode(const std::string& name);

struct PipelineResult {
    Image image;
    LatentTokens final_latent;
    std::optional<HardMask> mask;
    std::optional<SpatialMap> band;
    std::optional<SpatialMap> a_text;
    std::optional<SpatialMap> a_obj;
    std::optional<SpatialMap> anchor;
    std::optional<SpatialMap> candidate;
    std::optional<SpatialMap> gate;
    std::optional<SpatialMap> prior_preview;  // prior channel 0 shifted into [0,1]
    bool used_fallback = false;
    bool band_from_layout = false;
    std::vector<std::vector<int>> overridden_sites;  // per Pass B step; empty
                                                     // for modes without K/V control
};

/// Full method: shared z0, glyph prior, reasoning pass, restarted final edit
/// pass, decode. The z0 fed to Pass B is re-derived from the seed and checked
/// bit-identical to Pass A's.
PipelineResult run_pipeline(const Scenario& scenario, const DenoiseSchedule& schedule,
                            const BackboneAdapter& adapter, const MaskParams& params,
                            const PipelineOptions& options);

/// Dispatches the ablation modes: text_only (base prompt, no prior, no
/// control), text_sgmi (base prompt + glyph prior), stacking (edit prompt +
/// glyph prior, single stream), full (run_pipeline).
PipelineResult run_variant(RunMode mode, const Scenario& scenario,
                           const DenoiseSchedule& schedule, const BackboneAdapter& adapter,
                           const MaskParams& params, const PipelineOptions& options);

}  // namespace occtext
