#include "occtext/dualstream.hpp"

#include "occtext/noise.hpp"

#include <algorithm>

namespace occtext {

namespace {

struct StepOutcome {
    PredictResult base;
    PredictResult edit;
};

// One step-locked iteration: base stream first (glyph injection, capture),
// then the edit stream consuming the same-step slices under the given mask.
StepOutcome locked_step(const BackboneAdapter& adapter, const DenoiseSchedule& schedule,
                        const GlyphPrior& glyph, const Conditioning& c_base,
                        const Conditioning& c_edit, int s, const HardMask& mask,
                        const AttentionSiteSet& sites, KVCacheStore& cache,
                        LatentTokens& x_base, LatentTokens& x_edit, bool advance,
                        bool want_attention) {
    const Real p = progress(schedule, s);
    LatentTokens x_base_in = inject_glyph(x_base, glyph, p);

    PredictOptions base_opts;
    base_opts.capture_sites = &sites;
    base_opts.want_attention = want_attention;
    StepOutcome out;
    out.base = adapter.predict_velocity(x_base_in, c_base, s, base_opts);

    cache.begin_step(s);
    for (auto& slice : out.base.captured) {
        cache.put(slice);
    }

    KvOverride directive;
    directive.sites = sites;
    directive.mask = mask;
    directive.base_slices = &cache.slices();
    PredictOptions edit_opts;
    edit_opts.kv_override = &directive;
    edit_opts.want_attention = want_attention;
    out.edit = adapter.predict_velocity(x_edit, c_edit, s, edit_opts);

    if (advance) {
        const Real dt = schedule.step_sizes[static_cast<std::size_t>(s)];
        x_base = flow_step(x_base_in, out.base.velocity, dt);
        x_edit = flow_step(x_edit, out.edit.velocity, dt);
    }
    return out;
}

SpatialMap mean_of_maps(const std::vector<SpatialMap>& maps) {
    Vec acc = Vec::Zero(maps.front().values.size());
    for (const auto& m : maps) {
        acc += m.values;
    }
    acc /= static_cast<Real>(maps.size());
    Real peak = acc.maxCoeff();
    if (peak > 0.0) {
        acc /= peak;
    }
    return SpatialMap(maps.front().grid, std::move(acc));
}

}  // namespace

ReasoningOutput reasoning_pass(const Scenario& scenario, const DenoiseSchedule& schedule,
                               const BackboneAdapter& adapter, const GlyphPrior& glyph,
                               const LatentTokens& z0, const MaskParams& params,
                               const PipelineOptions& options) {
    validate_schedule(schedule);
    validate_mask_params(params);
    require(options.replace_sites.total_sites == adapter.total_sites(),
            "reasoning_pass: site set is sized for ", options.replace_sites.total_sites,
            " sites but the adapter has ", adapter.total_sites());
    const int s_r = schedule.reasoning_cutoff;
    const TokenGrid grid = adapter.grid();
    const HardMask full_substitution = HardMask::zeros(grid);  // mask 0: all base

    const Conditioning c_base = adapter.encode_prompt(scenario.base_prompt);
    const Conditioning c_edit = adapter.encode_prompt(scenario.edit_prompt);

    LatentTokens x_base = z0;
    LatentTokens x_edit = z0;
    KVCacheStore cache;
    std::vector<SpatialMap> text_maps, obj_maps;

    for (int s = 0; s < s_r; ++s) {
        StepOutcome out = locked_step(adapter, schedule, glyph, c_base, c_edit, s,
                                      full_substitution, options.replace_sites, cache,
                                      x_base, x_edit, /*advance=*/true,
                                      options.accumulate_attention);
        if (options.accumulate_attention) {
            text_maps.push_back(extract_token_attention(
                out.base.attention, scenario.text_token_indices, options.aggregation));
            obj_maps.push_back(extract_token_attention(
                out.edit.attention, scenario.occluder_token_indices, options.aggregation));
        }
    }

    // Cutoff-step forward pass: localization maps only, no latent update.
    StepOutcome probe = locked_step(adapter, schedule, glyph, c_base, c_edit, s_r,
                                    full_substitution, options.replace_sites, cache,
                                    x_base, x_edit, /*advance=*/false,
                                    /*want_attention=*/true);
    text_maps.push_back(extract_token_attention(probe.base.attention,
                                                scenario.text_token_indices,
                                                options.aggregation));
    obj_maps.push_back(extract_token_attention(probe.edit.attention,
                                               scenario.occluder_token_indices,
                                               options.aggregation));

    ReasoningOutput out;
    out.a_text = mean_of_maps(text_maps);
    out.a_obj = mean_of_maps(obj_maps);

    try {
        out.band = build_text_band(out.a_text, glyph.gate, params);
    } catch (const NoTextEvidence&) {
        out.band = layout_rect_band(scenario.layout_rect, grid, params);
        out.band_from_layout = true;
    }

    out.anchor = make_anchor(out.band, scenario.anchor_fraction, params.anchor_sigma_frac);
    out.anchor_center_row = out.band.center_row;
    out.anchor_center_col =
        scenario.anchor_fraction * static_cast<Real>(grid.width - 1);
    out.candidate =
        weight_candidate(out.a_obj, out.band.band, out.anchor, scenario.anchor_strength);
    auto [mask, fallback] = derive_hard_mask(out.candidate, out.band.band,
                                             out.anchor_center_row, out.anchor_center_col,
                                             params);
    out.mask = std::move(mask);
    out.used_fallback = fallback;
    return out;
}

FinalEditOutput final_edit_pass(const Scenario& scenario, const DenoiseSchedule& schedule,
                                const BackboneAdapter& adapter, const GlyphPrior& glyph,
                                const LatentTokens& z0, const HardMask& mask,
                                const PipelineOptions& options) {
    validate_schedule(schedule);
    require(!mask.empty(), "final_edit_pass: mask must be nonempty");
    require(options.replace_sites.total_sites == adapter.total_sites(),
            "final_edit_pass: site set is sized for ", options.replace_sites.total_sites,
            " sites but the adapter has ", adapter.total_sites());

    const Conditioning c_base = adapter.encode_prompt(scenario.base_prompt);
    const Conditioning c_edit = adapter.encode_prompt(scenario.edit_prompt);

    FinalEditOutput out;
    LatentTokens x_base = z0;
    LatentTokens x_edit = z0;
    KVCacheStore cache;
    out.overridden_sites.reserve(static_cast<std::size_t>(schedule.num_transitions));

    for (int s = 0; s < schedule.num_transitions; ++s) {
        locked_step(adapter, schedule, glyph, c_base, c_edit, s, mask,
                    options.replace_sites, cache, x_base, x_edit, /*advance=*/true,
                    /*want_attention=*/false);
        out.overridden_sites.push_back(options.replace_sites.sites);
    }
    out.edit_latent = std::move(x_edit);
    out.base_latent = std::move(x_base);
    return out;
}

LatentTokens simple_sample(const BackboneAdapter& adapter, const Conditioning& conditioning,
                           const DenoiseSchedule& schedule, const LatentTokens& z0,
                           const GlyphPrior* glyph) {
    validate_schedule(schedule);
    LatentTokens x = z0;
    for (int s = 0; s < schedule.num_transitions; ++s) {
        LatentTokens x_in = glyph ? inject_glyph(x, *glyph, progress(schedule, s)) : x;
        PredictResult res = adapter.predict_velocity(x_in, conditioning, s);
        x = flow_step(x_in, res.velocity, schedule.step_sizes[static_cast<std::size_t>(s)]);
    }
    return x;
}

const char* run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::kTextOnly: return "text_only";
        case RunMode::kTextSgmi: return "text_sgmi";
        case RunMode::kStacking: return "stacking";
        case RunMode::kFull: return "full";
    }
    return "unknown";
}

RunMode parse_run_mode(const std::string& name) {
    if (name == "text_only") return RunMode::kTextOnly;
    if (name == "text_sgmi") return RunMode::kTextSgmi;
    if (name == "stacking") return RunMode::kStacking;
    if (name == "full") return RunMode::kFull;
    throw std::invalid_argument(
        msg("unknown mode '", name, "' (expected text_only|text_sgmi|stacking|full)"));
}

PipelineResult run_pipeline(const Scenario& scenario, const DenoiseSchedule& schedule,
                            const BackboneAdapter& adapter, const MaskParams& params,
                            const PipelineOptions& options) {
    return run_variant(RunMode::kFull, scenario, schedule, adapter, params, options);
}

PipelineResult run_variant(RunMode mode, const Scenario& scenario,
                           const DenoiseSchedule& schedule, const BackboneAdapter& adapter,
                           const MaskParams& params, const PipelineOptions& options) {
    try {
        validate_scenario(scenario);
        const TokenGrid grid = adapter.grid();
        const int channels = adapter.channels();
        LatentTokens z0 = seeded_noise(scenario.seed, grid, channels);

        PipelineResult result;
        if (mode == RunMode::kTextOnly) {
            LatentTokens x = simple_sample(adapter, adapter.encode_prompt(scenario.base_prompt),
                                           schedule, z0, nullptr);
            result.image = adapter.decode(x);
            result.final_latent = std::move(x);
            return result;
        }

        GlyphPrior glyph = build_glyph_prior(scenario.target_text, scenario.layout_rect,
                                             grid, channels, schedule, options.glyph);
        result.gate = glyph.gate;
        Vec preview =
            (glyph.prior.values.col(0).array() + 0.5).cwiseMax(0.0).cwiseMin(1.0).matrix();
        result.prior_preview = SpatialMap(grid, std::move(preview));

        if (mode == RunMode::kTextSgmi || mode == RunMode::kStacking) {
            const std::string& prompt =
                mode == RunMode::kTextSgmi ? scenario.base_prompt : scenario.edit_prompt;
            LatentTokens x = simple_sample(adapter, adapter.encode_prompt(prompt), schedule,
                                           z0, &glyph);
            result.image = adapter.decode(x);
            result.final_latent = std::move(x);
            return result;
        }

        ReasoningOutput reasoning =
            reasoning_pass(scenario, schedule, adapter, glyph, z0, params, options);

        // Pass B restarts from the same initial noise; re-derive and check.
        LatentTokens z0_again = seeded_noise(scenario.seed, grid, channels);
        require((z0_again.values.array() == z0.values.array()).all(),
                "run_pipeline: z0 re-derivation is not bit-identical");

        FinalEditOutput final_edit = final_edit_pass(scenario, schedule, adapter, glyph,
                                                     z0_again, reasoning.mask, options);

        result.image = adapter.decode(final_edit.edit_latent);
        result.final_latent = std::move(final_edit.edit_latent);
        result.mask = std::move(reasoning.mask);
        result.band = reasoning.band.band;
        result.a_text = std::move(reasoning.a_text);
        result.a_obj = std::move(reasoning.a_obj);
        result.anchor = std::move(reasoning.anchor);
        result.candidate = std::move(reasoning.candidate);
        result.used_fallback = reasoning.used_fallback;
        result.band_from_layout = reasoning.band_from_layout;
        result.overridden_sites = std::move(final_edit.overridden_sites);
        return result;
    } catch (const std::exception& e) {
        throw std::runtime_error(msg("scenario '", scenario.id, "': ", e.what()));
    }
}

}  // namespace occtext
