#pragma once

#include "occtext/types.hpp"

#include <stdexcept>
#include <utility>

namespace occtext {

/// Mask-derivation parameters the method leaves unnamed; all exposed as config.
struct MaskParams {
    Real smooth_sigma = 0.7;         // Gaussian sigma in tokens
    Real threshold_frac = 0.5;       // theta: threshold at theta * max
    int dilation_radius = 1;         // square element radius in tokens
    Real band_threshold_frac = 0.5;  // tau: row-mean cut for band selection
    Real min_component_frac = 0.02;  // A_min: fallback cut vs band area
    Real anchor_sigma_frac = 0.25;   // anchor Gaussian sigma / grid width
};

void validate_mask_params(const MaskParams& params);

/// Soft text band plus its weighted centroid in token coordinates.
struct TextBand {
    SpatialMap band;      // B
    Real center_row = 0;  // weighted centroid of B
    Real center_col = 0;
};

struct NoTextEvidence : std::runtime_error {
    NoTextEvidence() : std::runtime_error("no text evidence") {}
};

/// Estimates the text band from attention evidence and glyph support:
/// support = max(a_text, gate); rows qualify when their support mean reaches
/// band_threshold_frac of the best row; the longest qualifying run (first on
/// ties) becomes a row indicator, Gaussian-smoothed at smooth_sigma and
/// renormalized to max 1. Throws NoTextEvidence when support is all zero.
TextBand build_text_band(const SpatialMap& a_text, const SpatialMap& gate,
                         const MaskParams& params);

/// Band substitute built from the layout rectangle alone, used when the
/// attention/glyph support carries no evidence.
TextBand layout_rect_band(Rect layout_rect, TokenGrid grid, const MaskParams& params);

/// Center-aware anchor weighting: an isotropic Gaussian bump centered at
/// (band center row, anchor_fraction * (width - 1)) with sigma = sigma_frac *
/// grid width, rescaled to peak 1.
SpatialMap make_anchor(const TextBand& band, Real anchor_fraction, Real sigma_frac);

/// Anchor-weighted candidate: a_obj .* B .* ((1 - rho) + rho * W_anchor),
/// clamped to [0,1].
SpatialMap weight_candidate(const SpatialMap& a_obj, const SpatialMap& band,
                            const SpatialMap& anchor, Real rho);

/// Hard fusion mask: smooth the candidate, threshold at threshold_frac of the
/// max, pick the 4-connected component nearest band_center (ties: larger area,
/// then smaller label), dilate by the square element. Falls back to an
/// anchor-centered square clipped to the band rows when the selection is
/// missing or smaller than min_component_frac of the band area. The returned
/// mask is never empty.
std::pair<HardMask, bool> derive_hard_mask(const SpatialMap& candidate,
                                           const SpatialMap& band,
                                           Real band_center_row, Real band_center_col,
                                           const MaskParams& params);

}  // namespace occtext
