#pragma once

#include "occtext/font.hpp"
#include "occtext/schedule.hpp"
#include "occtext/types.hpp"

#include <string>

namespace occtext {

/// Binary glyph rasterization of the target text inside its layout rectangle.
struct GlyphRaster {
    Eigen::MatrixXi pixels;  // H_px x W_px, entries 0/1
    Rect layout_rect;
};

struct FontSpec {
    int glyph_width  = BitmapFont::glyph_width;
    int glyph_height = BitmapFont::glyph_height;
    int glyph_gap    = BitmapFont::glyph_gap;
};

/// Draws the text centered in layout_rect at the largest integer scale that
/// fits. Throws if the text is empty or the rect cannot fit scale-1 glyphs
/// (the message reports the required minimum pixel size).
GlyphRaster rasterize_glyph(const std::string& target_text, Rect layout_rect,
                            int canvas_height_px, int canvas_width_px,
                            const FontSpec& font = {});

/// Spatial gate G: area-downsample the raster to the token grid, binarize at
/// half the maximum coverage, then dilate by a square element of the given
/// token radius.
SpatialMap make_gate(const GlyphRaster& raster, TokenGrid grid, int dilation_tokens);

/// Ideal radial low-pass in the 2-D DFT domain, applied per channel on the
/// unflattened token grid. Coefficients whose radial frequency exceeds
/// keep_fraction of the maximum representable radius are zeroed; the real part
/// of the inverse transform is returned. keep_fraction = 1 is the identity.
LatentTokens frequency_filter(const LatentTokens& latent, Real keep_fraction);

/// Glyph prior: spatial gate G plus the frequency-filtered packed latent
/// P_glyph, with its injection window and strength.
struct GlyphPrior {
    SpatialMap gate;      // G, binary values
    LatentTokens prior;   // P_glyph, grid.size() x channels
    Real strength = 0.0;  // lambda_glyph
    Real window_lo = 0.0;
    Real window_hi = 1.0;
};

/// Fixed linear stand-in for the pretrained autoencoder in toy mode:
/// channel c = (ink coverage per token - 0.5) * w_c with w_c = 1 / (1 + c).
/// Real-backbone adapters substitute their own encoder.
LatentTokens encode_glyph_latent(const GlyphRaster& raster, TokenGrid grid, int channels);

struct GlyphPriorOptions {
    int pixels_per_token = 8;   // raster canvas = grid dims * this
    int gate_dilation    = 1;   // token radius for the gate
    Real keep_fraction   = 0.25;
    FontSpec font;
};

/// Rasterizes the target text, builds the gate, encodes and low-passes the
/// packed prior. Strength and window come from the schedule.
GlyphPrior build_glyph_prior(const std::string& target_text, Rect layout_rect,
                             TokenGrid grid, int channels,
                             const DenoiseSchedule& schedule,
                             const GlyphPriorOptions& options = {});

/// Returns a prior that never modifies the latent (empty gate, zero strength).
GlyphPrior null_glyph_prior(TokenGrid grid, int channels);

/// Windowed injection: x + strength * (P_glyph .* G) when p_s lies inside the
/// closed window [lo, hi]; x unchanged otherwise. Rows with G = 0 are returned
/// exactly as given.
LatentTokens inject_glyph(const LatentTokens& x, const GlyphPrior& prior, Real p_s);

}  // namespace occtext
