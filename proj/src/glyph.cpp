#include "occtext/glyph.hpp"

#include "occtext/grid_ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace occtext {

GlyphRaster rasterize_glyph(const std::string& target_text, Rect layout_rect,
                            int canvas_height_px, int canvas_width_px,
                            const FontSpec& font) {
    require(!target_text.empty(), "rasterize_glyph: empty target text");
    require(canvas_height_px >= 1 && canvas_width_px >= 1,
            "rasterize_glyph: canvas must be at least 1x1 px");

    // Pixel bounds of the layout rect, rounded outward and clamped.
    int px0 = std::clamp(static_cast<int>(std::floor(layout_rect.left * canvas_width_px)),
                         0, canvas_width_px);
    int px1 = std::clamp(static_cast<int>(std::ceil(layout_rect.right * canvas_width_px)),
                         0, canvas_width_px);
    int py0 = std::clamp(static_cast<int>(std::floor(layout_rect.top * canvas_height_px)),
                         0, canvas_height_px);
    int py1 = std::clamp(static_cast<int>(std::ceil(layout_rect.bottom * canvas_height_px)),
                         0, canvas_height_px);
    const int rect_w = px1 - px0;
    const int rect_h = py1 - py0;

    const int n = static_cast<int>(target_text.size());
    // Width at scale k: n glyphs of width gw*k separated by gap*k.
    const int unit_w = n * font.glyph_width + (n - 1) * font.glyph_gap;
    const int unit_h = font.glyph_height;
    require(rect_w >= unit_w && rect_h >= unit_h,
            "rasterize_glyph: layout rect ", rect_w, "x", rect_h,
            " px too small for \"", target_text, "\"; need at least ",
            unit_w, "x", unit_h, " px");

    const int scale = std::min(rect_w / unit_w, rect_h / unit_h);
    const int text_w = unit_w * scale;
    const int text_h = unit_h * scale;
    const int x_origin = px0 + (rect_w - text_w) / 2;
    const int y_origin = py0 + (rect_h - text_h) / 2;

    Eigen::MatrixXi pixels = Eigen::MatrixXi::Zero(canvas_height_px, canvas_width_px);
    for (int i = 0; i < n; ++i) {
        const auto rows = BitmapFont::glyph(target_text[static_cast<std::size_t>(i)]);
        const int gx = x_origin + i * (font.glyph_width + font.glyph_gap) * scale;
        for (int gr = 0; gr < font.glyph_height; ++gr) {
            for (int gc = 0; gc < font.glyph_width; ++gc) {
                if (!(rows[static_cast<std::size_t>(gr)] >> (font.glyph_width - 1 - gc) & 1u)) {
                    continue;
                }
                for (int dy = 0; dy < scale; ++dy) {
                    for (int dx = 0; dx < scale; ++dx) {
                        pixels(y_origin + gr * scale + dy, gx + gc * scale + dx) = 1;
                    }
                }
            }
        }
    }

    GlyphRaster raster;
    raster.pixels = std::move(pixels);
    raster.layout_rect = layout_rect;
    return raster;
}

SpatialMap make_gate(const GlyphRaster& raster, TokenGrid grid, int dilation_tokens) {
    Vec cov = coverage_per_token(raster.pixels, grid);
    Real max_cov = cov.maxCoeff();
    Eigen::VectorXi bits = Eigen::VectorXi::Zero(grid.size());
    if (max_cov > 0.0) {
        for (int i = 0; i < grid.size(); ++i) {
            bits(i) = cov(i) >= 0.5 * max_cov ? 1 : 0;
        }
    }
    bits = dilate_binary(bits, grid, dilation_tokens);
    return SpatialMap(grid, bits.cast<Real>());
}

namespace {

CMat dft_matrix(int n, int sign) {
    CMat f(n, n);
    const Real base = 2.0 * M_PI / static_cast<Real>(n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            Real angle = sign * base * static_cast<Real>(j) * static_cast<Real>(k);
            f(j, k) = std::complex<Real>(std::cos(angle), std::sin(angle));
        }
    }
    return f;
}

// Normalized radial frequency of DFT bin (u, v): Euclidean distance of the
// aliased frequency pair, scaled so the largest representable radius is 1.
Real radial_frequency(int u, int v, int h, int w) {
    Real fu = static_cast<Real>(std::min(u, h - u)) / static_cast<Real>(h);
    Real fv = static_cast<Real>(std::min(v, w - v)) / static_cast<Real>(w);
    Real fu_max = static_cast<Real>(h / 2) / static_cast<Real>(h);
    Real fv_max = static_cast<Real>(w / 2) / static_cast<Real>(w);
    Real rmax = std::sqrt(fu_max * fu_max + fv_max * fv_max);
    if (rmax == 0.0) {
        return 0.0;
    }
    return std::sqrt(fu * fu + fv * fv) / rmax;
}

}  // namespace

LatentTokens frequency_filter(const LatentTokens& latent, Real keep_fraction) {
    require(keep_fraction > 0.0 && keep_fraction <= 1.0,
            "frequency_filter: keep_fraction must be in (0,1], got ", keep_fraction);
    const TokenGrid grid = latent.grid;
    const int h = grid.height, w = grid.width;

    const CMat fwd_h = dft_matrix(h, -1);
    const CMat fwd_w = dft_matrix(w, -1);
    const CMat inv_h = dft_matrix(h, +1);
    const CMat inv_w = dft_matrix(w, +1);

    Mat keep = Mat::Zero(h, w);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            keep(u, v) = radial_frequency(u, v, h, w) <= keep_fraction ? 1.0 : 0.0;
        }
    }

    Mat out(latent.values.rows(), latent.values.cols());
    for (int ch = 0; ch < latent.channels(); ++ch) {
        CMat plane = to_grid(latent.values.col(ch), grid).cast<std::complex<Real>>();
        CMat spectrum = fwd_h * plane * fwd_w.transpose();
        spectrum = spectrum.cwiseProduct(keep.cast<std::complex<Real>>());
        CMat back = inv_h * spectrum * inv_w.transpose() / static_cast<Real>(h * w);
        out.col(ch) = from_grid(back.real());
    }
    return LatentTokens(grid, std::move(out));
}

LatentTokens encode_glyph_latent(const GlyphRaster& raster, TokenGrid grid, int channels) {
    require(channels >= 1, "encode_glyph_latent: channels must be >= 1");
    Vec cov = coverage_per_token(raster.pixels, grid);
    Mat values(grid.size(), channels);
    for (int c = 0; c < channels; ++c) {
        Real w_c = 1.0 / static_cast<Real>(1 + c);
        values.col(c) = (cov.array() - 0.5) * w_c;
    }
    return LatentTokens(grid, std::move(values));
}

GlyphPrior build_glyph_prior(const std::string& target_text, Rect layout_rect,
                             TokenGrid grid, int channels,
                             const DenoiseSchedule& schedule,
                             const GlyphPriorOptions& options) {
    GlyphRaster raster = rasterize_glyph(target_text, layout_rect,
                                         grid.height * options.pixels_per_token,
                                         grid.width * options.pixels_per_token,
                                         options.font);
    GlyphPrior prior;
    prior.gate = make_gate(raster, grid, options.gate_dilation);
    prior.prior = frequency_filter(encode_glyph_latent(raster, grid, channels),
                                   options.keep_fraction);
    prior.strength = schedule.glyph_strength;
    prior.window_lo = schedule.window_lo;
    prior.window_hi = schedule.window_hi;
    return prior;
}

GlyphPrior null_glyph_prior(TokenGrid grid, int channels) {
    GlyphPrior prior;
    prior.gate = SpatialMap::zeros(grid);
    prior.prior = LatentTokens(grid, Mat::Zero(grid.size(), channels));
    prior.strength = 0.0;
    prior.window_lo = 0.0;
    prior.window_hi = 1.0;
    return prior;
}

LatentTokens inject_glyph(const LatentTokens& x, const GlyphPrior& prior, Real p_s) {
    require(x.grid == prior.prior.grid && x.channels() == prior.prior.channels(),
            "inject_glyph: latent shape does not match prior");
    require(prior.gate.values.size() == prior.prior.values.rows(),
            "inject_glyph: gate length does not match prior rows");
    if (p_s < prior.window_lo || p_s > prior.window_hi) {
        return x;
    }
    Mat values = x.values +
                 prior.strength * (prior.prior.values.array().colwise() *
                                   prior.gate.values.array()).matrix();
    return LatentTokens(x.grid, std::move(values));
}

}  // namespace occtext
