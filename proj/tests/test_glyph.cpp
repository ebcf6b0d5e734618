#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "occtext/glyph.hpp"
#include "occtext/grid_ops.hpp"

#include <complex>
#include <random>

using namespace occtext;

namespace {

// Independent low-pass oracle: quadruple-loop DFT, the same keep rule written
// from scratch, quadruple-loop inverse.
Mat dft_lowpass_oracle(const Mat& plane, Real keep_fraction) {
    const int h = static_cast<int>(plane.rows());
    const int w = static_cast<int>(plane.cols());
    using C = std::complex<Real>;
    Eigen::MatrixXcd spectrum(h, w);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            C acc(0, 0);
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    Real angle = -2.0 * M_PI * (static_cast<Real>(u) * r / h +
                                                static_cast<Real>(v) * c / w);
                    acc += plane(r, c) * C(std::cos(angle), std::sin(angle));
                }
            }
            Real fu = std::min(u, h - u) / static_cast<Real>(h);
            Real fv = std::min(v, w - v) / static_cast<Real>(w);
            Real ru = (h / 2) / static_cast<Real>(h);
            Real rv = (w / 2) / static_cast<Real>(w);
            Real rmax = std::sqrt(ru * ru + rv * rv);
            Real radial = rmax == 0.0 ? 0.0 : std::sqrt(fu * fu + fv * fv) / rmax;
            spectrum(u, v) = radial <= keep_fraction ? acc : C(0, 0);
        }
    }
    Mat out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            C acc(0, 0);
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) {
                    Real angle = 2.0 * M_PI * (static_cast<Real>(u) * r / h +
                                               static_cast<Real>(v) * c / w);
                    acc += spectrum(u, v) * C(std::cos(angle), std::sin(angle));
                }
            }
            out(r, c) = acc.real() / static_cast<Real>(h * w);
        }
    }
    return out;
}

int count_pixel_components(const Eigen::MatrixXi& pixels) {
    TokenGrid grid(static_cast<int>(pixels.rows()), static_cast<int>(pixels.cols()));
    Eigen::VectorXi bits(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            bits(grid.index(r, c)) = pixels(r, c);
        }
    }
    return static_cast<int>(connected_components(bits, grid).size());
}

LatentTokens random_latent(TokenGrid grid, int channels, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<Real> dist(0.0, 1.0);
    Mat values(grid.size(), channels);
    for (int r = 0; r < values.rows(); ++r) {
        for (int c = 0; c < values.cols(); ++c) {
            values(r, c) = dist(gen);
        }
    }
    return LatentTokens(grid, values);
}

}  // namespace

TEST_CASE("rasterize_glyph: 'I' is a single connected bar") {
    GlyphRaster raster = rasterize_glyph("I", Rect(0.0, 0.0, 1.0, 1.0), 64, 64);
    CHECK(raster.pixels.sum() > 0);
    CHECK(count_pixel_components(raster.pixels) == 1);
    // Ink forms a vertical bar: every ink row uses the same column span.
    int min_col = 64, max_col = -1;
    for (int r = 0; r < 64; ++r) {
        for (int c = 0; c < 64; ++c) {
            if (raster.pixels(r, c)) {
                min_col = std::min(min_col, c);
                max_col = std::max(max_col, c);
            }
        }
    }
    // 5x7 glyph cell scaled by 9 in a 64x64 rect, one column wide.
    CHECK(max_col - min_col + 1 == 9);
}

TEST_CASE("rasterize_glyph: empty text rejected") {
    CHECK_THROWS_WITH_AS(rasterize_glyph("", Rect(0.0, 0.0, 1.0, 1.0), 64, 64),
                         doctest::Contains("empty target text"), std::invalid_argument);
}

TEST_CASE("rasterize_glyph: ink stays inside the layout rect") {
    GlyphRaster raster = rasterize_glyph("AB", Rect(0.0, 0.0, 0.5, 1.0), 64, 64);
    CHECK(raster.pixels.sum() > 0);
    for (int r = 0; r < 64; ++r) {
        for (int c = 0; c < 64; ++c) {
            if (raster.pixels(r, c)) {
                CHECK(c < 32);
            }
        }
    }
}

TEST_CASE("rasterize_glyph: reports the required minimum when the rect is too small") {
    // "HELLO" at scale 1 needs 29x7 px; a 10x10 rect cannot fit it.
    CHECK_THROWS_WITH_AS(rasterize_glyph("HELLO", Rect(0.0, 0.0, 0.15, 0.15), 64, 64),
                         doctest::Contains("need at least 29x7"), std::invalid_argument);
}

TEST_CASE("make_gate: degenerate rasters") {
    TokenGrid grid(8, 8);
    GlyphRaster raster;
    raster.layout_rect = Rect(0.0, 0.0, 1.0, 1.0);

    raster.pixels = Eigen::MatrixXi::Zero(64, 64);
    CHECK(make_gate(raster, grid, 1).values.maxCoeff() == 0.0);

    raster.pixels = Eigen::MatrixXi::Ones(64, 64);
    CHECK(make_gate(raster, grid, 0).values.minCoeff() == 1.0);
}

TEST_CASE("make_gate: single ink pixel downsample plus dilation trace") {
    TokenGrid grid(8, 8);
    GlyphRaster raster;
    raster.layout_rect = Rect(0.0, 0.0, 1.0, 1.0);
    raster.pixels = Eigen::MatrixXi::Zero(64, 64);
    raster.pixels(0, 0) = 1;

    SpatialMap gate = make_gate(raster, grid, 1);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            Real expected = (r <= 1 && c <= 1) ? 1.0 : 0.0;
            CHECK(gate(r, c) == expected);
        }
    }
}

TEST_CASE("make_gate: dilation is monotone in the radius") {
    TokenGrid grid(10, 12);
    std::mt19937 gen(9);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXi pixels = Eigen::MatrixXi::Zero(60, 72);
        for (int k = 0; k < 40; ++k) {
            pixels(static_cast<int>(gen() % 60), static_cast<int>(gen() % 72)) = 1;
        }
        GlyphRaster raster{pixels, Rect(0.0, 0.0, 1.0, 1.0)};
        for (int radius = 0; radius < 3; ++radius) {
            SpatialMap small = make_gate(raster, grid, radius);
            SpatialMap large = make_gate(raster, grid, radius + 1);
            for (int i = 0; i < grid.size(); ++i) {
                if (small.values(i) > 0.0) {
                    CHECK(large.values(i) > 0.0);
                }
            }
        }
    }
}

TEST_CASE("frequency_filter: keep_fraction 1 is the identity") {
    LatentTokens x = random_latent(TokenGrid(8, 8), 3, 11);
    LatentTokens y = frequency_filter(x, 1.0);
    CHECK((y.values - x.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("frequency_filter: constant input survives any low-pass") {
    TokenGrid grid(8, 8);
    LatentTokens x(grid, Mat::Constant(grid.size(), 2, 0.75));
    for (Real keep : {0.05, 0.25, 0.6}) {
        LatentTokens y = frequency_filter(x, keep);
        CHECK((y.values - x.values).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("frequency_filter: Nyquist checkerboard is annihilated") {
    TokenGrid grid(8, 8);
    Mat values(grid.size(), 1);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            values(grid.index(r, c), 0) = ((r + c) % 2 == 0) ? 1.0 : -1.0;
        }
    }
    LatentTokens y = frequency_filter(LatentTokens(grid, values), 0.25);
    CHECK(y.values.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("frequency_filter: matches the direct DFT oracle") {
    std::mt19937 gen(17);
    for (int trial = 0; trial < 5; ++trial) {
        TokenGrid grid(5 + static_cast<int>(gen() % 4), 5 + static_cast<int>(gen() % 4));
        LatentTokens x = random_latent(grid, 2, 100 + static_cast<unsigned>(trial));
        Real keep = 0.2 + 0.15 * static_cast<Real>(trial);
        LatentTokens y = frequency_filter(x, keep);
        for (int ch = 0; ch < 2; ++ch) {
            Mat expected = dft_lowpass_oracle(to_grid(x.values.col(ch), grid), keep);
            Mat got = to_grid(y.values.col(ch), grid);
            CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("frequency_filter: linearity and idempotence") {
    TokenGrid grid(8, 8);
    std::mt19937 gen(23);
    std::uniform_real_distribution<Real> coeff(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        LatentTokens x = random_latent(grid, 2, 200 + static_cast<unsigned>(trial));
        LatentTokens y = random_latent(grid, 2, 300 + static_cast<unsigned>(trial));
        Real a = coeff(gen), b = coeff(gen);
        Real keep = 0.4;

        LatentTokens combined(grid, a * x.values + b * y.values);
        Mat lhs = frequency_filter(combined, keep).values;
        Mat rhs = a * frequency_filter(x, keep).values + b * frequency_filter(y, keep).values;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-6);

        Mat once = frequency_filter(x, keep).values;
        Mat twice = frequency_filter(LatentTokens(grid, once), keep).values;
        CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("frequency_filter: rejects out-of-range keep_fraction") {
    LatentTokens x = random_latent(TokenGrid(4, 4), 1, 5);
    CHECK_THROWS_AS(frequency_filter(x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(frequency_filter(x, 1.5), std::invalid_argument);
}

TEST_CASE("inject_glyph: outside the window the latent passes through") {
    TokenGrid grid(4, 4);
    GlyphPrior prior;
    prior.gate = SpatialMap::ones(grid);
    prior.prior = LatentTokens(grid, Mat::Constant(grid.size(), 2, 0.5));
    prior.strength = 1.0;
    prior.window_lo = 0.1;
    prior.window_hi = 0.4;

    LatentTokens x = random_latent(grid, 2, 31);
    LatentTokens y = inject_glyph(x, prior, 0.05);
    CHECK((y.values.array() == x.values.array()).all());
}

TEST_CASE("inject_glyph: zero strength is a no-op inside the window") {
    TokenGrid grid(4, 4);
    GlyphPrior prior;
    prior.gate = SpatialMap::ones(grid);
    prior.prior = LatentTokens(grid, Mat::Constant(grid.size(), 2, 0.5));
    prior.strength = 0.0;
    prior.window_lo = 0.1;
    prior.window_hi = 0.4;

    LatentTokens x = random_latent(grid, 2, 37);
    LatentTokens y = inject_glyph(x, prior, 0.25);
    CHECK((y.values.array() == x.values.array()).all());
}

TEST_CASE("inject_glyph: windowed arithmetic") {
    TokenGrid grid(4, 4);
    GlyphPrior prior;
    prior.gate = SpatialMap::ones(grid);
    prior.prior = LatentTokens(grid, Mat::Constant(grid.size(), 2, 0.5));
    prior.strength = 2.0;
    prior.window_lo = 0.1;
    prior.window_hi = 0.4;

    LatentTokens x(grid, Mat::Zero(grid.size(), 2));
    LatentTokens y = inject_glyph(x, prior, 0.25);
    CHECK((y.values.array() == 1.0).all());
}

TEST_CASE("inject_glyph: rows with zero gate are bit-identical to the input") {
    TokenGrid grid(6, 6);
    std::mt19937 gen(41);
    Vec gate = Vec::Zero(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        gate(i) = (gen() % 3 == 0) ? 1.0 : 0.0;
    }
    GlyphPrior prior;
    prior.gate = SpatialMap(grid, gate);
    prior.prior = random_latent(grid, 3, 43);
    prior.strength = 1.7;
    prior.window_lo = 0.0;
    prior.window_hi = 1.0;

    LatentTokens x = random_latent(grid, 3, 47);
    LatentTokens y = inject_glyph(x, prior, 0.5);
    for (int i = 0; i < grid.size(); ++i) {
        if (gate(i) == 0.0) {
            CHECK((y.values.row(i).array() == x.values.row(i).array()).all());
        } else {
            CHECK((y.values.row(i) - x.values.row(i)).cwiseAbs().maxCoeff() > 0.0);
        }
    }
}

TEST_CASE("encode_glyph_latent: documented linear map") {
    TokenGrid grid(2, 2);
    GlyphRaster raster;
    raster.layout_rect = Rect(0.0, 0.0, 1.0, 1.0);
    raster.pixels = Eigen::MatrixXi::Zero(4, 4);
    raster.pixels.block(0, 0, 2, 2).setOnes();  // token (0,0) fully inked

    LatentTokens latent = encode_glyph_latent(raster, grid, 3);
    CHECK(latent.values(0, 0) == doctest::Approx(0.5));          // (1 - 0.5) * 1
    CHECK(latent.values(0, 1) == doctest::Approx(0.25));         // (1 - 0.5) * 1/2
    CHECK(latent.values(0, 2) == doctest::Approx(0.5 / 3.0));    // (1 - 0.5) * 1/3
    CHECK(latent.values(3, 0) == doctest::Approx(-0.5));         // uninked token
}

TEST_CASE("build_glyph_prior: gate covers the layout band and prior is finite") {
    TokenGrid grid(8, 8);
    DenoiseSchedule schedule = build_schedule(28, 7, {0.1, 0.4}, 1.0);
    GlyphPrior prior = build_glyph_prior("HELLO", Rect(0.05, 0.3, 0.95, 0.7), grid, 16,
                                         schedule);
    CHECK(prior.gate.values.maxCoeff() == 1.0);
    CHECK(prior.prior.values.allFinite());
    CHECK(prior.strength == 1.0);

    // Gate rows stay near the layout band (dilated by one token).
    for (int r = 0; r < 8; ++r) {
        bool any = false;
        for (int c = 0; c < 8; ++c) {
            any = any || prior.gate(r, c) > 0.0;
        }
        if (r <= 0 || r >= 7) {
            CHECK(!any);
        }
    }
}
