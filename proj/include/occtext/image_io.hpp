#pragma once

#include "occtext/types.hpp"

#include <string>

namespace occtext {

/// Grayscale image with values in [0, 1].
struct Image {
    Mat pixels;

    int height() const { return static_cast<int>(pixels.rows()); }
    int width() const { return static_cast<int>(pixels.cols()); }
};

/// Writes an 8-bit binary PGM (P5). Values are clamped to [0,1] and quantized
/// with round-half-up to 0..255.
void write_pgm(const std::string& path, const Image& image);

/// Reads an 8-bit binary PGM written by write_pgm. Throws on malformed input.
Image read_pgm(const std::string& path);

/// Writes a [0,1]-valued token map as a PGM, one pixel per token.
void write_map_pgm(const std::string& path, const Vec& values, TokenGrid grid);

}  // namespace occtext
