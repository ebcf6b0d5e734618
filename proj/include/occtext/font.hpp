#pragma once

#include <array>
#include <cstdint>

namespace occtext {

// Bundled 5x7 monospaced bitmap font. Glyphs exist for A-Z, 0-9, space and a
// handful of punctuation marks; any other character renders as a solid 5x7
// block so that rasterization never depends on an external font engine.
struct BitmapFont {
    static constexpr int glyph_width  = 5;
    static constexpr int glyph_height = 7;
    static constexpr int glyph_gap    = 1;  // columns between glyphs, at scale 1

    /// Row bitmaps for the glyph, one per row, bit 4 = leftmost column.
    /// Lowercase letters map onto their uppercase shapes.
    static std::array<std::uint8_t, 7> glyph(char ch);

    /// True when the character has a designed shape (not the fallback block).
    static bool has_glyph(char ch);
};

}  // namespace occtext
