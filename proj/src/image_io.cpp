#include "occtext/image_io.hpp"

#include "occtext/grid_ops.hpp"

#include <cmath>
#include <fstream>
#include <vector>

namespace occtext {

void write_pgm(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(msg("write_pgm: cannot open ", path));
    }
    out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(image.width()));
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            Real v = std::clamp(image.pixels(r, c), 0.0, 1.0);
            row[static_cast<std::size_t>(c)] =
                static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) {
        throw std::runtime_error(msg("write_pgm: write failed for ", path));
    }
}

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(msg("read_pgm: cannot open ", path));
    }
    std::string magic;
    in >> magic;
    if (magic != "P5") {
        throw std::runtime_error(msg("read_pgm: ", path, ": expected P5, got '", magic, "'"));
    }
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width <= 0 || height <= 0 || maxval != 255) {
        throw std::runtime_error(msg("read_pgm: ", path, ": malformed header"));
    }
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> data(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!in) {
        throw std::runtime_error(msg("read_pgm: ", path, ": truncated pixel data"));
    }
    Image image;
    image.pixels.resize(height, width);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            image.pixels(r, c) =
                static_cast<Real>(data[static_cast<std::size_t>(r) * width + c]) / 255.0;
        }
    }
    return image;
}

void write_map_pgm(const std::string& path, const Vec& values, TokenGrid grid) {
    Image image;
    image.pixels = to_grid(values, grid);
    write_pgm(path, image);
}

}  // namespace occtext
