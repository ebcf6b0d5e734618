#include "occtext/grid_ops.hpp"

#include <cmath>
#include <deque>

namespace occtext {

Mat to_grid(const Vec& flat, TokenGrid grid) {
    require(flat.size() == grid.size(), "to_grid: length ", flat.size(),
            " != grid size ", grid.size());
    return Eigen::Map<const RowMajorMat>(flat.data(), grid.height, grid.width);
}

Vec from_grid(const Mat& m) {
    RowMajorMat rm = m;
    return Eigen::Map<const Vec>(rm.data(), rm.size());
}

namespace {
// Reflective index: ..., 2, 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
int reflect(int i, int n) {
    if (n == 1) return 0;
    int period = 2 * n;
    int j = ((i % period) + period) % period;
    return j < n ? j : period - 1 - j;
}

std::vector<Real> gaussian_kernel(Real sigma) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<Real> k(static_cast<std::size_t>(2 * radius + 1));
    Real sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        Real w = std::exp(-0.5 * (static_cast<Real>(i) * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (Real& w : k) w /= sum;
    return k;
}
}  // namespace

Mat gaussian_smooth(const Mat& field, Real sigma) {
    if (sigma <= 0.0) {
        return field;
    }
    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const int rows = static_cast<int>(field.rows());
    const int cols = static_cast<int>(field.cols());

    Mat horiz(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Real acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] * field(r, reflect(c + k, cols));
            }
            horiz(r, c) = acc;
        }
    }
    Mat out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Real acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] * horiz(reflect(r + k, rows), c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

Eigen::VectorXi dilate_binary(const Eigen::VectorXi& bits, TokenGrid grid, int radius) {
    require(bits.size() == grid.size(), "dilate_binary: length mismatch");
    require(radius >= 0, "dilate_binary: radius must be >= 0");
    if (radius == 0) {
        return bits;
    }
    Eigen::VectorXi out = Eigen::VectorXi::Zero(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (!bits(grid.index(r, c))) continue;
            int r0 = std::max(0, r - radius), r1 = std::min(grid.height - 1, r + radius);
            int c0 = std::max(0, c - radius), c1 = std::min(grid.width - 1, c + radius);
            for (int rr = r0; rr <= r1; ++rr) {
                for (int cc = c0; cc <= c1; ++cc) {
                    out(grid.index(rr, cc)) = 1;
                }
            }
        }
    }
    return out;
}

std::vector<Component> connected_components(const Eigen::VectorXi& bits, TokenGrid grid) {
    require(bits.size() == grid.size(), "connected_components: length mismatch");
    std::vector<int> label(static_cast<std::size_t>(grid.size()), -1);
    std::vector<Component> comps;

    for (int start = 0; start < grid.size(); ++start) {
        if (!bits(start) || label[static_cast<std::size_t>(start)] >= 0) continue;
        Component comp;
        comp.label = static_cast<int>(comps.size());
        std::deque<int> queue{start};
        label[static_cast<std::size_t>(start)] = comp.label;
        while (!queue.empty()) {
            int idx = queue.front();
            queue.pop_front();
            comp.tokens.push_back(idx);
            int r = idx / grid.width, c = idx % grid.width;
            const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (const auto& n : nbr) {
                if (n[0] < 0 || n[0] >= grid.height || n[1] < 0 || n[1] >= grid.width) continue;
                int nidx = grid.index(n[0], n[1]);
                if (bits(nidx) && label[static_cast<std::size_t>(nidx)] < 0) {
                    label[static_cast<std::size_t>(nidx)] = comp.label;
                    queue.push_back(nidx);
                }
            }
        }
        std::sort(comp.tokens.begin(), comp.tokens.end());
        Real sr = 0.0, sc = 0.0;
        for (int idx : comp.tokens) {
            sr += static_cast<Real>(idx / grid.width);
            sc += static_cast<Real>(idx % grid.width);
        }
        comp.centroid_row = sr / static_cast<Real>(comp.tokens.size());
        comp.centroid_col = sc / static_cast<Real>(comp.tokens.size());
        comps.push_back(std::move(comp));
    }
    return comps;
}

Vec coverage_per_token(const Eigen::MatrixXi& pixels, TokenGrid grid) {
    const int h = static_cast<int>(pixels.rows());
    const int w = static_cast<int>(pixels.cols());
    require(h >= grid.height && w >= grid.width,
            "coverage_per_token: raster ", h, "x", w, " smaller than grid ",
            grid.height, "x", grid.width);
    Vec cov(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        int pr0 = (r * h) / grid.height;
        int pr1 = ((r + 1) * h) / grid.height;
        for (int c = 0; c < grid.width; ++c) {
            int pc0 = (c * w) / grid.width;
            int pc1 = ((c + 1) * w) / grid.width;
            long ink = 0;
            for (int pr = pr0; pr < pr1; ++pr) {
                for (int pc = pc0; pc < pc1; ++pc) {
                    ink += pixels(pr, pc) != 0 ? 1 : 0;
                }
            }
            long total = static_cast<long>(pr1 - pr0) * (pc1 - pc0);
            cov(grid.index(r, c)) = total > 0 ? static_cast<Real>(ink) / static_cast<Real>(total) : 0.0;
        }
    }
    return cov;
}

}  // namespace occtext
