#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace occtext {

using Real = double;
using Mat  = Eigen::MatrixXd;
using Vec  = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

// Row-major view helpers: a flattened token vector v of length H*W maps to
// grid cell (r, c) via v(r * W + c).
using RowMajorMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& v, const Rest&... rest) {
    os << v;
    format_into(os, rest...);
}
}  // namespace detail

/// Builds an error message by streaming all arguments.
template <typename... Args>
std::string msg(const Args&... args) {
    std::ostringstream os;
    detail::format_into(os, args...);
    return os.str();
}

template <typename... Args>
void require(bool cond, const Args&... args) {
    if (!cond) {
        throw std::invalid_argument(msg(args...));
    }
}

/// Token-grid dimensions of the packed image-token sequence.
struct TokenGrid {
    int height = 0;
    int width  = 0;

    TokenGrid() = default;
    TokenGrid(int h, int w) : height(h), width(w) {
        require(h >= 1 && w >= 1, "TokenGrid: dims must be >= 1, got ", h, "x", w);
    }

    int size() const { return height * width; }
    int index(int row, int col) const { return row * width + col; }

    bool operator==(const TokenGrid& o) const {
        return height == o.height && width == o.width;
    }
    bool operator!=(const TokenGrid& o) const { return !(*this == o); }
};

/// Packed image-token latent state: one row per token, one column per channel.
struct LatentTokens {
    TokenGrid grid;
    Mat values;  // grid.size() x channels

    LatentTokens() = default;
    LatentTokens(TokenGrid g, Mat v) : grid(g), values(std::move(v)) {
        require(values.rows() == grid.size(),
                "LatentTokens: row count ", values.rows(), " != grid size ", grid.size());
        require(values.allFinite(), "LatentTokens: values must be finite");
    }

    int channels() const { return static_cast<int>(values.cols()); }
};

/// Per-image-token real map with values in [0, 1], flattened row-major.
struct SpatialMap {
    TokenGrid grid;
    Vec values;  // length grid.size()

    SpatialMap() = default;
    SpatialMap(TokenGrid g, Vec v) : grid(g), values(std::move(v)) {
        require(values.size() == grid.size(),
                "SpatialMap: length ", values.size(), " != grid size ", grid.size());
        require(values.allFinite(), "SpatialMap: values must be finite");
        require(values.minCoeff() >= 0.0 && values.maxCoeff() <= 1.0,
                "SpatialMap: values must lie in [0,1]");
    }

    static SpatialMap zeros(TokenGrid g) { return SpatialMap(g, Vec::Zero(g.size())); }
    static SpatialMap ones(TokenGrid g) { return SpatialMap(g, Vec::Ones(g.size())); }

    Real operator()(int row, int col) const { return values(grid.index(row, col)); }
};

/// Binary per-image-token mask, flattened row-major. Entries are exactly 0 or 1.
struct HardMask {
    TokenGrid grid;
    Eigen::VectorXi bits;  // length grid.size(), each 0 or 1

    HardMask() = default;
    HardMask(TokenGrid g, Eigen::VectorXi b) : grid(g), bits(std::move(b)) {
        require(bits.size() == grid.size(),
                "HardMask: length ", bits.size(), " != grid size ", grid.size());
        for (int i = 0; i < bits.size(); ++i) {
            require(bits(i) == 0 || bits(i) == 1, "HardMask: entries must be 0/1");
        }
    }

    static HardMask zeros(TokenGrid g) {
        return HardMask(g, Eigen::VectorXi::Zero(g.size()));
    }
    static HardMask ones(TokenGrid g) {
        return HardMask(g, Eigen::VectorXi::Ones(g.size()));
    }

    int count() const { return bits.sum(); }
    bool empty() const { return count() == 0; }
    int operator()(int row, int col) const { return bits(grid.index(row, col)); }

    /// Mask as a real vector (0.0 / 1.0) for arithmetic mixing.
    Vec as_real() const { return bits.cast<Real>(); }
};

/// Axis-aligned rectangle in normalized [0,1] image coordinates.
struct Rect {
    Real left = 0, top = 0, right = 0, bottom = 0;

    Rect() = default;
    Rect(Real l, Real t, Real r, Real b) : left(l), top(t), right(r), bottom(b) {
        require(l < r && t < b, "Rect: need left < right and top < bottom, got [",
                l, ",", t, ",", r, ",", b, "]");
    }

    Real width() const { return right - left; }
    Real height() const { return bottom - top; }
    Real area() const { return width() * height(); }

    bool operator==(const Rect& o) const {
        return left == o.left && top == o.top && right == o.right && bottom == o.bottom;
    }
};

/// Ordered set of backbone attention-site indices.
struct AttentionSiteSet {
    std::vector<int> sites;   // strictly increasing
    int total_sites = 0;

    AttentionSiteSet() = default;
    AttentionSiteSet(std::vector<int> s, int total) : sites(std::move(s)), total_sites(total) {
        int prev = -1;
        for (int l : sites) {
            require(l >= 0 && l < total_sites, "AttentionSiteSet: site ", l,
                    " out of range [0,", total_sites, ")");
            require(l > prev, "AttentionSiteSet: sites must be strictly increasing (no duplicates)");
            prev = l;
        }
    }

    bool contains(int l) const {
        for (int s : sites) {
            if (s == l) return true;
            if (s > l) return false;
        }
        return false;
    }
    std::size_t size() const { return sites.size(); }
};

}  // namespace occtext
