#pragma once

#include "occtext/types.hpp"

#include <vector>

namespace occtext {

/// Unflattens a row-major token vector to a height x width matrix view copy.
Mat to_grid(const Vec& flat, TokenGrid grid);

/// Flattens a height x width matrix row-major.
Vec from_grid(const Mat& m);

/// Separable Gaussian blur on the token grid with reflective borders and the
/// kernel truncated at 3*sigma. sigma <= 0 is the identity.
Mat gaussian_smooth(const Mat& field, Real sigma);

/// Binary dilation by a square structuring element of the given radius,
/// clipped at the grid border. Radius 0 is the identity.
Eigen::VectorXi dilate_binary(const Eigen::VectorXi& bits, TokenGrid grid, int radius);

struct Component {
    int label = 0;                 // scan-order label, starting at 0
    std::vector<int> tokens;       // flat indices, ascending
    Real centroid_row = 0.0;
    Real centroid_col = 0.0;
    int area() const { return static_cast<int>(tokens.size()); }
};

/// 4-connected components of the set bits, labeled in row-major scan order.
std::vector<Component> connected_components(const Eigen::VectorXi& bits, TokenGrid grid);

/// Area-downsamples a binary pixel image to per-token ink coverage in [0,1].
/// Token (r, c) covers pixel rows [floor(r*H/gh), floor((r+1)*H/gh)) and the
/// analogous column range.
Vec coverage_per_token(const Eigen::MatrixXi& pixels, TokenGrid grid);

}  // namespace occtext
