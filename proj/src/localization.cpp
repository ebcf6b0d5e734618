#include "occtext/localization.hpp"

#include "occtext/grid_ops.hpp"

#include <algorithm>
#include <cmath>

namespace occtext {

void validate_mask_params(const MaskParams& p) {
    require(p.smooth_sigma >= 0.0, "mask params: smooth_sigma must be >= 0");
    require(p.threshold_frac > 0.0 && p.threshold_frac < 1.0,
            "mask params: threshold_frac must be in (0,1)");
    require(p.dilation_radius >= 0, "mask params: dilation_radius must be >= 0");
    require(p.band_threshold_frac > 0.0 && p.band_threshold_frac < 1.0,
            "mask params: band_threshold_frac must be in (0,1)");
    require(p.min_component_frac > 0.0 && p.min_component_frac < 1.0,
            "mask params: min_component_frac must be in (0,1)");
    require(p.anchor_sigma_frac > 0.0, "mask params: anchor_sigma_frac must be > 0");
}

namespace {

TextBand band_from_rows(const Eigen::VectorXi& row_active, TokenGrid grid,
                        const MaskParams& params) {
    Mat indicator = Mat::Zero(grid.height, grid.width);
    for (int r = 0; r < grid.height; ++r) {
        if (row_active(r)) {
            indicator.row(r).setOnes();
        }
    }
    Mat smoothed = gaussian_smooth(indicator, params.smooth_sigma);
    Real peak = smoothed.maxCoeff();
    if (peak > 0.0) {
        smoothed /= peak;
    }
    smoothed = smoothed.cwiseMax(0.0).cwiseMin(1.0);

    TextBand band;
    band.band = SpatialMap(grid, from_grid(smoothed));
    Real total = band.band.values.sum();
    Real sr = 0.0, sc = 0.0;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            Real w = band.band(r, c);
            sr += w * static_cast<Real>(r);
            sc += w * static_cast<Real>(c);
        }
    }
    band.center_row = sr / total;
    band.center_col = sc / total;
    return band;
}

}  // namespace

TextBand build_text_band(const SpatialMap& a_text, const SpatialMap& gate,
                         const MaskParams& params) {
    require(a_text.grid == gate.grid, "build_text_band: grid mismatch");
    const TokenGrid grid = a_text.grid;

    Vec support = a_text.values.cwiseMax(gate.values);
    if (support.maxCoeff() <= 0.0) {
        throw NoTextEvidence();
    }

    Mat support_grid = to_grid(support, grid);
    Vec row_mean = support_grid.rowwise().mean();
    Real cut = params.band_threshold_frac * row_mean.maxCoeff();

    // Longest contiguous run of qualifying rows; first run wins ties.
    int best_start = -1, best_len = 0;
    int run_start = -1;
    for (int r = 0; r <= grid.height; ++r) {
        bool qualifies = r < grid.height && row_mean(r) >= cut;
        if (qualifies && run_start < 0) {
            run_start = r;
        } else if (!qualifies && run_start >= 0) {
            int len = r - run_start;
            if (len > best_len) {
                best_start = run_start;
                best_len = len;
            }
            run_start = -1;
        }
    }

    Eigen::VectorXi row_active = Eigen::VectorXi::Zero(grid.height);
    for (int r = best_start; r < best_start + best_len; ++r) {
        row_active(r) = 1;
    }
    return band_from_rows(row_active, grid, params);
}

TextBand layout_rect_band(Rect layout_rect, TokenGrid grid, const MaskParams& params) {
    Eigen::VectorXi row_active = Eigen::VectorXi::Zero(grid.height);
    for (int r = 0; r < grid.height; ++r) {
        // Token row r spans [r/H, (r+1)/H) in normalized coordinates.
        Real lo = static_cast<Real>(r) / grid.height;
        Real hi = static_cast<Real>(r + 1) / grid.height;
        if (hi > layout_rect.top && lo < layout_rect.bottom) {
            row_active(r) = 1;
        }
    }
    if (row_active.sum() == 0) {
        row_active(std::clamp(
            static_cast<int>((layout_rect.top + layout_rect.bottom) * 0.5 * grid.height), 0,
            grid.height - 1)) = 1;
    }
    return band_from_rows(row_active, grid, params);
}

SpatialMap make_anchor(const TextBand& band, Real anchor_fraction, Real sigma_frac) {
    require(band.band.values.maxCoeff() > 0.0, "make_anchor: zero band");
    require(anchor_fraction >= 0.0 && anchor_fraction <= 1.0,
            "make_anchor: anchor_fraction must be in [0,1]");
    require(sigma_frac > 0.0, "make_anchor: sigma_frac must be > 0");

    const TokenGrid grid = band.band.grid;
    const Real center_row = band.center_row;
    const Real center_col = anchor_fraction * static_cast<Real>(grid.width - 1);
    const Real sigma = sigma_frac * static_cast<Real>(grid.width);

    Vec values(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            Real dr = static_cast<Real>(r) - center_row;
            Real dc = static_cast<Real>(c) - center_col;
            values(grid.index(r, c)) = std::exp(-0.5 * (dr * dr + dc * dc) / (sigma * sigma));
        }
    }
    values /= values.maxCoeff();
    return SpatialMap(grid, std::move(values));
}

SpatialMap weight_candidate(const SpatialMap& a_obj, const SpatialMap& band,
                            const SpatialMap& anchor, Real rho) {
    require(a_obj.grid == band.grid && a_obj.grid == anchor.grid,
            "weight_candidate: grid mismatch");
    require(rho >= 0.0 && rho <= 1.0, "weight_candidate: rho must be in [0,1], got ", rho);
    Vec weighting = Vec::Constant(a_obj.values.size(), 1.0 - rho) + rho * anchor.values;
    Vec values = a_obj.values.cwiseProduct(band.values).cwiseProduct(weighting);
    values = values.cwiseMax(0.0).cwiseMin(1.0);
    return SpatialMap(a_obj.grid, std::move(values));
}

std::pair<HardMask, bool> derive_hard_mask(const SpatialMap& candidate,
                                           const SpatialMap& band,
                                           Real band_center_row, Real band_center_col,
                                           const MaskParams& params) {
    require(candidate.grid == band.grid, "derive_hard_mask: grid mismatch");
    const TokenGrid grid = candidate.grid;

    Mat smoothed = gaussian_smooth(to_grid(candidate.values, grid), params.smooth_sigma);
    Real peak = smoothed.maxCoeff();

    Eigen::VectorXi field = Eigen::VectorXi::Zero(grid.size());
    if (peak > 0.0) {
        Real cut = params.threshold_frac * peak;
        for (int r = 0; r < grid.height; ++r) {
            for (int c = 0; c < grid.width; ++c) {
                field(grid.index(r, c)) = smoothed(r, c) >= cut ? 1 : 0;
            }
        }
    }

    const auto comps = connected_components(field, grid);
    const Component* selected = nullptr;
    Real best_dist = 0.0;
    for (const auto& comp : comps) {
        Real dr = comp.centroid_row - band_center_row;
        Real dc = comp.centroid_col - band_center_col;
        Real dist = std::sqrt(dr * dr + dc * dc);
        if (!selected || dist < best_dist - 1e-12 ||
            (std::abs(dist - best_dist) <= 1e-12 && comp.area() > selected->area())) {
            selected = &comp;
            best_dist = dist;
        }
    }

    int band_area = 0;
    for (int i = 0; i < grid.size(); ++i) {
        if (band.values(i) > 0.5) ++band_area;
    }

    bool fallback = selected == nullptr ||
                    static_cast<Real>(selected->area()) <
                        params.min_component_frac * static_cast<Real>(band_area);
    if (!fallback) {
        Eigen::VectorXi bits = Eigen::VectorXi::Zero(grid.size());
        for (int idx : selected->tokens) {
            bits(idx) = 1;
        }
        bits = dilate_binary(bits, grid, params.dilation_radius);
        return {HardMask(grid, std::move(bits)), false};
    }

    // Fallback: anchor-centered square, clipped to band rows when possible.
    const int cr = std::clamp(static_cast<int>(std::lround(band_center_row)), 0, grid.height - 1);
    const int cc = std::clamp(static_cast<int>(std::lround(band_center_col)), 0, grid.width - 1);
    const int radius = params.dilation_radius;
    Eigen::VectorXi square = Eigen::VectorXi::Zero(grid.size());
    for (int r = std::max(0, cr - radius); r <= std::min(grid.height - 1, cr + radius); ++r) {
        for (int c = std::max(0, cc - radius); c <= std::min(grid.width - 1, cc + radius); ++c) {
            square(grid.index(r, c)) = 1;
        }
    }

    Eigen::VectorXi clipped = Eigen::VectorXi::Zero(grid.size());
    Mat band_grid = to_grid(band.values, grid);
    for (int r = 0; r < grid.height; ++r) {
        if (band_grid.row(r).maxCoeff() <= 0.5) continue;
        for (int c = 0; c < grid.width; ++c) {
            clipped(grid.index(r, c)) = square(grid.index(r, c));
        }
    }
    if (clipped.sum() == 0) {
        clipped = square;
    }
    return {HardMask(grid, std::move(clipped)), true};
}

}  // namespace occtext
