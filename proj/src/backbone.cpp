#include "occtext/backbone.hpp"

#include <algorithm>

namespace occtext {

LatentTokens flow_step(const LatentTokens& x, const LatentTokens& v, Real dt) {
    require(x.grid == v.grid && x.channels() == v.channels(),
            "flow_step: latent and velocity shapes differ");
    require(dt > 0.0, "flow_step: dt must be positive, got ", dt);
    return LatentTokens(x.grid, x.values + dt * v.values);
}

SpatialMap extract_token_attention(const AttentionProbe& probe,
                                   const std::vector<int>& indices,
                                   const AggregationPolicy& policy) {
    require(probe.available(), "extract_token_attention: probe has no recorded attention");
    require(!indices.empty(), "extract_token_attention: empty token index set");
    for (int q : indices) {
        require(q >= 0 && q < probe.text_length, "extract_token_attention: index ", q,
                " outside text length ", probe.text_length);
    }

    std::vector<int> sites;
    switch (policy.sites) {
        case AggregationPolicy::Sites::kDoubleStream:
            for (int l = 0; l < probe.double_stream_sites; ++l) sites.push_back(l);
            break;
        case AggregationPolicy::Sites::kAll:
            for (int l = 0; l < probe.total_sites(); ++l) sites.push_back(l);
            break;
        case AggregationPolicy::Sites::kExplicit:
            sites = policy.explicit_sites;
            for (int l : sites) {
                require(l >= 0 && l < probe.total_sites(),
                        "extract_token_attention: site ", l, " outside probe range");
            }
            break;
    }
    require(!sites.empty(), "extract_token_attention: no aggregation sites selected");

    const auto& rows =
        policy.heads == AggregationPolicy::Heads::kMean ? probe.mean_rows : probe.max_rows;

    Vec acc = Vec::Zero(probe.grid.size());
    for (int l : sites) {
        for (int q : indices) {
            acc += rows[static_cast<std::size_t>(l)].row(q).transpose();
        }
    }
    acc /= static_cast<Real>(sites.size() * indices.size());

    Real peak = acc.maxCoeff();
    if (peak > 0.0) {
        acc /= peak;
    }
    acc = acc.cwiseMax(0.0).cwiseMin(1.0);
    return SpatialMap(probe.grid, std::move(acc));
}

}  // namespace occtext
