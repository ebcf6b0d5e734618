#pragma once

#include "occtext/backbone.hpp"

#include <map>

namespace occtext {

/// Scripted attention profiles: for a scripted text-token index, the attention
/// row over image tokens is replaced by the profile (renormalized to sum 1)
/// after softmax, at every site and head. Unscripted rows come from the seeded
/// projections. Profiles must be nonnegative; they are stored max-normalized.
struct ToyBackboneScript {
    std::map<int, Vec> profiles;  // text-token index -> length L_img profile

    void set_profile(int token_index, Vec profile);
};

struct ToyBackboneConfig {
    TokenGrid grid{8, 8};
    int channels = 16;
    int text_length = 8;
    int num_sites = 57;
    /// Sites [0, double_stream_sites) use per-modality projections; the rest
    /// share one projection over the concatenated sequence. Defaults to
    /// num_sites / 3 (19 of 57), matching the block-family ratio the adapter
    /// contract assumes.
    int double_stream_sites = -1;
    int heads = 2;
    int head_dim = 4;
    int pixels_per_token = 8;  // decode block size
    std::uint64_t seed = 0;
};

/// Deterministic toy flow-matching backbone.
///
/// All weights are drawn once from NormalSampler streams keyed by
/// (seed, site, role). encode_prompt derives the text embedding and a bounded
/// anchor latent from the FNV-1a hash of the prompt. The velocity is
///
///     v(x, c, s) = (anchor_c - x) + 0.5 * tanh(h_img - x)
///
/// where h = [embedding_c; x] is refined by one joint-attention residual per
/// site, h += (1/num_sites) * softmax(Q K^T / sqrt(d)) V Wo, so the sampler
/// contracts toward anchor_c with a bounded attention perturbation and the
/// trajectory stays finite for any seed. K/V overrides are applied inside the
/// attention at the directed sites, which changes the velocity.
///
/// decode maps channel 0 of each token through g(t) = 0.5 + 0.5*clamp(t,-1,1)
/// onto a pixels_per_token square block.
std::shared_ptr<BackboneAdapter> build_toy_backbone(const ToyBackboneConfig& config,
                                                    const ToyBackboneScript& script = {});

}  // namespace occtext
