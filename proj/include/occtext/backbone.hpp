#pragma once

#include "occtext/image_io.hpp"
#include "occtext/kv.hpp"
#include "occtext/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace occtext {

/// Prompt-embedding handle. Equal prompts encode to equal conditionings.
struct Conditioning {
    std::uint64_t hash = 0;
    Mat embedding;  // L_txt x C
};

/// Token-conditioned attention responses recorded during a forward pass.
/// For each attention site, response(site)(q, i) is the post-softmax weight
/// that text token q places on image token i, aggregated over heads.
struct AttentionProbe {
    TokenGrid grid;
    int text_length = 0;
    int double_stream_sites = 0;
    std::vector<Mat> mean_rows;  // per site, L_txt x L_img, head mean
    std::vector<Mat> max_rows;   // per site, L_txt x L_img, head max

    bool available() const { return !mean_rows.empty(); }
    int total_sites() const { return static_cast<int>(mean_rows.size()); }
};

struct PredictOptions {
    const KvOverride* kv_override = nullptr;          // null: no substitution
    const AttentionSiteSet* capture_sites = nullptr;  // null: no K/V capture
    bool want_attention = false;
};

struct PredictResult {
    LatentTokens velocity;
    std::vector<KVSlice> captured;  // one per capture site, ascending site order
    AttentionProbe attention;       // populated when want_attention
};

/// Adapter contract for a flow-matching transformer backbone. Implementations
/// must be deterministic (same inputs, same outputs) and keep site indices
/// stable across calls. Sites [0, double_stream_sites) are the double-stream
/// blocks; the rest are single-stream. This is the repo's extension point:
/// adapters for real backbones implement this interface out of tree and
/// register themselves by name.
class BackboneAdapter {
public:
    virtual ~BackboneAdapter() = default;

    virtual TokenGrid grid() const = 0;
    virtual int channels() const = 0;
    virtual int text_length() const = 0;
    virtual int total_sites() const = 0;
    virtual int double_stream_sites() const = 0;

    virtual Conditioning encode_prompt(const std::string& prompt) const = 0;

    /// Predicts the flow direction at step s. When an override is supplied,
    /// each site in the override's set computes attention with its image-token
    /// K/V mixed against the same-step base slice under the mask; text-token
    /// K/V is never substituted. Captured slices are the stream's own
    /// (pre-mix) K/V.
    virtual PredictResult predict_velocity(const LatentTokens& x,
                                           const Conditioning& conditioning, int step,
                                           const PredictOptions& options = {}) const = 0;

    virtual Image decode(const LatentTokens& x_final) const = 0;
};

/// Euler update x + dt * v.
LatentTokens flow_step(const LatentTokens& x, const LatentTokens& v, Real dt);

/// Which sites feed the localization aggregate and how heads are pooled.
struct AggregationPolicy {
    enum class Sites { kDoubleStream, kAll, kExplicit };
    enum class Heads { kMean, kMax };

    Sites sites = Sites::kDoubleStream;
    Heads heads = Heads::kMean;
    std::vector<int> explicit_sites;
};

/// Averages attention responses over the policy's sites and the given
/// text-token indices, then max-normalizes into [0,1] (an all-zero aggregate
/// stays all-zero).
SpatialMap extract_token_attention(const AttentionProbe& probe,
                                   const std::vector<int>& indices,
                                   const AggregationPolicy& policy = {});

}  // namespace occtext
