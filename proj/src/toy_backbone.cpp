#include "occtext/toy_backbone.hpp"

#include "occtext/noise.hpp"

#include <cmath>
#include <vector>

namespace occtext {

void ToyBackboneScript::set_profile(int token_index, Vec profile) {
    require(token_index >= 0, "script: token index must be >= 0");
    require(profile.size() > 0, "script: empty profile");
    require(profile.allFinite(), "script: profile must be finite");
    require(profile.minCoeff() >= 0.0, "script: profile must be nonnegative");
    Real peak = profile.maxCoeff();
    if (peak > 0.0) {
        profile /= peak;
    }
    profiles[token_index] = std::move(profile);
}

namespace {

constexpr std::uint64_t kTextTag   = 0x7465787400000001ULL;
constexpr std::uint64_t kAnchorTag = 0x616e636800000002ULL;

enum WeightRole : std::uint64_t {
    kQText = 1, kKText, kVText, kQImage, kKImage, kVImage,
    kOutText, kOutImage, kQJoint, kKJoint, kVJoint, kOutJoint,
};

struct SiteWeights {
    // Double-stream sites: per-modality projections. Single-stream sites:
    // the joint set only.
    Mat q_text, k_text, v_text, q_image, k_image, v_image, out_text, out_image;
    Mat q_joint, k_joint, v_joint, out_joint;
    bool double_stream = false;
};

Mat seeded_weights(std::uint64_t seed, int site, std::uint64_t role,
                   Eigen::Index rows, Eigen::Index cols, Real scale) {
    NormalSampler sampler(mix_key(seed, static_cast<std::uint64_t>(site), role));
    return sampler.matrix(rows, cols) * scale;
}

Mat softmax_rows(const Mat& logits) {
    Mat out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Real peak = logits.row(r).maxCoeff();
        Vec e = (logits.row(r).array() - peak).exp();
        out.row(r) = e / e.sum();
    }
    return out;
}

class ToyBackbone final : public BackboneAdapter {
public:
    ToyBackbone(const ToyBackboneConfig& config, const ToyBackboneScript& script)
        : cfg_(config), script_(script) {
        require(cfg_.channels >= 1 && cfg_.text_length >= 1 && cfg_.num_sites >= 1 &&
                    cfg_.heads >= 1 && cfg_.head_dim >= 1 && cfg_.pixels_per_token >= 1,
                "toy backbone: all counts must be >= 1");
        if (cfg_.double_stream_sites < 0) {
            cfg_.double_stream_sites = std::max(1, cfg_.num_sites / 3);
        }
        require(cfg_.double_stream_sites <= cfg_.num_sites,
                "toy backbone: double_stream_sites ", cfg_.double_stream_sites,
                " exceeds num_sites ", cfg_.num_sites);
        for (const auto& [token, profile] : script_.profiles) {
            require(token < cfg_.text_length, "toy backbone: scripted token ", token,
                    " outside text length ", cfg_.text_length);
            require(profile.size() == cfg_.grid.size(),
                    "toy backbone: scripted profile length ", profile.size(),
                    " != image token count ", cfg_.grid.size());
        }

        const int c = cfg_.channels;
        const int d = cfg_.heads * cfg_.head_dim;
        const Real in_scale = 1.0 / std::sqrt(static_cast<Real>(c));
        const Real out_scale = 1.0 / std::sqrt(static_cast<Real>(d));
        weights_.reserve(static_cast<std::size_t>(cfg_.num_sites));
        for (int l = 0; l < cfg_.num_sites; ++l) {
            SiteWeights sw;
            sw.double_stream = l < cfg_.double_stream_sites;
            if (sw.double_stream) {
                sw.q_text  = seeded_weights(cfg_.seed, l, kQText, c, d, in_scale);
                sw.k_text  = seeded_weights(cfg_.seed, l, kKText, c, d, in_scale);
                sw.v_text  = seeded_weights(cfg_.seed, l, kVText, c, d, in_scale);
                sw.q_image = seeded_weights(cfg_.seed, l, kQImage, c, d, in_scale);
                sw.k_image = seeded_weights(cfg_.seed, l, kKImage, c, d, in_scale);
                sw.v_image = seeded_weights(cfg_.seed, l, kVImage, c, d, in_scale);
                sw.out_text  = seeded_weights(cfg_.seed, l, kOutText, d, c, out_scale);
                sw.out_image = seeded_weights(cfg_.seed, l, kOutImage, d, c, out_scale);
            } else {
                sw.q_joint   = seeded_weights(cfg_.seed, l, kQJoint, c, d, in_scale);
                sw.k_joint   = seeded_weights(cfg_.seed, l, kKJoint, c, d, in_scale);
                sw.v_joint   = seeded_weights(cfg_.seed, l, kVJoint, c, d, in_scale);
                sw.out_joint = seeded_weights(cfg_.seed, l, kOutJoint, d, c, out_scale);
            }
            weights_.push_back(std::move(sw));
        }
    }

    TokenGrid grid() const override { return cfg_.grid; }
    int channels() const override { return cfg_.channels; }
    int text_length() const override { return cfg_.text_length; }
    int total_sites() const override { return cfg_.num_sites; }
    int double_stream_sites() const override { return cfg_.double_stream_sites; }

    Conditioning encode_prompt(const std::string& prompt) const override {
        Conditioning c;
        c.hash = fnv1a64(prompt);
        NormalSampler sampler(mix_key(cfg_.seed, c.hash, kTextTag));
        c.embedding = sampler.matrix(cfg_.text_length, cfg_.channels);
        return c;
    }

    PredictResult predict_velocity(const LatentTokens& x, const Conditioning& conditioning,
                                   int step, const PredictOptions& options) const override {
        require(x.grid == cfg_.grid && x.channels() == cfg_.channels,
                "toy backbone: latent shape mismatch (got ", x.values.rows(), "x",
                x.values.cols(), ", want ", cfg_.grid.size(), "x", cfg_.channels, ")");
        require(conditioning.embedding.rows() == cfg_.text_length &&
                    conditioning.embedding.cols() == cfg_.channels,
                "toy backbone: conditioning shape mismatch");
        if (options.kv_override) {
            for (int l : options.kv_override->sites.sites) {
                require(l >= 0 && l < cfg_.num_sites,
                        "toy backbone: kv_override site ", l, " >= total sites ", cfg_.num_sites);
            }
            require(options.kv_override->mask.bits.size() == cfg_.grid.size(),
                    "toy backbone: kv_override mask length mismatch");
            require(options.kv_override->base_slices != nullptr,
                    "toy backbone: kv_override carries no base slices");
        }

        const int l_txt = cfg_.text_length;
        const int l_img = cfg_.grid.size();
        const int d = cfg_.heads * cfg_.head_dim;
        const Real inv_sqrt_hd = 1.0 / std::sqrt(static_cast<Real>(cfg_.head_dim));
        const Real gain = 1.0 / static_cast<Real>(cfg_.num_sites);

        Mat h_text = conditioning.embedding;
        Mat h_image = x.values;

        PredictResult result;
        if (options.want_attention) {
            result.attention.grid = cfg_.grid;
            result.attention.text_length = l_txt;
            result.attention.double_stream_sites = cfg_.double_stream_sites;
            result.attention.mean_rows.resize(static_cast<std::size_t>(cfg_.num_sites));
            result.attention.max_rows.resize(static_cast<std::size_t>(cfg_.num_sites));
        }

        for (int l = 0; l < cfg_.num_sites; ++l) {
            const SiteWeights& sw = weights_[static_cast<std::size_t>(l)];

            Mat q(l_txt + l_img, d), k(l_txt + l_img, d), v(l_txt + l_img, d);
            if (sw.double_stream) {
                q.topRows(l_txt) = h_text * sw.q_text;
                k.topRows(l_txt) = h_text * sw.k_text;
                v.topRows(l_txt) = h_text * sw.v_text;
                q.bottomRows(l_img) = h_image * sw.q_image;
                k.bottomRows(l_img) = h_image * sw.k_image;
                v.bottomRows(l_img) = h_image * sw.v_image;
            } else {
                Mat joint(l_txt + l_img, cfg_.channels);
                joint.topRows(l_txt) = h_text;
                joint.bottomRows(l_img) = h_image;
                q = joint * sw.q_joint;
                k = joint * sw.k_joint;
                v = joint * sw.v_joint;
            }

            KVSlice native;
            native.site = l;
            native.step = step;
            native.text_keys = k.topRows(l_txt);
            native.text_values = v.topRows(l_txt);
            native.image_keys = k.bottomRows(l_img);
            native.image_values = v.bottomRows(l_img);

            if (options.capture_sites && options.capture_sites->contains(l)) {
                result.captured.push_back(native);
            }

            // Region-wise substitution happens inside the attention: directed
            // sites mix this stream's image K/V with the same-step base slice.
            const Mat* use_image_keys = &native.image_keys;
            const Mat* use_image_values = &native.image_values;
            KVSlice mixed;
            if (options.kv_override && options.kv_override->sites.contains(l)) {
                const auto& store = *options.kv_override->base_slices;
                auto it = store.find(l);
                require(it != store.end(), "toy backbone: no base slice for site ", l);
                mixed = replace_image_kv(native, it->second, options.kv_override->mask);
                use_image_keys = &mixed.image_keys;
                use_image_values = &mixed.image_values;
            }
            k.bottomRows(l_img) = *use_image_keys;
            v.bottomRows(l_img) = *use_image_values;

            Mat site_update = Mat::Zero(l_txt + l_img, cfg_.channels);
            Mat mean_probe, max_probe;
            if (options.want_attention) {
                mean_probe = Mat::Zero(l_txt, l_img);
                max_probe = Mat::Constant(l_txt, l_img, -1.0);
            }

            for (int head = 0; head < cfg_.heads; ++head) {
                const int col0 = head * cfg_.head_dim;
                Mat qh = q.middleCols(col0, cfg_.head_dim);
                Mat kh = k.middleCols(col0, cfg_.head_dim);
                Mat vh = v.middleCols(col0, cfg_.head_dim);
                Mat attn = softmax_rows(qh * kh.transpose() * inv_sqrt_hd);

                // Scripted text rows attend only to image tokens, weights
                // proportional to the profile.
                for (const auto& [token, profile] : script_.profiles) {
                    Real total = profile.sum();
                    attn.row(token).head(l_txt).setZero();
                    if (total > 0.0) {
                        attn.row(token).tail(l_img) = profile.transpose() / total;
                    } else {
                        attn.row(token).tail(l_img).setConstant(1.0 / static_cast<Real>(l_img));
                    }
                }

                if (options.want_attention) {
                    Mat rows = attn.topRows(l_txt).rightCols(l_img);
                    mean_probe += rows;
                    max_probe = max_probe.cwiseMax(rows);
                }

                Mat head_out = attn * vh;  // (l_txt + l_img) x head_dim
                if (sw.double_stream) {
                    site_update.topRows(l_txt) +=
                        head_out.topRows(l_txt) * sw.out_text.middleRows(col0, cfg_.head_dim);
                    site_update.bottomRows(l_img) +=
                        head_out.bottomRows(l_img) * sw.out_image.middleRows(col0, cfg_.head_dim);
                } else {
                    site_update += head_out * sw.out_joint.middleRows(col0, cfg_.head_dim);
                }
            }

            if (options.want_attention) {
                result.attention.mean_rows[static_cast<std::size_t>(l)] =
                    mean_probe / static_cast<Real>(cfg_.heads);
                result.attention.max_rows[static_cast<std::size_t>(l)] = max_probe;
            }

            h_text += gain * site_update.topRows(l_txt);
            h_image += gain * site_update.bottomRows(l_img);
        }

        Mat anchor = anchor_latent(conditioning);
        Mat v = (anchor - x.values) + 0.5 * (h_image - x.values).array().tanh().matrix();
        result.velocity = LatentTokens(cfg_.grid, std::move(v));
        return result;
    }

    Image decode(const LatentTokens& x_final) const override {
        require(x_final.grid == cfg_.grid && x_final.channels() == cfg_.channels,
                "toy backbone: decode shape mismatch");
        const int ppt = cfg_.pixels_per_token;
        Image image;
        image.pixels.resize(cfg_.grid.height * ppt, cfg_.grid.width * ppt);
        for (int r = 0; r < cfg_.grid.height; ++r) {
            for (int c = 0; c < cfg_.grid.width; ++c) {
                Real t = x_final.values(cfg_.grid.index(r, c), 0);
                Real g = 0.5 + 0.5 * std::clamp(t, -1.0, 1.0);
                image.pixels.block(r * ppt, c * ppt, ppt, ppt).setConstant(g);
            }
        }
        return image;
    }

private:
    Mat anchor_latent(const Conditioning& conditioning) const {
        NormalSampler sampler(mix_key(cfg_.seed, conditioning.hash, kAnchorTag));
        return 0.5 * sampler.matrix(cfg_.grid.size(), cfg_.channels);
    }

    ToyBackboneConfig cfg_;
    ToyBackboneScript script_;
    std::vector<SiteWeights> weights_;
};

}  // namespace

std::shared_ptr<BackboneAdapter> build_toy_backbone(const ToyBackboneConfig& config,
                                                    const ToyBackboneScript& script) {
    return std::make_shared<ToyBackbone>(config, script);
}

}  // namespace occtext
