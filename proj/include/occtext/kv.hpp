#pragma once

#include "occtext/types.hpp"

#include <map>

namespace occtext {

/// Per-step, per-site key/value tensors, split into text-token and image-token
/// segments. Rows are tokens, columns are heads * head_dim features.
struct KVSlice {
    int site = -1;
    int step = -1;
    Mat text_keys;     // L_txt x D
    Mat text_values;   // L_txt x D
    Mat image_keys;    // L_img x D
    Mat image_values;  // L_img x D
};

/// Region-wise K/V replacement: image rows with mask 0 take the base slice,
/// rows with mask 1 keep the edit slice; text segments are the edit's,
/// untouched. The mask is broadcast across the feature dimension. Both slices
/// must carry the same (step, site) provenance.
KVSlice replace_image_kv(const KVSlice& edit, const KVSlice& base, const HardMask& mask);

/// Directive interpreted inside the attention computation: at each site in
/// `sites`, mix the running stream's own image-token K/V with the same-step
/// base slice under `mask`. Slices for sites outside `sites` are ignored.
struct KvOverride {
    AttentionSiteSet sites;
    HardMask mask;
    const std::map<int, KVSlice>* base_slices = nullptr;  // keyed by site
};

/// Same-step base-stream K/V cache. Entries are written once per step by the
/// base stream and may only be read back at that same step; starting the next
/// step discards them.
class KVCacheStore {
public:
    void begin_step(int step) {
        step_ = step;
        slices_.clear();
    }

    void put(KVSlice slice) {
        require(slice.step == step_, "KVCacheStore: slice step ", slice.step,
                " does not match current step ", step_);
        require(slices_.find(slice.site) == slices_.end(),
                "KVCacheStore: site ", slice.site, " already written this step");
        slices_.emplace(slice.site, std::move(slice));
    }

    const KVSlice& get(int step, int site) const {
        require(step == step_, "KVCacheStore: read at step ", step,
                " but cache holds step ", step_);
        auto it = slices_.find(site);
        require(it != slices_.end(), "KVCacheStore: no slice for site ", site);
        return it->second;
    }

    int current_step() const { return step_; }
    const std::map<int, KVSlice>& slices() const { return slices_; }

private:
    int step_ = -1;
    std::map<int, KVSlice> slices_;
};

}  // namespace occtext
