#include "occtext/kv.hpp"

namespace occtext {

KVSlice replace_image_kv(const KVSlice& edit, const KVSlice& base, const HardMask& mask) {
    require(edit.step == base.step && edit.site == base.site,
            "replace_image_kv: provenance mismatch, edit (", edit.step, ",", edit.site,
            ") vs base (", base.step, ",", base.site, ")");
    require(edit.image_keys.rows() == base.image_keys.rows() &&
                edit.image_keys.cols() == base.image_keys.cols() &&
                edit.image_values.rows() == base.image_values.rows() &&
                edit.image_values.cols() == base.image_values.cols(),
            "replace_image_kv: image segment shape mismatch");
    require(mask.bits.size() == edit.image_keys.rows(),
            "replace_image_kv: mask length ", mask.bits.size(),
            " != image token count ", edit.image_keys.rows());

    KVSlice out;
    out.site = edit.site;
    out.step = edit.step;
    out.text_keys = edit.text_keys;
    out.text_values = edit.text_values;
    // The mask is binary, so the (1-M) * base + M * edit mixture reduces to a
    // per-row hard select; rows come through bitwise.
    out.image_keys = base.image_keys;
    out.image_values = base.image_values;
    for (int r = 0; r < mask.bits.size(); ++r) {
        if (mask.bits(r)) {
            out.image_keys.row(r) = edit.image_keys.row(r);
            out.image_values.row(r) = edit.image_values.row(r);
        }
    }
    return out;
}

}  // namespace occtext
