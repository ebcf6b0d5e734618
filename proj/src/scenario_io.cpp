#include "occtext/scenario_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace occtext {

using nlohmann::json;

Vec build_profile(const ScriptProfileSpec& spec, TokenGrid grid) {
    Vec profile = Vec::Zero(grid.size());
    if (spec.kind == "rect") {
        for (int r = 0; r < grid.height; ++r) {
            for (int c = 0; c < grid.width; ++c) {
                Real cx = (static_cast<Real>(c) + 0.5) / grid.width;
                Real cy = (static_cast<Real>(r) + 0.5) / grid.height;
                if (cx >= spec.rect.left && cx < spec.rect.right && cy >= spec.rect.top &&
                    cy < spec.rect.bottom) {
                    profile(grid.index(r, c)) = 1.0;
                }
            }
        }
    } else if (spec.kind == "gaussian") {
        Real center_row = spec.center_y * static_cast<Real>(grid.height - 1);
        Real center_col = spec.center_x * static_cast<Real>(grid.width - 1);
        require(spec.sigma_tokens > 0.0, "script profile: sigma_tokens must be > 0");
        for (int r = 0; r < grid.height; ++r) {
            for (int c = 0; c < grid.width; ++c) {
                Real dr = static_cast<Real>(r) - center_row;
                Real dc = static_cast<Real>(c) - center_col;
                profile(grid.index(r, c)) =
                    std::exp(-0.5 * (dr * dr + dc * dc) / (spec.sigma_tokens * spec.sigma_tokens));
            }
        }
    } else if (spec.kind == "point") {
        require(spec.token_row >= 0 && spec.token_row < grid.height && spec.token_col >= 0 &&
                    spec.token_col < grid.width,
                "script profile: point (", spec.token_row, ",", spec.token_col,
                ") outside grid");
        profile(grid.index(spec.token_row, spec.token_col)) = 1.0;
    } else {
        throw std::invalid_argument(
            msg("script profile: unknown kind '", spec.kind, "' (rect|gaussian|point)"));
    }
    return profile;
}

ToyBackboneScript build_script(const std::vector<ScriptProfileSpec>& specs, TokenGrid grid) {
    ToyBackboneScript script;
    for (const auto& spec : specs) {
        script.set_profile(spec.token, build_profile(spec, grid));
    }
    return script;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument(msg(path, ": ", what));
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        fail(path, "expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            fail(path, msg("unknown key '", key, "'"));
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const std::string& key, T fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(msg(path, ".", key), "has the wrong type");
    }
}

template <typename T>
T get_req(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) {
        fail(path, msg("missing required key '", key, "'"));
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(msg(path, ".", key), "has the wrong type");
    }
}

Rect get_rect(const json& obj, const std::string& path, const std::string& key,
              bool required, Rect fallback = Rect{0.0, 0.0, 1.0, 1.0}) {
    if (!obj.contains(key)) {
        if (required) fail(path, msg("missing required key '", key, "'"));
        return fallback;
    }
    auto arr = obj.at(key);
    if (!arr.is_array() || arr.size() != 4) {
        fail(msg(path, ".", key), "expected [left, top, right, bottom]");
    }
    try {
        return Rect(arr[0].get<Real>(), arr[1].get<Real>(), arr[2].get<Real>(),
                    arr[3].get<Real>());
    } catch (const std::exception& e) {
        fail(msg(path, ".", key), e.what());
    }
}

ScheduleSpec parse_schedule(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"num_transitions", "reasoning_cutoff", "glyph_window", "glyph_strength"});
    ScheduleSpec s;
    s.num_transitions = get_or<int>(obj, path, "num_transitions", s.num_transitions);
    s.reasoning_cutoff = get_or<int>(obj, path, "reasoning_cutoff", s.reasoning_cutoff);
    if (obj.contains("glyph_window")) {
        auto arr = obj.at("glyph_window");
        if (!arr.is_array() || arr.size() != 2) {
            fail(msg(path, ".glyph_window"), "expected [lo, hi]");
        }
        s.window_lo = arr[0].get<Real>();
        s.window_hi = arr[1].get<Real>();
    }
    s.glyph_strength = get_or<Real>(obj, path, "glyph_strength", s.glyph_strength);
    try {
        s.build();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return s;
}

SiteSpec parse_sites(const json& obj, const std::string& path) {
    check_keys(obj, path, {"total", "replace", "aggregation", "head_aggregation"});
    SiteSpec s;
    s.total = get_or<int>(obj, path, "total", s.total);
    s.replace = get_or<std::vector<int>>(obj, path, "replace", s.replace);
    if (obj.contains("aggregation")) {
        const auto& agg = obj.at("aggregation");
        if (agg.is_string()) {
            std::string name = agg.get<std::string>();
            if (name == "double_stream") {
                s.aggregation = AggregationPolicy::Sites::kDoubleStream;
            } else if (name == "all") {
                s.aggregation = AggregationPolicy::Sites::kAll;
            } else {
                fail(msg(path, ".aggregation"),
                     msg("expected 'double_stream', 'all' or a site list, got '", name, "'"));
            }
        } else if (agg.is_array()) {
            s.aggregation = AggregationPolicy::Sites::kExplicit;
            s.aggregation_sites = agg.get<std::vector<int>>();
        } else {
            fail(msg(path, ".aggregation"), "expected a string or a site list");
        }
    }
    std::string heads = get_or<std::string>(obj, path, "head_aggregation", "mean");
    if (heads == "mean") {
        s.head_aggregation = AggregationPolicy::Heads::kMean;
    } else if (heads == "max") {
        s.head_aggregation = AggregationPolicy::Heads::kMax;
    } else {
        fail(msg(path, ".head_aggregation"), msg("expected 'mean' or 'max', got '", heads, "'"));
    }
    try {
        AttentionSiteSet(s.replace, s.total);
    } catch (const std::exception& e) {
        fail(msg(path, ".replace"), e.what());
    }
    return s;
}

MaskParams parse_mask_params(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"smooth_sigma", "threshold_frac", "dilation_radius", "band_threshold_frac",
                "min_component_frac", "anchor_sigma_frac"});
    MaskParams p;
    p.smooth_sigma = get_or<Real>(obj, path, "smooth_sigma", p.smooth_sigma);
    p.threshold_frac = get_or<Real>(obj, path, "threshold_frac", p.threshold_frac);
    p.dilation_radius = get_or<int>(obj, path, "dilation_radius", p.dilation_radius);
    p.band_threshold_frac = get_or<Real>(obj, path, "band_threshold_frac", p.band_threshold_frac);
    p.min_component_frac = get_or<Real>(obj, path, "min_component_frac", p.min_component_frac);
    p.anchor_sigma_frac = get_or<Real>(obj, path, "anchor_sigma_frac", p.anchor_sigma_frac);
    try {
        validate_mask_params(p);
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return p;
}

GlyphPriorOptions parse_glyph(const json& obj, const std::string& path) {
    check_keys(obj, path, {"pixels_per_token", "gate_dilation", "keep_fraction"});
    GlyphPriorOptions g;
    g.pixels_per_token = get_or<int>(obj, path, "pixels_per_token", g.pixels_per_token);
    g.gate_dilation = get_or<int>(obj, path, "gate_dilation", g.gate_dilation);
    g.keep_fraction = get_or<Real>(obj, path, "keep_fraction", g.keep_fraction);
    if (g.pixels_per_token < 1) fail(msg(path, ".pixels_per_token"), "must be >= 1");
    if (g.gate_dilation < 0) fail(msg(path, ".gate_dilation"), "must be >= 0");
    if (g.keep_fraction <= 0.0 || g.keep_fraction > 1.0) {
        fail(msg(path, ".keep_fraction"), "must be in (0,1]");
    }
    return g;
}

ToyBackboneConfig parse_backbone(const json& obj, const std::string& path, int num_sites) {
    check_keys(obj, path,
               {"grid", "channels", "text_length", "heads", "head_dim", "double_stream_sites",
                "pixels_per_token", "seed"});
    ToyBackboneConfig b;
    if (obj.contains("grid")) {
        const auto& g = obj.at("grid");
        check_keys(g, msg(path, ".grid"), {"height", "width"});
        int h = get_req<int>(g, msg(path, ".grid"), "height");
        int w = get_req<int>(g, msg(path, ".grid"), "width");
        if (h < 1 || w < 1) fail(msg(path, ".grid"), "dims must be >= 1");
        b.grid = TokenGrid(h, w);
    }
    b.channels = get_or<int>(obj, path, "channels", b.channels);
    b.text_length = get_or<int>(obj, path, "text_length", b.text_length);
    b.heads = get_or<int>(obj, path, "heads", b.heads);
    b.head_dim = get_or<int>(obj, path, "head_dim", b.head_dim);
    b.double_stream_sites = get_or<int>(obj, path, "double_stream_sites", b.double_stream_sites);
    b.pixels_per_token = get_or<int>(obj, path, "pixels_per_token", b.pixels_per_token);
    b.seed = get_or<std::uint64_t>(obj, path, "seed", b.seed);
    b.num_sites = num_sites;
    if (b.channels < 1 || b.text_length < 1 || b.heads < 1 || b.head_dim < 1 ||
        b.pixels_per_token < 1) {
        fail(path, "all backbone counts must be >= 1");
    }
    return b;
}

ScriptProfileSpec parse_profile(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"token", "kind", "rect", "center_x", "center_y", "sigma_tokens", "token_row",
                "token_col"});
    ScriptProfileSpec spec;
    spec.token = get_req<int>(obj, path, "token");
    spec.kind = get_req<std::string>(obj, path, "kind");
    if (spec.kind == "rect") {
        spec.rect = get_rect(obj, path, "rect", /*required=*/true);
    } else if (spec.kind == "gaussian") {
        spec.center_x = get_or<Real>(obj, path, "center_x", spec.center_x);
        spec.center_y = get_or<Real>(obj, path, "center_y", spec.center_y);
        spec.sigma_tokens = get_or<Real>(obj, path, "sigma_tokens", spec.sigma_tokens);
    } else if (spec.kind == "point") {
        spec.token_row = get_req<int>(obj, path, "token_row");
        spec.token_col = get_req<int>(obj, path, "token_col");
    } else {
        fail(msg(path, ".kind"), msg("expected rect|gaussian|point, got '", spec.kind, "'"));
    }
    if (spec.token < 0) fail(msg(path, ".token"), "must be >= 0");
    return spec;
}

ScenarioEntry parse_entry(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"id", "base_prompt", "edit_prompt", "target_text", "occluder_phrase",
                "layout_rect", "text_token_indices", "occluder_token_indices", "seed",
                "anchor_strength", "anchor_fraction", "attention_script"});
    ScenarioEntry entry;
    Scenario& s = entry.scenario;
    s.id = get_req<std::string>(obj, path, "id");
    s.base_prompt = get_req<std::string>(obj, path, "base_prompt");
    s.edit_prompt = get_req<std::string>(obj, path, "edit_prompt");
    s.target_text = get_req<std::string>(obj, path, "target_text");
    s.occluder_phrase = get_or<std::string>(obj, path, "occluder_phrase", std::string());
    s.layout_rect = get_rect(obj, path, "layout_rect", /*required=*/true);
    s.text_token_indices = get_req<std::vector<int>>(obj, path, "text_token_indices");
    s.occluder_token_indices = get_req<std::vector<int>>(obj, path, "occluder_token_indices");
    s.seed = get_or<std::uint64_t>(obj, path, "seed", 0);
    s.anchor_strength = get_or<Real>(obj, path, "anchor_strength", s.anchor_strength);
    s.anchor_fraction = get_or<Real>(obj, path, "anchor_fraction", s.anchor_fraction);
    try {
        validate_scenario(s);
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    if (obj.contains("attention_script")) {
        const auto& arr = obj.at("attention_script");
        if (!arr.is_array()) fail(msg(path, ".attention_script"), "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            entry.script.push_back(
                parse_profile(arr[i], msg(path, ".attention_script[", i, "]")));
        }
    }
    return entry;
}

std::pair<int, int> line_col_of(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json rect_json(const Rect& r) { return json::array({r.left, r.top, r.right, r.bottom}); }

}  // namespace

ScenarioFile parse_scenarios(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
        throw std::invalid_argument(
            msg(origin, ":", line, ":", col, ": parse error: ", e.what()));
    }

    check_keys(root, origin, {"defaults", "scenarios"});
    ScenarioFile file;
    std::string dpath = msg(origin, ":defaults");
    if (root.contains("defaults")) {
        const auto& d = root.at("defaults");
        check_keys(d, dpath,
                   {"schedule", "sites", "mask_params", "glyph", "backbone", "eval",
                    "accumulate_attention"});
        if (d.contains("schedule")) {
            file.defaults.schedule = parse_schedule(d.at("schedule"), msg(dpath, ".schedule"));
        }
        if (d.contains("sites")) {
            file.defaults.sites = parse_sites(d.at("sites"), msg(dpath, ".sites"));
        }
        if (d.contains("mask_params")) {
            file.defaults.mask_params =
                parse_mask_params(d.at("mask_params"), msg(dpath, ".mask_params"));
        }
        if (d.contains("glyph")) {
            file.defaults.glyph = parse_glyph(d.at("glyph"), msg(dpath, ".glyph"));
        }
        if (d.contains("backbone")) {
            file.defaults.backbone = parse_backbone(d.at("backbone"), msg(dpath, ".backbone"),
                                                    file.defaults.sites.total);
        }
        if (d.contains("eval")) {
            const auto& e = d.at("eval");
            check_keys(e, msg(dpath, ".eval"), {"detection_confidence_threshold"});
            file.defaults.eval.detection_confidence_threshold =
                get_or<Real>(e, msg(dpath, ".eval"), "detection_confidence_threshold",
                             file.defaults.eval.detection_confidence_threshold);
        }
        file.defaults.accumulate_attention =
            get_or<bool>(d, dpath, "accumulate_attention", false);
    }
    file.defaults.backbone.num_sites = file.defaults.sites.total;

    if (!root.contains("scenarios")) {
        fail(origin, "missing required key 'scenarios'");
    }
    const auto& arr = root.at("scenarios");
    if (!arr.is_array() || arr.empty()) {
        fail(msg(origin, ":scenarios"), "expected a nonempty array");
    }
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ScenarioEntry entry = parse_entry(arr[i], msg(origin, ":scenarios[", i, "]"));
        if (!seen_ids.insert(entry.scenario.id).second) {
            fail(msg(origin, ":scenarios[", i, "].id"),
                 msg("duplicate scenario id '", entry.scenario.id, "'"));
        }
        for (const auto& spec : entry.script) {
            if (spec.token >= file.defaults.backbone.text_length) {
                fail(msg(origin, ":scenarios[", i, "].attention_script"),
                     msg("token ", spec.token, " outside text_length ",
                         file.defaults.backbone.text_length));
            }
        }
        file.entries.push_back(std::move(entry));
    }
    return file;
}

ScenarioFile load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument(msg("load_scenarios: cannot open ", path));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenarios(buffer.str(), path);
}

std::string serialize_scenarios(const ScenarioFile& file) {
    json d;
    const auto& f = file.defaults;
    d["schedule"] = {{"num_transitions", f.schedule.num_transitions},
                     {"reasoning_cutoff", f.schedule.reasoning_cutoff},
                     {"glyph_window", {f.schedule.window_lo, f.schedule.window_hi}},
                     {"glyph_strength", f.schedule.glyph_strength}};
    json agg;
    switch (f.sites.aggregation) {
        case AggregationPolicy::Sites::kDoubleStream: agg = "double_stream"; break;
        case AggregationPolicy::Sites::kAll: agg = "all"; break;
        case AggregationPolicy::Sites::kExplicit: agg = f.sites.aggregation_sites; break;
    }
    d["sites"] = {{"total", f.sites.total},
                  {"replace", f.sites.replace},
                  {"aggregation", agg},
                  {"head_aggregation",
                   f.sites.head_aggregation == AggregationPolicy::Heads::kMean ? "mean" : "max"}};
    d["mask_params"] = {{"smooth_sigma", f.mask_params.smooth_sigma},
                        {"threshold_frac", f.mask_params.threshold_frac},
                        {"dilation_radius", f.mask_params.dilation_radius},
                        {"band_threshold_frac", f.mask_params.band_threshold_frac},
                        {"min_component_frac", f.mask_params.min_component_frac},
                        {"anchor_sigma_frac", f.mask_params.anchor_sigma_frac}};
    d["glyph"] = {{"pixels_per_token", f.glyph.pixels_per_token},
                  {"gate_dilation", f.glyph.gate_dilation},
                  {"keep_fraction", f.glyph.keep_fraction}};
    d["backbone"] = {{"grid", {{"height", f.backbone.grid.height}, {"width", f.backbone.grid.width}}},
                     {"channels", f.backbone.channels},
                     {"text_length", f.backbone.text_length},
                     {"heads", f.backbone.heads},
                     {"head_dim", f.backbone.head_dim},
                     {"double_stream_sites", f.backbone.double_stream_sites},
                     {"pixels_per_token", f.backbone.pixels_per_token},
                     {"seed", f.backbone.seed}};
    d["eval"] = {{"detection_confidence_threshold", f.eval.detection_confidence_threshold}};
    d["accumulate_attention"] = f.accumulate_attention;

    json scenarios = json::array();
    for (const auto& entry : file.entries) {
        const Scenario& s = entry.scenario;
        json e = {{"id", s.id},
                  {"base_prompt", s.base_prompt},
                  {"edit_prompt", s.edit_prompt},
                  {"target_text", s.target_text},
                  {"occluder_phrase", s.occluder_phrase},
                  {"layout_rect", rect_json(s.layout_rect)},
                  {"text_token_indices", s.text_token_indices},
                  {"occluder_token_indices", s.occluder_token_indices},
                  {"seed", s.seed},
                  {"anchor_strength", s.anchor_strength},
                  {"anchor_fraction", s.anchor_fraction}};
        if (!entry.script.empty()) {
            json script = json::array();
            for (const auto& spec : entry.script) {
                json p = {{"token", spec.token}, {"kind", spec.kind}};
                if (spec.kind == "rect") {
                    p["rect"] = rect_json(spec.rect);
                } else if (spec.kind == "gaussian") {
                    p["center_x"] = spec.center_x;
                    p["center_y"] = spec.center_y;
                    p["sigma_tokens"] = spec.sigma_tokens;
                } else {
                    p["token_row"] = spec.token_row;
                    p["token_col"] = spec.token_col;
                }
                script.push_back(std::move(p));
            }
            e["attention_script"] = std::move(script);
        }
        scenarios.push_back(std::move(e));
    }

    json root = {{"defaults", d}, {"scenarios", scenarios}};
    return root.dump(2) + "\n";
}

void save_scenarios(const ScenarioFile& file, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(msg("save_scenarios: cannot open ", path));
    }
    out << serialize_scenarios(file);
}

bool operator==(const ScenarioFile& a, const ScenarioFile& b) {
    return json::parse(serialize_scenarios(a)) == json::parse(serialize_scenarios(b));
}

PipelineOptions make_pipeline_options(const FileDefaults& defaults, int total_sites) {
    require(defaults.sites.total == total_sites, "pipeline options: site total ",
            defaults.sites.total, " does not match adapter total ", total_sites);
    PipelineOptions options;
    options.replace_sites = AttentionSiteSet(defaults.sites.replace, total_sites);
    options.aggregation.sites = defaults.sites.aggregation;
    options.aggregation.explicit_sites = defaults.sites.aggregation_sites;
    options.aggregation.heads = defaults.sites.head_aggregation;
    options.glyph = defaults.glyph;
    options.accumulate_attention = defaults.accumulate_attention;
    return options;
}

}  // namespace occtext
