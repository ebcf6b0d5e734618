#include "occtext/runner.hpp"

#include "occtext/image_io.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace occtext {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string run_key(const std::string& id, std::uint64_t seed) {
    return msg(id, ":", seed);
}

std::string run_dir_for(const std::string& out_dir, const std::string& id,
                        std::uint64_t seed) {
    return (fs::path(out_dir) / id / msg("seed_", seed)).string();
}

std::string fixed6(Real v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(msg("cannot open ", path, " for writing"));
    }
    out << content;
}

json manifest_json(const ScenarioEntry& entry, std::uint64_t seed, RunMode mode,
                   const FileDefaults& defaults, const PipelineResult& result) {
    const auto& f = defaults;
    json m;
    m["scenario_id"] = entry.scenario.id;
    m["seed"] = seed;
    m["mode"] = run_mode_name(mode);
    m["schedule"] = {{"num_transitions", f.schedule.num_transitions},
                     {"reasoning_cutoff", f.schedule.reasoning_cutoff},
                     {"glyph_window", {f.schedule.window_lo, f.schedule.window_hi}},
                     {"glyph_strength", f.schedule.glyph_strength}};
    m["sites"] = {{"total", f.sites.total}, {"replace", f.sites.replace}};
    m["mask_params"] = {{"smooth_sigma", f.mask_params.smooth_sigma},
                        {"threshold_frac", f.mask_params.threshold_frac},
                        {"dilation_radius", f.mask_params.dilation_radius},
                        {"band_threshold_frac", f.mask_params.band_threshold_frac},
                        {"min_component_frac", f.mask_params.min_component_frac},
                        {"anchor_sigma_frac", f.mask_params.anchor_sigma_frac}};
    m["used_fallback"] = result.used_fallback;
    m["band_from_layout"] = result.band_from_layout;
    if (!result.overridden_sites.empty()) {
        m["override_trace"] = result.overridden_sites;
    }
    return m;
}

void emit_run_artifacts(const std::string& dir, const ScenarioEntry& entry,
                        std::uint64_t seed, RunMode mode, const FileDefaults& defaults,
                        const PipelineResult& result, bool debug_maps) {
    fs::create_directories(dir);
    write_pgm((fs::path(dir) / "image.pgm").string(), result.image);

    const TokenGrid grid = defaults.backbone.grid;
    if (result.mask) {
        write_map_pgm((fs::path(dir) / "mask.pgm").string(), result.mask->as_real(), grid);
    }
    if (result.a_text) {
        write_map_pgm((fs::path(dir) / "a_text.pgm").string(), result.a_text->values, grid);
    }
    if (result.a_obj) {
        write_map_pgm((fs::path(dir) / "a_obj.pgm").string(), result.a_obj->values, grid);
    }
    if (result.band) {
        write_map_pgm((fs::path(dir) / "band.pgm").string(), result.band->values, grid);
    }
    if (result.anchor) {
        write_map_pgm((fs::path(dir) / "anchor.pgm").string(), result.anchor->values, grid);
    }
    if (result.candidate) {
        write_map_pgm((fs::path(dir) / "candidate.pgm").string(), result.candidate->values,
                      grid);
    }
    if (debug_maps && result.gate) {
        write_map_pgm((fs::path(dir) / "gate.pgm").string(), result.gate->values, grid);
    }
    if (debug_maps && result.prior_preview) {
        write_map_pgm((fs::path(dir) / "prior_c0.pgm").string(),
                      result.prior_preview->values, grid);
    }

    write_text_file((fs::path(dir) / "manifest.json").string(),
                    manifest_json(entry, seed, mode, defaults, result).dump(2) + "\n");
}

struct PlannedRun {
    const ScenarioEntry* entry;
    std::uint64_t seed;
    std::string dir;
};

// ---- mock client specs ----

struct MockOcrSpec {
    std::string fallback = "target";  // "target" | "text"
    std::string fallback_text;
    std::map<std::string, std::string> per_run;
};

struct MockDetectorEntry {
    std::string mode = "text_rect";  // "text_rect" | "none" | "box"
    Rect box{0.0, 0.0, 1.0, 1.0};
    Real confidence = 0.9;
};

struct MockDetectorSpec {
    MockDetectorEntry fallback;
    std::map<std::string, MockDetectorEntry> per_run;
};

MockOcrSpec load_mock_ocr(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(msg("mock ocr: cannot open ", path));
    json root = json::parse(in);
    MockOcrSpec spec;
    spec.fallback = root.value("fallback", spec.fallback);
    spec.fallback_text = root.value("fallback_text", spec.fallback_text);
    if (spec.fallback != "target" && spec.fallback != "text") {
        throw std::invalid_argument(
            msg("mock ocr: fallback must be 'target' or 'text', got '", spec.fallback, "'"));
    }
    if (root.contains("per_run")) {
        for (const auto& [key, value] : root.at("per_run").items()) {
            spec.per_run[key] = value.get<std::string>();
        }
    }
    return spec;
}

MockDetectorEntry parse_detector_entry(const json& obj, const std::string& what) {
    MockDetectorEntry entry;
    entry.mode = obj.value("mode", entry.mode);
    entry.confidence = obj.value("confidence", entry.confidence);
    if (entry.mode == "box") {
        if (!obj.contains("box")) {
            throw std::invalid_argument(msg("mock detector ", what, ": mode 'box' needs a box"));
        }
        auto arr = obj.at("box");
        entry.box = Rect(arr.at(0).get<Real>(), arr.at(1).get<Real>(), arr.at(2).get<Real>(),
                         arr.at(3).get<Real>());
    } else if (entry.mode != "text_rect" && entry.mode != "none") {
        throw std::invalid_argument(msg("mock detector ", what, ": unknown mode '", entry.mode,
                                        "' (text_rect|none|box)"));
    }
    return entry;
}

MockDetectorSpec load_mock_detector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(msg("mock detector: cannot open ", path));
    json root = json::parse(in);
    MockDetectorSpec spec;
    if (root.contains("fallback")) {
        spec.fallback = parse_detector_entry(root.at("fallback"), "fallback");
    }
    if (root.contains("per_run")) {
        for (const auto& [key, value] : root.at("per_run").items()) {
            spec.per_run[key] = parse_detector_entry(value, msg("per_run['", key, "']"));
        }
    }
    return spec;
}

std::unique_ptr<RecognizerClient> make_recognizer(const MockOcrSpec* mock,
                                                  const std::string& ocr_command,
                                                  const Scenario& scenario,
                                                  std::uint64_t seed) {
    if (mock) {
        auto it = mock->per_run.find(run_key(scenario.id, seed));
        if (it != mock->per_run.end()) {
            return std::make_unique<MockRecognizer>(it->second);
        }
        return std::make_unique<MockRecognizer>(
            mock->fallback == "target" ? scenario.target_text : mock->fallback_text);
    }
    if (!ocr_command.empty()) {
        return std::make_unique<SubprocessRecognizer>(ocr_command);
    }
    throw std::invalid_argument("eval: no OCR client configured (pass a mock file or a command)");
}

std::unique_ptr<DetectorClient> make_detector(const MockDetectorSpec* mock,
                                              const std::string& detector_command,
                                              const Scenario& scenario, std::uint64_t seed) {
    if (mock) {
        MockDetectorEntry entry = mock->fallback;
        auto it = mock->per_run.find(run_key(scenario.id, seed));
        if (it != mock->per_run.end()) {
            entry = it->second;
        }
        if (entry.mode == "none") {
            return std::make_unique<MockDetector>();
        }
        Rect box = entry.mode == "text_rect" ? scenario.layout_rect : entry.box;
        return std::make_unique<MockDetector>(box, entry.confidence);
    }
    if (!detector_command.empty()) {
        return std::make_unique<SubprocessDetector>(detector_command);
    }
    throw std::invalid_argument(
        "eval: no detector client configured (pass a mock file or a command)");
}

}  // namespace

std::shared_ptr<BackboneAdapter> make_backbone(const std::string& name,
                                               const FileDefaults& defaults,
                                               const ScenarioEntry& entry) {
    if (name == "toy") {
        return build_toy_backbone(defaults.backbone,
                                  build_script(entry.script, defaults.backbone.grid));
    }
    if (name.rfind("plugin:", 0) == 0) {
        throw std::invalid_argument(msg("backbone plugin '", name.substr(7),
                                        "' is not registered; available backbones: toy"));
    }
    throw std::invalid_argument(msg("unknown backbone '", name, "'; available backbones: toy"));
}

RunOutcome run_command(const RunRequest& request) {
    require(!request.out_dir.empty(), "run: output directory required");
    require(request.jobs >= 1, "run: jobs must be >= 1");
    require(!request.file.entries.empty(), "run: scenario file has no entries");
    // Surface a bad backbone name as a configuration error before any run starts.
    make_backbone(request.backbone_name, request.file.defaults, request.file.entries.front());
    fs::create_directories(request.out_dir);

    const DenoiseSchedule schedule = request.file.defaults.schedule.build();

    std::vector<PlannedRun> plan;
    for (const auto& entry : request.file.entries) {
        std::vector<std::uint64_t> seeds =
            request.seeds.empty() ? std::vector<std::uint64_t>{entry.scenario.seed}
                                  : request.seeds;
        for (std::uint64_t seed : seeds) {
            plan.push_back({&entry, seed,
                            run_dir_for(request.out_dir, entry.scenario.id, seed)});
        }
    }

    std::mutex failures_mutex;
    std::vector<RunFailure> failures;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= plan.size()) break;
            const PlannedRun& run = plan[i];
            try {
                Scenario scenario = run.entry->scenario;
                scenario.seed = run.seed;
                auto adapter = make_backbone(request.backbone_name, request.file.defaults,
                                             *run.entry);
                PipelineOptions options = make_pipeline_options(request.file.defaults,
                                                                adapter->total_sites());
                PipelineResult result =
                    run_variant(request.mode, scenario, schedule, *adapter,
                                request.file.defaults.mask_params, options);
                emit_run_artifacts(run.dir, *run.entry, run.seed, request.mode,
                                   request.file.defaults, result, request.debug_maps);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                failures.push_back({run_key(run.entry->scenario.id, run.seed), e.what()});
            }
        }
    };

    if (request.jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        int n = std::min<int>(request.jobs, static_cast<int>(plan.size()));
        for (int t = 0; t < std::max(1, n); ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    // Deterministic top-level manifest, in plan order.
    json runs = json::array();
    for (const auto& run : plan) {
        runs.push_back({{"scenario_id", run.entry->scenario.id},
                        {"seed", run.seed},
                        {"dir", fs::relative(run.dir, request.out_dir).string()},
                        {"mode", run_mode_name(request.mode)}});
    }
    json top = {{"mode", run_mode_name(request.mode)}, {"runs", runs}};
    write_text_file((fs::path(request.out_dir) / "runs_manifest.json").string(),
                    top.dump(2) + "\n");

    std::sort(failures.begin(), failures.end(),
              [](const RunFailure& a, const RunFailure& b) { return a.run_key < b.run_key; });
    if (!failures.empty()) {
        json fail = json::array();
        for (const auto& f : failures) {
            fail.push_back({{"run", f.run_key}, {"error", f.message}});
        }
        write_text_file((fs::path(request.out_dir) / "failures.json").string(),
                        fail.dump(2) + "\n");
    }

    RunOutcome outcome;
    outcome.total_runs = static_cast<int>(plan.size());
    outcome.failures = std::move(failures);
    return outcome;
}

std::string render_report(const std::vector<EvalRecord>& records, const std::string& mode) {
    std::ostringstream out;
    out << "# occtext evaluation report\n";
    out << "# mode: " << mode << "\n";
    out << "# columns: scenario_id seed text_sim occ_align detected\n";
    std::vector<EvalRecord> valid;
    std::vector<const EvalRecord*> invalid;
    for (const auto& r : records) {
        if (r.valid) {
            out << r.scenario_id << " " << r.seed << " " << fixed6(r.text_sim) << " "
                << fixed6(r.occ_align) << " " << (r.detected ? 1 : 0) << "\n";
            valid.push_back(r);
        } else {
            invalid.push_back(&r);
        }
    }
    for (const auto* r : invalid) {
        out << "# invalid: " << r->scenario_id << " " << r->seed << " " << r->invalid_reason
            << "\n";
    }
    out << "# invalid records: " << invalid.size() << "\n";
    if (!valid.empty()) {
        EvalSummary summary = aggregate(valid);
        out << "# summary over " << summary.count
            << " records: text_sim occ_align detect_rate\n";
        out << fixed6(summary.mean_text_sim) << " " << fixed6(summary.mean_occ_align) << " "
            << fixed6(summary.detect_rate) << "\n";
    }
    return out.str();
}

EvalOutcome eval_command(const EvalRequest& request) {
    const fs::path manifest_path = fs::path(request.run_dir) / "runs_manifest.json";
    std::ifstream manifest_in(manifest_path);
    if (!manifest_in) {
        throw std::invalid_argument(
            msg("eval: no runs_manifest.json in ", request.run_dir,
                " (directory must be produced by the run command)"));
    }
    json manifest = json::parse(manifest_in);
    const std::string mode = manifest.value("mode", "full");

    std::map<std::string, const ScenarioEntry*> by_id;
    for (const auto& entry : request.file.entries) {
        by_id[entry.scenario.id] = &entry;
    }

    std::optional<MockOcrSpec> ocr_spec;
    std::optional<MockDetectorSpec> detector_spec;
    if (!request.mocks.recognizer_path.empty()) {
        ocr_spec = load_mock_ocr(request.mocks.recognizer_path);
    }
    if (!request.mocks.detector_path.empty()) {
        detector_spec = load_mock_detector(request.mocks.detector_path);
    }

    EvalOutcome outcome;
    for (const auto& run : manifest.at("runs")) {
        const std::string id = run.at("scenario_id").get<std::string>();
        const std::uint64_t seed = run.at("seed").get<std::uint64_t>();
        EvalRecord record;
        record.scenario_id = id;
        record.seed = seed;

        auto it = by_id.find(id);
        if (it == by_id.end()) {
            record.valid = false;
            record.invalid_reason = "scenario not present in scenario file";
            outcome.records.push_back(std::move(record));
            continue;
        }
        const Scenario& scenario = it->second->scenario;

        const fs::path image_path =
            fs::path(request.run_dir) / run.at("dir").get<std::string>() / "image.pgm";
        if (!fs::exists(image_path)) {
            record.valid = false;
            record.invalid_reason = msg("missing image ", image_path.string());
            outcome.records.push_back(std::move(record));
            continue;
        }

        try {
            Image image = read_pgm(image_path.string());
            auto recognizer = make_recognizer(ocr_spec ? &*ocr_spec : nullptr,
                                              request.ocr_command, scenario, seed);
            auto detector = make_detector(detector_spec ? &*detector_spec : nullptr,
                                          request.detector_command, scenario, seed);
            record = evaluate_sample(image, scenario, seed, *recognizer, *detector,
                                     request.file.defaults.eval);
        } catch (const std::exception& e) {
            record.valid = false;
            record.invalid_reason = e.what();
        }
        outcome.records.push_back(std::move(record));
    }

    std::vector<EvalRecord> valid;
    for (const auto& r : outcome.records) {
        if (r.valid) {
            valid.push_back(r);
        } else {
            ++outcome.invalid_count;
        }
    }
    if (!valid.empty()) {
        outcome.summary = aggregate(valid);
    }

    const std::string report = render_report(outcome.records, mode);
    outcome.report_path = (fs::path(request.run_dir) / "report.txt").string();
    write_text_file(outcome.report_path, report);
    return outcome;
}

}  // namespace occtext
