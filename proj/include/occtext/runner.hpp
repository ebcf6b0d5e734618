#pragma once

#include "occtext/dualstream.hpp"
#include "occtext/eval.hpp"
#include "occtext/scenario_io.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace occtext {

struct RunRequest {
    ScenarioFile file;
    RunMode mode = RunMode::kFull;
    std::vector<std::uint64_t> seeds;  // empty: use each scenario's own seed
    std::string out_dir;
    int jobs = 1;
    bool debug_maps = false;            // additionally dump gate / prior images
    std::string backbone_name = "toy";  // "toy" or "plugin:NAME"
};

struct RunFailure {
    std::string run_key;  // "<scenario_id>:<seed>"
    std::string message;
};

struct RunOutcome {
    int total_runs = 0;
    std::vector<RunFailure> failures;
    bool ok() const { return failures.empty(); }
};

/// Executes mode semantics for every (scenario, seed) pair and emits one run
/// directory per pair: image.pgm, manifest.json, and for full mode the six
/// localization maps. A runs_manifest.json at the top level lists every run in
/// deterministic order; failures land in failures.json.
RunOutcome run_command(const RunRequest& request);

/// Deterministic mock clients driven by a JSON spec file, keyed by run.
struct MockClientFiles {
    std::string recognizer_path;  // optional
    std::string detector_path;    // optional
};

struct EvalRequest {
    std::string run_dir;
    ScenarioFile file;
    MockClientFiles mocks;
    std::string ocr_command;       // subprocess template, used when no mock
    std::string detector_command;  // subprocess template, used when no mock
};

struct EvalOutcome {
    std::vector<EvalRecord> records;  // file order
    std::optional<EvalSummary> summary;
    int invalid_count = 0;
    std::string report_path;
    bool ok() const { return invalid_count == 0; }
};

/// Scores every run listed in the run directory's manifest and writes
/// report.txt (one record per line plus a summary block). Re-running on the
/// same inputs produces a byte-identical report.
EvalOutcome eval_command(const EvalRequest& request);

/// Renders the report text for the given records (exposed for tests).
std::string render_report(const std::vector<EvalRecord>& records, const std::string& mode);

/// Builds the backbone for a run. Only the bundled "toy" backbone ships in
/// tree; "plugin:NAME" reports the available set.
std::shared_ptr<BackboneAdapter> make_backbone(const std::string& name,
                                               const FileDefaults& defaults,
                                               const ScenarioEntry& entry);

}  // namespace occtext
