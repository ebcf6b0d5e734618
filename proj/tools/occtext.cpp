#include "occtext/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<std::uint64_t> parse_seed_csv(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    return seeds;
}

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occtext: dual-stream occluded text rendering over a toy flow backbone"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Generate images for every (scenario, seed) pair");
    std::string scenarios_path, mode_name = "full", out_dir, seeds_csv, backbone = "toy";
    int jobs = 1;
    bool debug_maps = false;
    run->add_option("--scenarios", scenarios_path, "Scenario file (JSON)")->required();
    run->add_option("--mode", mode_name, "text_only|text_sgmi|stacking|full")
        ->default_val("full");
    run->add_option("--seeds", seeds_csv, "CSV seed list; default: each scenario's own seed");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--jobs", jobs, "Parallel runs")->default_val(1);
    run->add_flag("--debug-maps", debug_maps, "Also dump glyph gate / prior images");
    run->add_option("--backbone", backbone, "toy | plugin:NAME")->default_val("toy");

    // eval
    auto* eval = app.add_subcommand("eval", "Score a run directory and write report.txt");
    std::string eval_scenarios, run_dir, mock_ocr, mock_detector, ocr_cmd, detector_cmd;
    eval->add_option("--scenarios", eval_scenarios, "Scenario file (JSON)")->required();
    eval->add_option("--run-dir", run_dir, "Directory produced by the run command")->required();
    eval->add_option("--mock-ocr", mock_ocr, "Mock OCR spec (JSON)");
    eval->add_option("--mock-detector", mock_detector, "Mock detector spec (JSON)");
    eval->add_option("--ocr-cmd", ocr_cmd,
                     "OCR subprocess template, {image} substituted");
    eval->add_option("--detector-cmd", detector_cmd,
                     "Detector subprocess template, {image} and {phrase} substituted");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            occtext::RunRequest request;
            request.file = occtext::load_scenarios(scenarios_path);
            request.mode = occtext::parse_run_mode(mode_name);
            request.seeds = parse_seed_csv(seeds_csv);
            request.out_dir = out_dir;
            request.jobs = jobs;
            request.debug_maps = debug_maps;
            request.backbone_name = backbone;

            occtext::RunOutcome outcome = occtext::run_command(request);
            std::cout << "completed " << outcome.total_runs - static_cast<int>(outcome.failures.size())
                      << "/" << outcome.total_runs << " runs\n";
            for (const auto& failure : outcome.failures) {
                std::cerr << "FAILED " << failure.run_key << ": " << failure.message << "\n";
            }
            return outcome.ok() ? kExitOk : kExitPartialFailure;
        }

        occtext::EvalRequest request;
        request.file = occtext::load_scenarios(eval_scenarios);
        request.run_dir = run_dir;
        request.mocks.recognizer_path = mock_ocr;
        request.mocks.detector_path = mock_detector;
        request.ocr_command = ocr_cmd;
        request.detector_command = detector_cmd;

        occtext::EvalOutcome outcome = occtext::eval_command(request);
        std::cout << "report: " << outcome.report_path << "\n";
        if (outcome.summary) {
            std::cout << "summary: text_sim " << outcome.summary->mean_text_sim
                      << " occ_align " << outcome.summary->mean_occ_align << " detect_rate "
                      << outcome.summary->detect_rate << " (" << outcome.summary->count
                      << " records)\n";
        }
        if (outcome.invalid_count > 0) {
            std::cerr << outcome.invalid_count << " invalid record(s); see report\n";
            return kExitPartialFailure;
        }
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
}
