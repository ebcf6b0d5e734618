#include "occtext/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include <unistd.h>

namespace occtext {

std::string normalize_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        unsigned char ch = static_cast<unsigned char>(raw);
        if (std::isspace(ch)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::toupper(ch)));
    }
    return out;
}

namespace {
int levenshtein(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}
}  // namespace

Real text_similarity(const std::string& recognized, const std::string& target) {
    require(!target.empty(), "text_similarity: empty target");
    std::string a = normalize_text(recognized);
    std::string b = normalize_text(target);
    std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) {
        return 1.0;
    }
    Real sim = 1.0 - static_cast<Real>(levenshtein(a, b)) / static_cast<Real>(longest);
    return std::clamp(sim, 0.0, 1.0);
}

Real occlusion_alignment(const Rect& r_occ, const Rect& r_text) {
    require(r_occ.area() > 0.0 && r_text.area() > 0.0,
            "occlusion_alignment: degenerate rectangle");
    Real iw = std::min(r_occ.right, r_text.right) - std::max(r_occ.left, r_text.left);
    Real ih = std::min(r_occ.bottom, r_text.bottom) - std::max(r_occ.top, r_text.top);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    Real intersection = iw * ih;
    return std::sqrt((intersection / r_occ.area()) * (intersection / r_text.area()));
}

namespace {

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    std::string token = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(token, pos)) != std::string::npos) {
        tmpl.replace(pos, token.size(), value);
        pos += value.size();
    }
    return tmpl;
}

std::string run_command(const std::string& command) {
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) {
        throw std::runtime_error(msg("failed to launch: ", command));
    }
    std::string output;
    char buffer[256];
    while (std::size_t n = fread(buffer, 1, sizeof(buffer), pipe)) {
        output.append(buffer, n);
    }
    int status = pclose(pipe);
    if (status != 0) {
        throw std::runtime_error(msg("command exited with status ", status, ": ", command));
    }
    return output;
}

std::string temp_image_path() {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path();
    return (dir / msg("occtext_eval_", ::getpid(), "_", counter++, ".pgm")).string();
}

std::string first_line(const std::string& text) {
    auto pos = text.find('\n');
    return pos == std::string::npos ? text : text.substr(0, pos);
}

}  // namespace

SubprocessRecognizer::SubprocessRecognizer(std::string command_template)
    : command_template_(std::move(command_template)) {}

std::string SubprocessRecognizer::invoke(const Image& image) {
    std::string path = temp_image_path();
    write_pgm(path, image);
    std::string output;
    try {
        output = run_command(substitute(command_template_, "image", path));
    } catch (...) {
        std::filesystem::remove(path);
        throw;
    }
    std::filesystem::remove(path);
    return first_line(output);
}

SubprocessDetector::SubprocessDetector(std::string command_template)
    : command_template_(std::move(command_template)) {}

std::optional<Detection> SubprocessDetector::invoke(const Image& image,
                                                    const std::string& phrase) {
    std::string path = temp_image_path();
    write_pgm(path, image);
    std::string output;
    try {
        std::string command = substitute(command_template_, "image", path);
        command = substitute(command, "phrase", phrase);
        output = run_command(command);
    } catch (...) {
        std::filesystem::remove(path);
        throw;
    }
    std::filesystem::remove(path);

    std::istringstream in(first_line(output));
    std::string head;
    in >> head;
    if (head.empty() || head == "none") {
        return std::nullopt;
    }
    Detection det;
    Real left = 0, top = 0, right = 0, bottom = 0;
    std::istringstream row(first_line(output));
    if (!(row >> left >> top >> right >> bottom >> det.confidence)) {
        throw std::runtime_error(msg("detector output not parseable: '", first_line(output), "'"));
    }
    det.box = Rect(left, top, right, bottom);
    return det;
}

EvalRecord evaluate_sample(const Image& image, const Scenario& scenario,
                           std::uint64_t seed, RecognizerClient& recognizer,
                           DetectorClient& detector, const EvalOptions& options) {
    EvalRecord record;
    record.scenario_id = scenario.id;
    record.seed = seed;
    try {
        record.text_sim = text_similarity(recognizer.invoke(image), scenario.target_text);
        auto detection = detector.invoke(image, scenario.occluder_phrase);
        if (detection && detection->confidence >= options.detection_confidence_threshold) {
            record.detected = true;
            record.occ_align = occlusion_alignment(detection->box, scenario.layout_rect);
        } else {
            record.detected = false;
            record.occ_align = 0.0;
        }
    } catch (const std::exception& e) {
        record.valid = false;
        record.invalid_reason = e.what();
        record.text_sim = 0.0;
        record.occ_align = 0.0;
        record.detected = false;
    }
    return record;
}

EvalSummary aggregate(const std::vector<EvalRecord>& records) {
    require(!records.empty(), "aggregate: empty record list");
    EvalSummary summary;
    for (const auto& r : records) {
        require(r.valid, "aggregate: record ", r.scenario_id, ":", r.seed,
                " is invalid (", r.invalid_reason, ")");
        summary.mean_text_sim += r.text_sim;
        summary.mean_occ_align += r.occ_align;
        summary.detect_rate += r.detected ? 1.0 : 0.0;
    }
    summary.count = static_cast<int>(records.size());
    summary.mean_text_sim /= summary.count;
    summary.mean_occ_align /= summary.count;
    summary.detect_rate /= summary.count;
    return summary;
}

}  // namespace occtext
