#pragma once

#include "occtext/image_io.hpp"
#include "occtext/scenario.hpp"
#include "occtext/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace occtext {

/// Per-sample metric record. occ_align is forced to 0 when the occluder was
/// not detected. Records flagged invalid carry a reason and are excluded from
/// aggregation.
struct EvalRecord {
    std::string scenario_id;
    std::uint64_t seed = 0;
    Real text_sim = 0.0;
    Real occ_align = 0.0;
    bool detected = false;
    bool valid = true;
    std::string invalid_reason;
};

/// Uppercases ASCII letters, collapses whitespace runs to single spaces and
/// strips leading/trailing whitespace.
std::string normalize_text(const std::string& text);

/// Normalized edit similarity: 1 - levenshtein(a', b') / max(|a'|, |b'|) over
/// the normalized strings, clamped to [0,1]. Both-empty compares equal (1).
Real text_similarity(const std::string& recognized, const std::string& target);

/// Balanced overlap: sqrt((I/|occ|) * (I/|text|)) with I the intersection
/// area; 0 when the rects are disjoint. Throws on degenerate rects.
Real occlusion_alignment(const Rect& r_occ, const Rect& r_text);

struct Detection {
    Rect box;
    Real confidence = 0.0;
};

/// OCR engine behind an interface; the in-repo mocks are deterministic, real
/// tools run out of process.
class RecognizerClient {
public:
    virtual ~RecognizerClient() = default;
    virtual std::string invoke(const Image& image) = 0;
};

/// Open-set detector behind an interface. Returns the highest-confidence box
/// for the phrase, or nothing.
class DetectorClient {
public:
    virtual ~DetectorClient() = default;
    virtual std::optional<Detection> invoke(const Image& image, const std::string& phrase) = 0;
};

class MockRecognizer final : public RecognizerClient {
public:
    explicit MockRecognizer(std::string text) : text_(std::move(text)) {}
    std::string invoke(const Image&) override { return text_; }

private:
    std::string text_;
};

class MockDetector final : public DetectorClient {
public:
    MockDetector() = default;  // never detects
    MockDetector(Rect box, Real confidence) : detection_(Detection{box, confidence}) {}
    std::optional<Detection> invoke(const Image&, const std::string&) override {
        return detection_;
    }

private:
    std::optional<Detection> detection_;
};

/// Runs `command` with {image} replaced by a PGM path; reads the first line of
/// stdout as the recognized text.
class SubprocessRecognizer final : public RecognizerClient {
public:
    explicit SubprocessRecognizer(std::string command_template);
    std::string invoke(const Image& image) override;

private:
    std::string command_template_;
};

/// Runs `command` with {image} and {phrase} substituted; expects stdout
/// "none" or "left top right bottom confidence" in normalized coordinates.
class SubprocessDetector final : public DetectorClient {
public:
    explicit SubprocessDetector(std::string command_template);
    std::optional<Detection> invoke(const Image& image, const std::string& phrase) override;

private:
    std::string command_template_;
};

struct EvalOptions {
    Real detection_confidence_threshold = 0.35;
};

/// Scores one generated image: text similarity of the recognized text against
/// the target, then occluder detection; a miss (or a box below the confidence
/// threshold) yields detected=false and occ_align=0. Client failures mark the
/// record invalid rather than scoring zero.
EvalRecord evaluate_sample(const Image& image, const Scenario& scenario,
                           std::uint64_t seed, RecognizerClient& recognizer,
                           DetectorClient& detector, const EvalOptions& options = {});

struct EvalSummary {
    Real mean_text_sim = 0.0;
    Real mean_occ_align = 0.0;
    Real detect_rate = 0.0;
    int count = 0;
};

/// Arithmetic means and the detected fraction. Rejects empty or invalid input.
EvalSummary aggregate(const std::vector<EvalRecord>& records);

}  // namespace occtext
