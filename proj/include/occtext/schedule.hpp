#pragma once

#include "occtext/types.hpp"

#include <array>
#include <vector>

namespace occtext {

/// Denoising schedule: N transitions with step sizes summing to 1, a reasoning
/// cutoff step, and the glyph-prior injection window.
struct DenoiseSchedule {
    int num_transitions = 0;          // N
    std::vector<Real> step_sizes;     // dt_s, length N, sum == 1
    int reasoning_cutoff = 0;         // s_r, 0 <= s_r <= N
    Real window_lo = 0.0;             // alpha
    Real window_hi = 1.0;             // beta
    Real glyph_strength = 0.0;        // lambda_glyph >= 0
};

/// Uniform schedule with dt = 1/n. Adapters for real backbones may substitute
/// their own step_sizes as long as they sum to 1.
DenoiseSchedule build_schedule(int n, int reasoning_cutoff,
                               std::array<Real, 2> window, Real glyph_strength);

/// Normalized denoising progress before step s: p_s = sum of dt_k for k < s.
/// p_0 = 0, p_N = 1.
Real progress(const DenoiseSchedule& schedule, int s);

/// Whether the glyph window is active at progress p (closed interval).
inline bool glyph_window_active(const DenoiseSchedule& schedule, Real p) {
    return p >= schedule.window_lo && p <= schedule.window_hi;
}

void validate_schedule(const DenoiseSchedule& schedule);

}  // namespace occtext
