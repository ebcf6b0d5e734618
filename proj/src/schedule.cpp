#include "occtext/schedule.hpp"

#include <cmath>
#include <numeric>

namespace occtext {

void validate_schedule(const DenoiseSchedule& s) {
    require(s.num_transitions >= 1, "schedule: need at least one transition");
    require(static_cast<int>(s.step_sizes.size()) == s.num_transitions,
            "schedule: step_sizes length ", s.step_sizes.size(),
            " != num_transitions ", s.num_transitions);
    require(s.reasoning_cutoff >= 0 && s.reasoning_cutoff <= s.num_transitions,
            "schedule: reasoning_cutoff ", s.reasoning_cutoff,
            " outside [0,", s.num_transitions, "]");
    require(s.window_lo >= 0.0 && s.window_lo <= s.window_hi && s.window_hi <= 1.0,
            "schedule: glyph window [", s.window_lo, ",", s.window_hi,
            "] must satisfy 0 <= lo <= hi <= 1");
    require(s.glyph_strength >= 0.0, "schedule: glyph_strength must be >= 0");
    for (Real dt : s.step_sizes) {
        require(dt > 0.0, "schedule: step sizes must be positive");
    }
    Real total = std::accumulate(s.step_sizes.begin(), s.step_sizes.end(), 0.0);
    require(std::abs(total - 1.0) <= 1e-9, "schedule: step sizes sum to ", total,
            ", expected 1 within 1e-9");
}

DenoiseSchedule build_schedule(int n, int reasoning_cutoff,
                               std::array<Real, 2> window, Real glyph_strength) {
    require(n >= 1, "build_schedule: n must be >= 1, got ", n);
    require(reasoning_cutoff >= 0 && reasoning_cutoff <= n,
            "build_schedule: reasoning_cutoff ", reasoning_cutoff, " outside [0,", n, "]");
    require(window[0] <= window[1], "build_schedule: window lo ", window[0],
            " > hi ", window[1]);

    DenoiseSchedule s;
    s.num_transitions = n;
    s.step_sizes.assign(static_cast<std::size_t>(n), 1.0 / static_cast<Real>(n));
    // Force the sum to land exactly on 1 regardless of rounding in 1/n.
    Real partial = std::accumulate(s.step_sizes.begin(), s.step_sizes.end() - 1, 0.0);
    s.step_sizes.back() = 1.0 - partial;
    s.reasoning_cutoff = reasoning_cutoff;
    s.window_lo = window[0];
    s.window_hi = window[1];
    s.glyph_strength = glyph_strength;
    validate_schedule(s);
    return s;
}

Real progress(const DenoiseSchedule& schedule, int s) {
    require(s >= 0 && s <= schedule.num_transitions,
            "progress: step ", s, " outside [0,", schedule.num_transitions, "]");
    if (s == schedule.num_transitions) {
        return 1.0;
    }
    Real p = 0.0;
    for (int k = 0; k < s; ++k) {
        p += schedule.step_sizes[static_cast<std::size_t>(k)];
    }
    return p;
}

}  // namespace occtext
