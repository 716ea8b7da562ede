#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eventqa/dynamics.hpp"
#include "eventqa/scene.hpp"

namespace eventqa {

struct GenConfig {
    int min_objects = 3;
    int max_objects = 6;
    int n_seed_collisions = 2;  // minimum collisions over frames 0..174
    std::uint64_t rng_seed = 0;

    double speed_min = 1.0;
    double speed_max = 2.5;
    double placement_margin = 1.0;  // keep frame-0 placements this far inside the bounds
    double entry_margin = 0.75;     // late spawns appear this far outside the bounds
    int spawn_window_end = 75;      // latest spawn frame

    int strike_min = 15;  // planned collisions inside the observed window
    int strike_max = 110;
    int predictive_strike_min = 130;  // planned collision in the held-out window
    int predictive_strike_max = 165;
    double predictive_fraction = 0.6;
    double stationary_fraction = 0.25;  // chance a new object is a resting obstacle
    double max_contact_offset = 0.7;    // radians between approach heading and contact normal

    // Acceptance conditions for a finished scene.
    double min_closing_speed = 1.0;  // every impulse must be clearly visible as a velocity change
    int min_event_gap = 3;           // frames between two events on the same object
    bool require_counterfactual_soundness = true;

    int max_retries = 100;
    int max_placement_tries = 40;

    bool operator==(const GenConfig&) const = default;
};

/// Approach geometry for an interceptor: its travel heading and the angle from
/// that heading to the contact normal (|offset| < pi/2).
struct InterceptGeometry {
    double heading = 0.0;
    double offset = 0.0;
};

struct InterceptPlan {
    Vec2 position;
    Vec2 velocity;
    int spawn_frame = 0;
};

/// Solves for a straight-line start state that brings a new disc into contact
/// with the target at `strike_frame`, given the target's per-frame states.
///
/// The returned spawn frame is the first frame at which the backtracked path is
/// within `entry_margin` of the bounds, so late spawns enter from outside.
/// Throws InputError for speed <= 0, InfeasibleInterception when the target is
/// not visible at the strike frame, the contact point is out of bounds, or the
/// closing speed along the contact normal is not above `min_closing_speed`.
InterceptPlan plan_interception(std::span<const FrameState> target, int strike_frame, double speed,
                                const InterceptGeometry& geometry, const SimConfig& sim = {},
                                double entry_margin = 0.75, double min_closing_speed = 0.0);

struct SceneQuality {
    int collisions = 0;  // over frames 0..174
    bool repeated_pair = false;
    bool unique_attributes = true;
    double min_closing_speed = 0.0;
    int min_event_gap = 0;  // smallest frame gap between two events sharing an object
    int soundness_violations = 0;
};

/// Measures the properties the generator's acceptance test is based on.
/// `check_soundness` enables the counterfactual rollouts (one per object).
SceneQuality assess_scene(std::span<const ObjectSpec> objects, const SimResult& sim, const SimConfig& cfg,
                          bool check_soundness);

bool acceptable(const SceneQuality& q, const GenConfig& cfg);

/// Builds a scene by recursive interception: one random moving object, then
/// each new object aimed at an already-placed one, re-simulating after every
/// addition. Finished scenes that fail acceptance are discarded and rebuilt.
/// Deterministic in cfg.rng_seed. Throws GenerationExhausted after max_retries.
std::vector<ObjectSpec> generate_scene(const GenConfig& cfg, const SimConfig& sim = {});

}  // namespace eventqa
