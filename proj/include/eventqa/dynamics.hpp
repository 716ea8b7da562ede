#pragma once

#include <span>
#include <vector>

#include "eventqa/scene.hpp"

namespace eventqa {

struct SimConfig {
    double dt = 0.01;            // seconds per substep
    int substeps_per_frame = 4;  // dt * substeps must equal one frame (1/25 s)
    double restitution = 1.0;    // only 1.0 is supported
    double damping = 0.0;        // per-second linear velocity decay
    Bounds bounds;
    double radius = kDefaultRadius;

    bool operator==(const SimConfig&) const = default;
};

/// One elastic impulse, recorded with the velocities on either side of it.
struct ImpulseRecord {
    int frame = 0;
    int a = 0;
    int b = 0;
    Vec2 va_before, vb_before;
    Vec2 va_after, vb_after;
    double closing_speed = 0.0;  // normal relative speed at impact

    bool operator==(const ImpulseRecord&) const = default;
};

struct SimResult {
    MotionTrace trace;
    std::vector<Event> events;         // frames 0..124, chronological
    std::vector<Event> unseen_events;  // frames 125..174, chronological
    std::vector<ImpulseRecord> impulses;

    bool operator==(const SimResult&) const = default;

    /// Observed and held-out events, chronological.
    std::vector<Event> all_events() const;
    /// True when some unordered pair collides more than once over the whole run.
    bool has_repeated_collision_pair() const;
};

/// Deterministic fixed-timestep simulation of frictionless equal-mass discs.
///
/// Objects are pending until their spawn frame, then move ballistically.
/// An object whose center is outside the bounds is incoming and passes through
/// everything; it becomes active when its center first enters the bounds
/// (enter event at that frame) and is gone for good once it leaves (exit event).
/// Only active discs collide. Pairs are resolved in ascending id order within a
/// substep: split de-penetration along the contact normal, then an elastic
/// exchange of the normal velocity components.
///
/// Throws InputError on empty input, duplicate ids or attributes, spawn frames
/// outside [0, 124], or overlapping frame-0 objects.
SimResult simulate(std::span<const ObjectSpec> objects, const SimConfig& cfg = {});

/// Re-simulates from frame 0 without `removed`. Throws InputError for an unknown id.
SimResult rollout_counterfactual(std::span<const ObjectSpec> objects, int removed,
                                 const SimConfig& cfg = {});

struct DetectorConfig {
    double speed_eps = 0.05;  // units/s; below this an object counts as stationary
    double accel_eps = 0.5;   // units/s of velocity change between consecutive frames
    double radius = kDefaultRadius;
};

/// Recovers enter/exit/collision events from a trace alone.
///
/// Enter and exit come from visibility transitions. A collision is reported at
/// frame f when two objects are within contact range at f, at least one shows
/// a velocity change above accel_eps between f-1 and f, and the two changes
/// balance (the momentum was exchanged between these two).
std::vector<Event> detect_events_from_trace(const MotionTrace& trace, const DetectorConfig& cfg = {});

}  // namespace eventqa
