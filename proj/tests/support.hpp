#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "eventqa/causal.hpp"
#include "eventqa/dynamics.hpp"
#include "eventqa/executor.hpp"
#include "eventqa/harness.hpp"
#include "eventqa/rng.hpp"
#include "eventqa/scene.hpp"
#include "eventqa/scene_gen.hpp"

namespace testing {

using namespace eventqa;

inline ObjectSpec make_object(int id, Color c, Material m, Shape s, Vec2 pos, Vec2 vel, int spawn = 0) {
    ObjectSpec o;
    o.id = id;
    o.attrs = {c, m, s};
    o.init_position = pos;
    o.init_velocity = vel;
    o.spawn_frame = spawn;
    return o;
}

/// Default generator scene for a seed, as the harness would build it.
inline std::vector<ObjectSpec> seeded_scene(std::uint64_t base, std::uint64_t index) {
    GenConfig cfg;
    cfg.rng_seed = scene_seed(base, index);
    return generate_scene(cfg);
}

/// 100 default scenes with annotations and the full candidate pool, built once.
struct Corpus {
    std::vector<Scene> scenes;
    std::vector<ExecContext> contexts;
    std::vector<QAItem> candidates;
};
inline const Corpus& small_corpus() {
    static const Corpus c = [] {
        Corpus out;
        out.scenes = generate_scenes(100, 4242, GenConfig{}, SimConfig{}, default_threads());
        out.contexts = annotate_scenes(out.scenes, SimConfig{}, default_threads());
        out.candidates = enumerate_all(out.scenes, out.contexts, default_templates(), default_threads());
        return out;
    }();
    return c;
}

/// Post-impact velocities of two equal masses from the conservation laws
/// alone: v1' = v1 - J n, v2' = v2 + J n keeps momentum for any J; energy
/// conservation gives J^2 - J (v1 - v2).n = 0, whose non-trivial root is used.
struct ElasticOutcome {
    Vec2 v1, v2;
};
inline ElasticOutcome elastic_oracle(Vec2 v1, Vec2 v2, Vec2 n) {
    const double len = std::sqrt(n.x * n.x + n.y * n.y);
    n = {n.x / len, n.y / len};
    // a J^2 + b J = 0 with a = 2 (|n|^2 for both bodies), b = -2 (v1 - v2).n
    const double a = 2.0;
    const double b = -2.0 * ((v1.x - v2.x) * n.x + (v1.y - v2.y) * n.y);
    const double j = -b / a;
    return {{v1.x - j * n.x, v1.y - j * n.y}, {v2.x + j * n.x, v2.y + j * n.y}};
}

inline double rel_error(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

/// Transitive closure by repeated edge relaxation until nothing changes.
/// reach[e] = set of event indices with a path to event e.
inline std::map<int, std::set<int>> brute_force_event_closure(const CausalGraph& g) {
    std::map<int, std::set<int>> reach;
    for (int i = 0; i < static_cast<int>(g.events.size()); ++i) reach[i];
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& e : g.edges) {
            if (e.cause.kind != CausalNode::Kind::Event || e.effect.kind != CausalNode::Kind::Event) continue;
            auto& into = reach[e.effect.index];
            const auto before = into.size();
            into.insert(e.cause.index);
            const auto& from = reach[e.cause.index];
            into.insert(from.begin(), from.end());
            changed |= into.size() != before;
        }
    }
    return reach;
}

/// Whether `key` occurs in `events` with a frame within `tolerance` of `frame`.
inline bool occurs(const std::vector<Event>& events, const EventKey& key, int frame, int tolerance) {
    for (const auto& e : events)
        if (event_identity(e) == key && e.frame && std::abs(*e.frame - frame) <= tolerance) return true;
    return false;
}

}  // namespace testing
