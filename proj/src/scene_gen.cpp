#include "eventqa/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <string>

#include "eventqa/causal.hpp"
#include "eventqa/errors.hpp"
#include "eventqa/rng.hpp"

namespace eventqa {

namespace {

void validate(const GenConfig& cfg) {
    if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects || cfg.max_objects > kAttributeCombinations)
        throw InputError("object count range must satisfy 1 <= min <= max <= 48");
    if (cfg.speed_min <= 0.0 || cfg.speed_max < cfg.speed_min) throw InputError("invalid speed range");
    if (cfg.spawn_window_end < 0 || cfg.spawn_window_end > kObservedEndFrame)
        throw InputError("spawn window must end inside the observed window");
    if (cfg.strike_min < 1 || cfg.strike_max < cfg.strike_min || cfg.predictive_strike_max >= kTotalFrames ||
        cfg.predictive_strike_max < cfg.predictive_strike_min)
        throw InputError("invalid strike frame windows");
    if (cfg.max_retries < 1 || cfg.max_placement_tries < 1) throw InputError("retry budgets must be positive");
}

bool occurs_near(const SimResult& sim, const EventKey& key, int frame, int tolerance) {
    for (const auto* list : {&sim.events, &sim.unseen_events})
        for (const auto& e : *list)
            if (event_identity(e) == key && std::abs(*e.frame - frame) <= tolerance) return true;
    return false;
}

// Builds one candidate scene, or nullopt if some object could not be placed.
class SceneBuilder {
public:
    SceneBuilder(const GenConfig& cfg, const SimConfig& sim, Rng& rng) : cfg_(cfg), sim_(sim), rng_(rng) {}

    std::optional<std::vector<ObjectSpec>> build() {
        const int n = rng_.uniform_int(cfg_.min_objects, cfg_.max_objects);
        std::vector<int> attr_pool(kAttributeCombinations);
        std::iota(attr_pool.begin(), attr_pool.end(), 0);
        for (int i = 0; i < n; ++i) {
            const int j = rng_.uniform_int(i, kAttributeCombinations - 1);
            std::swap(attr_pool[static_cast<std::size_t>(i)], attr_pool[static_cast<std::size_t>(j)]);
        }

        std::vector<ObjectSpec> objects;
        ObjectSpec first;
        first.id = 0;
        first.attrs = Attribute::from_index(attr_pool[0]);
        const Bounds inner = sim_.bounds.expanded(-cfg_.placement_margin);
        first.init_position = {rng_.uniform(inner.min_x, inner.max_x), rng_.uniform(inner.min_y, inner.max_y)};
        first.init_velocity = unit_vector(rng_.uniform(0.0, 2.0 * std::numbers::pi)) *
                              rng_.uniform(cfg_.speed_min, cfg_.speed_max);
        objects.push_back(first);

        const bool steer_predictive = rng_.bernoulli(cfg_.predictive_fraction);
        for (int i = 1; i < n; ++i) {
            const Attribute attrs = Attribute::from_index(attr_pool[static_cast<std::size_t>(i)]);
            const bool predictive = steer_predictive && i == n - 1;
            auto placed = place(objects, i, attrs, predictive);
            if (!placed && predictive) placed = place(objects, i, attrs, false);
            if (!placed) return std::nullopt;
            objects.push_back(*placed);
        }
        return objects;
    }

private:
    std::optional<ObjectSpec> place(const std::vector<ObjectSpec>& objects, int id, Attribute attrs,
                                    bool predictive) {
        const SimResult current = simulate(objects, sim_);
        const int lo_window = predictive ? cfg_.predictive_strike_min : cfg_.strike_min;
        const int hi_window = predictive ? cfg_.predictive_strike_max : cfg_.strike_max;

        for (int attempt = 0; attempt < cfg_.max_placement_tries; ++attempt) {
            const int target = objects[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(objects.size()) - 1))].id;
            const auto states = current.trace.of(target);
            const int strike = rng_.uniform_int(lo_window, hi_window);
            if (!states[static_cast<std::size_t>(strike)].visible) continue;

            ObjectSpec spec;
            spec.id = id;
            spec.attrs = attrs;
            const double offset = rng_.uniform(-cfg_.max_contact_offset, cfg_.max_contact_offset);
            const Vec2 target_velocity = states[static_cast<std::size_t>(strike)].velocity;
            const bool obstacle = !predictive && target_velocity.norm() >= cfg_.speed_min &&
                                  rng_.bernoulli(cfg_.stationary_fraction);
            if (obstacle) {
                // Resting disc placed where the moving target will be.
                const Vec2 heading = target_velocity * (1.0 / target_velocity.norm());
                const Vec2 normal = rotate(heading, offset);
                spec.init_position = states[static_cast<std::size_t>(strike)].position + normal * (2.0 * sim_.radius);
                spec.init_velocity = {0.0, 0.0};
                spec.spawn_frame = 0;
                if (!sim_.bounds.expanded(-cfg_.placement_margin * 0.5).contains(spec.init_position)) continue;
                if (target_velocity.dot(normal) < cfg_.min_closing_speed) continue;
            } else {
                InterceptGeometry geom;
                geom.heading = rng_.uniform(0.0, 2.0 * std::numbers::pi);
                geom.offset = offset;
                const double speed = rng_.uniform(cfg_.speed_min, cfg_.speed_max);
                InterceptPlan plan;
                try {
                    plan = plan_interception(states, strike, speed, geom, sim_, cfg_.entry_margin,
                                             cfg_.min_closing_speed);
                } catch (const InfeasibleInterception&) {
                    continue;
                }
                if (plan.spawn_frame > cfg_.spawn_window_end) continue;
                spec.init_position = plan.position;
                spec.init_velocity = plan.velocity;
                spec.spawn_frame = plan.spawn_frame;
            }
            if (spec.spawn_frame == 0 && crowded(objects, spec)) continue;

            std::vector<ObjectSpec> trial = objects;
            trial.push_back(spec);
            SimResult result;
            try {
                result = simulate(trial, sim_);
            } catch (const InputError&) {
                continue;
            }
            const EventKey planned = event_identity(Event::collision(id, target, strike));
            if (occurs_near(result, planned, strike, 2)) return spec;
        }
        return std::nullopt;
    }

    bool crowded(const std::vector<ObjectSpec>& objects, const ObjectSpec& spec) const {
        for (const auto& o : objects)
            if (o.spawn_frame == 0 && (o.init_position - spec.init_position).norm() < 2.0 * sim_.radius + 0.1)
                return true;
        return false;
    }

    const GenConfig& cfg_;
    const SimConfig& sim_;
    Rng& rng_;
};

}  // namespace

InterceptPlan plan_interception(std::span<const FrameState> target, int strike_frame, double speed,
                                const InterceptGeometry& geometry, const SimConfig& sim, double entry_margin,
                                double min_closing_speed) {
    if (!(speed > 0.0)) throw InputError("interception speed must be positive");
    if (strike_frame < 0 || static_cast<std::size_t>(strike_frame) >= target.size())
        throw InfeasibleInterception("strike frame outside the target trace");
    const FrameState& at = target[static_cast<std::size_t>(strike_frame)];
    if (!at.visible) throw InfeasibleInterception("target is not in the scene at the strike frame");

    const Vec2 heading = unit_vector(geometry.heading);
    const Vec2 velocity = heading * speed;
    const Vec2 normal = rotate(heading, geometry.offset);  // from interceptor toward target at contact
    if ((velocity - at.velocity).dot(normal) <= min_closing_speed)
        throw InfeasibleInterception("interceptor would not close on the target");

    const Vec2 contact = at.position - normal * (2.0 * sim.radius);
    if (!sim.bounds.contains(contact)) throw InfeasibleInterception("contact point lies outside the scene");

    const Bounds spawn_zone = sim.bounds.expanded(entry_margin);
    for (int f = 0; f <= strike_frame; ++f) {
        const double t = static_cast<double>(strike_frame - f) * kFrameSeconds;
        const Vec2 p = contact - velocity * t;
        if (spawn_zone.contains(p)) return {p, velocity, f};
    }
    return {contact, velocity, strike_frame};
}

SceneQuality assess_scene(std::span<const ObjectSpec> objects, const SimResult& sim, const SimConfig& cfg,
                          bool check_soundness) {
    SceneQuality q;
    std::set<int> attrs;
    for (const auto& o : objects) q.unique_attributes &= attrs.insert(o.attrs.index()).second;

    const auto all = sim.all_events();
    for (const auto& e : all)
        if (e.kind == EventKind::Collision) ++q.collisions;
    q.repeated_pair = sim.has_repeated_collision_pair();

    q.min_closing_speed = std::numeric_limits<double>::infinity();
    for (const auto& imp : sim.impulses) q.min_closing_speed = std::min(q.min_closing_speed, imp.closing_speed);

    q.min_event_gap = kTotalFrames;
    std::map<int, int> last_frame;
    for (const auto& e : all) {
        for (int id : e.participants) {
            auto [it, fresh] = last_frame.try_emplace(id, *e.frame);
            if (!fresh) {
                q.min_event_gap = std::min(q.min_event_gap, *e.frame - it->second);
                it->second = *e.frame;
            }
        }
    }

    if (check_soundness) {
        const CausalGraph g = build_causal_graph(objects, sim.events);
        std::vector<std::set<int>> responsible;
        for (std::size_t i = 0; i < g.events.size(); ++i)
            responsible.push_back(responsible_objects(g, static_cast<int>(i)));
        for (const auto& o : objects) {
            const SimResult cf = rollout_counterfactual(objects, o.id, cfg);
            for (std::size_t i = 0; i < g.events.size(); ++i) {
                if (responsible[i].count(o.id)) continue;
                if (!occurs_near(cf, event_identity(g.events[i]), *g.events[i].frame, 1)) ++q.soundness_violations;
            }
        }
    }
    return q;
}

bool acceptable(const SceneQuality& q, const GenConfig& cfg) {
    return q.unique_attributes && !q.repeated_pair && q.collisions >= cfg.n_seed_collisions &&
           q.min_closing_speed >= cfg.min_closing_speed && q.min_event_gap >= cfg.min_event_gap &&
           q.soundness_violations == 0;
}

std::vector<ObjectSpec> generate_scene(const GenConfig& cfg, const SimConfig& sim) {
    validate(cfg);
    Rng rng(cfg.rng_seed);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        auto objects = SceneBuilder(cfg, sim, rng).build();
        if (!objects) continue;
        const SimResult result = simulate(*objects, sim);
        if (acceptable(assess_scene(*objects, result, sim, cfg.require_counterfactual_soundness), cfg))
            return *objects;
    }
    throw GenerationExhausted("no acceptable scene after " + std::to_string(cfg.max_retries) +
                              " attempts (seed " + std::to_string(cfg.rng_seed) + ")");
}

}  // namespace eventqa
