#include "eventqa/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "eventqa/errors.hpp"

namespace eventqa {

namespace {

enum class Phase { Pending, Incoming, Active, Gone };

struct Body {
    int id = 0;
    int spawn_frame = 0;
    Vec2 p, v;
    Phase phase = Phase::Pending;
};

void validate(std::span<const ObjectSpec> objects, const SimConfig& cfg) {
    if (objects.empty()) throw InputError("simulation needs at least one object");
    if (cfg.restitution != 1.0) throw InputError("only perfectly elastic collisions are supported");
    if (cfg.dt <= 0.0 || cfg.substeps_per_frame <= 0 ||
        std::abs(cfg.dt * cfg.substeps_per_frame - kFrameSeconds) > 1e-12)
        throw InputError("dt * substeps_per_frame must equal one frame (1/25 s)");
    if (cfg.radius <= 0.0) throw InputError("radius must be positive");

    std::set<int> ids;
    std::set<int> attrs;
    for (const auto& o : objects) {
        if (!ids.insert(o.id).second) throw InputError("duplicate object id " + std::to_string(o.id));
        if (!attrs.insert(o.attrs.index()).second)
            throw InputError("duplicate attribute triple on object " + std::to_string(o.id));
        if (o.spawn_frame < 0 || o.spawn_frame > kObservedEndFrame)
            throw InputError("spawn frame out of [0, 124] on object " + std::to_string(o.id));
        if (!o.init_position.finite() || !o.init_velocity.finite())
            throw InputError("non-finite initial state on object " + std::to_string(o.id));
    }
    const double contact = 2.0 * cfg.radius;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        for (std::size_t j = i + 1; j < objects.size(); ++j) {
            const auto& a = objects[i];
            const auto& b = objects[j];
            if (a.spawn_frame != 0 || b.spawn_frame != 0) continue;
            if ((a.init_position - b.init_position).norm() < contact - 1e-9)
                throw InputError("objects " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                                 " overlap at frame 0");
        }
    }
}

class Simulator {
public:
    Simulator(std::span<const ObjectSpec> objects, const SimConfig& cfg) : cfg_(cfg) {
        bodies_.reserve(objects.size());
        for (const auto& o : objects) {
            Body b;
            b.id = o.id;
            b.spawn_frame = o.spawn_frame;
            b.p = o.init_position;
            b.v = o.init_velocity;
            bodies_.push_back(b);
        }
        std::sort(bodies_.begin(), bodies_.end(), [](const Body& a, const Body& b) { return a.id < b.id; });
        result_.trace.object_ids.reserve(bodies_.size());
        for (const auto& b : bodies_) result_.trace.object_ids.push_back(b.id);
        result_.trace.states.assign(bodies_.size(), {});
        for (auto& s : result_.trace.states) s.reserve(kTotalFrames);
    }

    SimResult run() {
        for (int f = 0; f < kTotalFrames; ++f) {
            if (f > 0)
                for (int k = 1; k <= cfg_.substeps_per_frame; ++k) substep(f, k);
            spawn(f);
            record();
        }
        std::vector<Event> all = std::move(events_);
        sort_chronologically(all);
        for (auto& e : all) {
            if (*e.frame <= kObservedEndFrame)
                result_.events.push_back(std::move(e));
            else
                result_.unseen_events.push_back(std::move(e));
        }
        return std::move(result_);
    }

private:
    void spawn(int f) {
        for (auto& b : bodies_) {
            if (b.phase != Phase::Pending || b.spawn_frame != f) continue;
            if (cfg_.bounds.contains(b.p)) {
                b.phase = Phase::Active;
                if (f > 0) events_.push_back(Event::enter(b.id, f));
            } else {
                b.phase = Phase::Incoming;
            }
        }
    }

    void record() {
        for (std::size_t i = 0; i < bodies_.size(); ++i) {
            const auto& b = bodies_[i];
            result_.trace.states[i].push_back({b.p, b.v, b.phase == Phase::Active});
        }
    }

    // Advances one substep of the interval that ends at frame f.
    void substep(int f, int k) {
        const double decay = std::max(0.0, 1.0 - cfg_.damping * cfg_.dt);
        for (auto& b : bodies_) {
            if (b.phase == Phase::Pending) continue;
            b.p += b.v * cfg_.dt;
            if (cfg_.damping != 0.0) b.v = b.v * decay;
        }
        for (auto& b : bodies_) {
            const bool inside = cfg_.bounds.contains(b.p);
            if (b.phase == Phase::Incoming && inside) {
                b.phase = Phase::Active;
                events_.push_back(Event::enter(b.id, f));
            } else if (b.phase == Phase::Active && !inside) {
                b.phase = Phase::Gone;
                events_.push_back(Event::exit(b.id, f));
            }
        }
        // Substep k sits at (f-1) + k/S frames; snap to the nearest frame, half up.
        const int snapped = (f - 1) + (2 * k >= cfg_.substeps_per_frame ? 1 : 0);
        const double contact = 2.0 * cfg_.radius;
        for (std::size_t i = 0; i < bodies_.size(); ++i) {
            for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
                auto& a = bodies_[i];
                auto& b = bodies_[j];
                if (a.phase != Phase::Active || b.phase != Phase::Active) continue;
                const Vec2 d = b.p - a.p;
                const double dist2 = d.norm2();
                if (dist2 >= contact * contact || dist2 == 0.0) continue;
                const Vec2 rel = b.v - a.v;
                if (rel.dot(d) >= 0.0) continue;  // separating
                resolve(a, b, d, std::sqrt(dist2), snapped);
            }
        }
    }

    void resolve(Body& a, Body& b, Vec2 d, double dist, int frame) {
        const Vec2 n = d * (1.0 / dist);
        const double overlap = 2.0 * cfg_.radius - dist;
        a.p -= n * (0.5 * overlap);
        b.p += n * (0.5 * overlap);

        ImpulseRecord rec;
        rec.frame = frame;
        rec.a = a.id;
        rec.b = b.id;
        rec.va_before = a.v;
        rec.vb_before = b.v;
        const double an = a.v.dot(n);
        const double bn = b.v.dot(n);
        a.v += n * (bn - an);
        b.v += n * (an - bn);
        rec.va_after = a.v;
        rec.vb_after = b.v;
        rec.closing_speed = an - bn;
        result_.impulses.push_back(rec);
        events_.push_back(Event::collision(a.id, b.id, frame));
    }

    SimConfig cfg_;
    std::vector<Body> bodies_;
    std::vector<Event> events_;
    SimResult result_;
};

}  // namespace

std::vector<Event> SimResult::all_events() const {
    std::vector<Event> all = events;
    all.insert(all.end(), unseen_events.begin(), unseen_events.end());
    return all;
}

bool SimResult::has_repeated_collision_pair() const {
    std::set<EventKey> seen;
    for (const auto* list : {&events, &unseen_events})
        for (const auto& e : *list)
            if (e.kind == EventKind::Collision && !seen.insert(event_identity(e)).second) return true;
    return false;
}

SimResult simulate(std::span<const ObjectSpec> objects, const SimConfig& cfg) {
    validate(objects, cfg);
    return Simulator(objects, cfg).run();
}

SimResult rollout_counterfactual(std::span<const ObjectSpec> objects, int removed, const SimConfig& cfg) {
    std::vector<ObjectSpec> rest;
    rest.reserve(objects.size());
    bool found = false;
    for (const auto& o : objects) {
        if (o.id == removed)
            found = true;
        else
            rest.push_back(o);
    }
    if (!found) throw InputError("counterfactual removal of unknown object " + std::to_string(removed));
    if (rest.empty()) return SimResult{};
    return simulate(rest, cfg);
}

std::vector<Event> detect_events_from_trace(const MotionTrace& trace, const DetectorConfig& cfg) {
    std::vector<Event> events;
    const std::size_t n = trace.states.size();

    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = trace.states[k];
        const int id = trace.object_ids[k];
        std::size_t f = 0;
        while (f < s.size() && !s[f].visible) ++f;
        if (f == s.size()) continue;
        if (f > 0) events.push_back(Event::enter(id, static_cast<int>(f)));
        while (f < s.size() && s[f].visible) ++f;
        if (f < s.size()) events.push_back(Event::exit(id, static_cast<int>(f)));
    }

    const double contact = 2.0 * cfg.radius;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& sa = trace.states[i];
            const auto& sb = trace.states[j];
            const std::size_t frames = std::min(sa.size(), sb.size());
            int last_hit = -2;
            for (std::size_t f = 1; f < frames; ++f) {
                if (!(sa[f].visible || sa[f - 1].visible) || !(sb[f].visible || sb[f - 1].visible)) continue;
                const Vec2 dva = sa[f].velocity - sa[f - 1].velocity;
                const Vec2 dvb = sb[f].velocity - sb[f - 1].velocity;
                const double change = std::max(dva.norm(), dvb.norm());
                if (change <= cfg.accel_eps) continue;
                const double reach = contact + (sa[f].velocity - sb[f].velocity).norm() * kFrameSeconds + 1e-6;
                if ((sa[f].position - sb[f].position).norm() > reach) continue;
                if ((dva + dvb).norm() > 0.25 * change) continue;
                if (static_cast<int>(f) - last_hit > 1)
                    events.push_back(Event::collision(trace.object_ids[i], trace.object_ids[j], static_cast<int>(f)));
                last_hit = static_cast<int>(f);
            }
        }
    }
    sort_chronologically(events);
    return events;
}

}  // namespace eventqa
