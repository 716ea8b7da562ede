#include <cmath>

#include "doctest.h"
#include "eventqa/errors.hpp"
#include "support.hpp"

using namespace eventqa;
using testing::make_object;

namespace {

constexpr double kTol = 1e-9;

std::vector<ObjectSpec> head_on_pair() {
    return {make_object(0, Color::Red, Material::Metal, Shape::Cube, {-0.5, 0.0}, {1.0, 0.0}),
            make_object(1, Color::Blue, Material::Rubber, Shape::Sphere, {0.5, 0.0}, {0.0, 0.0})};
}

}  // namespace

TEST_CASE("head-on equal-mass impact swaps velocities") {
    const SimResult r = simulate(head_on_pair());
    REQUIRE(r.impulses.size() == 1);
    const auto& imp = r.impulses[0];
    CHECK(imp.va_after.x == doctest::Approx(0.0).epsilon(kTol));
    CHECK(std::abs(imp.va_after.y) < kTol);
    CHECK(imp.vb_after.x == doctest::Approx(1.0).epsilon(kTol));
    CHECK(r.trace.of(0)[10].velocity.norm() < kTol);
    CHECK(r.trace.of(1)[10].velocity.x == doctest::Approx(1.0));
    REQUIRE(r.events.size() == 2);  // the collision, then the struck disc leaving the scene
    CHECK(r.events[0].kind == EventKind::Collision);
    CHECK(r.events[0].participants == std::vector<int>{0, 1});
    CHECK(*r.events[0].frame <= 1);
}

TEST_CASE("single stationary object produces no events and a constant trace") {
    const std::vector<ObjectSpec> one = {make_object(0, Color::Gray, Material::Metal, Shape::Cylinder, {1.0, 2.0}, {})};
    const SimResult r = simulate(one);
    CHECK(r.events.empty());
    CHECK(r.unseen_events.empty());
    REQUIRE(r.trace.of(0).size() == 175);
    for (const auto& s : r.trace.of(0)) {
        CHECK(s.position == Vec2{1.0, 2.0});
        CHECK(s.velocity == Vec2{});
        CHECK(s.visible);
    }
}

TEST_CASE("oblique 45 degree impact matches the conservation oracle") {
    // B rests at the origin; A travels along +x and touches B with the line of
    // centers at 45 degrees after about 100.5 substeps.
    const double h = std::sqrt(0.5);
    const Vec2 a0{-h - 1.005, -h};
    const std::vector<ObjectSpec> objs = {
        make_object(0, Color::Red, Material::Metal, Shape::Cube, a0, {1.0, 0.0}),
        make_object(1, Color::Blue, Material::Rubber, Shape::Sphere, {0.0, 0.0}, {0.0, 0.0})};
    const SimConfig cfg;
    const SimResult r = simulate(objs, cfg);
    REQUIRE(!r.impulses.empty());

    // Independent integration to the first overlapping substep.
    Vec2 pa = a0;
    int steps = 0;
    while ((Vec2{0.0, 0.0} - pa).norm() >= 2 * cfg.radius) {
        pa += Vec2{1.0, 0.0} * cfg.dt;
        ++steps;
    }
    CHECK(steps == 101);
    const Vec2 n = Vec2{0.0, 0.0} - pa;
    const auto expected = testing::elastic_oracle({1.0, 0.0}, {0.0, 0.0}, n);
    const auto& imp = r.impulses[0];
    CHECK(imp.frame == 25);  // substep 101 is the first of frame 26's interval, nearest frame 25
    CHECK((imp.va_after - expected.v1).norm() <= kTol);
    CHECK((imp.vb_after - expected.v2).norm() <= kTol);
    // Roughly the textbook 45 degree split: both leave at 45 degrees with speed 1/sqrt(2).
    CHECK(imp.vb_after.norm() == doctest::Approx(h).epsilon(1e-2));
    CHECK(imp.va_after.dot(imp.vb_after) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("impulses conserve momentum and energy (random oblique impacts)") {
    testing::Rng rng(5);
    int impacts = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 target{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec2 target_v = unit_vector(rng.uniform(0, 6.28)) * rng.uniform(0, 1.0);
        const double heading = rng.uniform(0, 6.28);
        const double offset = rng.uniform(-1.2, 1.2);
        const Vec2 normal = unit_vector(heading + offset);
        const Vec2 contact = target + target_v * 1.0 - normal * 1.0;  // contact after 1 s
        const Vec2 v = unit_vector(heading) * rng.uniform(1.0, 2.5);
        const std::vector<ObjectSpec> objs = {
            make_object(0, Color::Red, Material::Metal, Shape::Cube, contact - v * 1.0, v),
            make_object(1, Color::Blue, Material::Rubber, Shape::Sphere, target, target_v)};
        SimResult r;
        try {
            r = simulate(objs);
        } catch (const InputError&) {
            continue;  // random start overlapped
        }
        for (const auto& imp : r.impulses) {
            ++impacts;
            const Vec2 p0 = imp.va_before + imp.vb_before;
            const Vec2 p1 = imp.va_after + imp.vb_after;
            const double scale = imp.va_before.norm() + imp.vb_before.norm();
            CHECK((p1 - p0).norm() / scale <= kTol);
            const double e0 = imp.va_before.norm2() + imp.vb_before.norm2();
            const double e1 = imp.va_after.norm2() + imp.vb_after.norm2();
            CHECK(testing::rel_error(e1, e0, e0) <= kTol);
            // The exchanged impulse lies along one direction for both bodies.
            const Vec2 da = imp.va_after - imp.va_before;
            const Vec2 db = imp.vb_after - imp.vb_before;
            CHECK(std::abs(da.x * db.y - da.y * db.x) <= 1e-9 * (1 + da.norm2()));
        }
    }
    CHECK(impacts > 100);
}

TEST_CASE("simulation is deterministic") {
    const auto objs = testing::seeded_scene(99, 3);
    CHECK(simulate(objs) == simulate(objs));
}

TEST_CASE("simulate rejects invalid input") {
    CHECK_THROWS_AS(simulate(std::vector<ObjectSpec>{}), InputError);
    auto objs = head_on_pair();
    objs[1].attrs = objs[0].attrs;
    CHECK_THROWS_AS(simulate(objs), InputError);
    objs = head_on_pair();
    objs[1].spawn_frame = 125;
    CHECK_THROWS_AS(simulate(objs), InputError);
    objs = head_on_pair();
    objs[1].init_position = {0.2, 0.0};
    CHECK_THROWS_AS(simulate(objs), InputError);
    SimConfig bad;
    bad.restitution = 0.9;
    CHECK_THROWS_AS(simulate(head_on_pair(), bad), InputError);
}

TEST_CASE("entering object: one enter event at the analytic crossing frame") {
    // x(f) = -6 + 2 (f - 10) / 25 reaches -5 at f = 22.5, so the first visible frame is 23.
    const std::vector<ObjectSpec> objs = {
        make_object(0, Color::Green, Material::Rubber, Shape::Sphere, {-6.0, 1.0}, {2.0, 0.0}, 10)};
    const SimResult r = simulate(objs);
    int first_visible = -1;
    for (int f = 0; f < kTotalFrames && first_visible < 0; ++f)
        if (r.trace.of(0)[static_cast<std::size_t>(f)].visible) first_visible = f;
    const int analytic = 10 + static_cast<int>(std::ceil((-5.0 - -6.0) / (2.0 / 25.0)));
    CHECK(first_visible == analytic);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0] == Event::enter(0, analytic));

    // It crosses x = 5 at f = 147.5, so it leaves in the held-out window.
    REQUIRE(r.unseen_events.size() == 1);
    CHECK(r.unseen_events[0] == Event::exit(0, 148));
    const auto detected = detect_events_from_trace(r.trace);
    CHECK(detected == r.all_events());
}

TEST_CASE("leaving object: exit at the first invisible frame") {
    // x(f) = 4.1 + f / 25 passes 5 at f = 22.5.
    const std::vector<ObjectSpec> objs = {
        make_object(0, Color::Green, Material::Rubber, Shape::Sphere, {4.1, 0.0}, {1.0, 0.0})};
    const SimResult r = simulate(objs);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0] == Event::exit(0, 23));
    CHECK_FALSE(r.trace.of(0)[23].visible);
    CHECK(r.trace.of(0)[22].visible);
}

TEST_CASE("detector recovers the head-on collision") {
    const SimResult r = simulate(head_on_pair());
    const auto detected = detect_events_from_trace(r.trace);
    const auto truth = r.all_events();
    REQUIRE(detected.size() == truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(event_identity(detected[i]) == event_identity(truth[i]));
        CHECK(std::abs(*detected[i].frame - *truth[i].frame) <= 1);
    }
}

TEST_CASE("detector: constant velocity object yields nothing; empty trace yields nothing") {
    const std::vector<ObjectSpec> objs = {
        make_object(0, Color::Green, Material::Rubber, Shape::Sphere, {-1.0, 0.0}, {0.5, 0.3})};
    CHECK(detect_events_from_trace(simulate(objs).trace).empty());
    CHECK(detect_events_from_trace(MotionTrace{}).empty());
}

TEST_CASE("counterfactual rollouts") {
    SUBCASE("removing the only object leaves no events") {
        const std::vector<ObjectSpec> one = {
            make_object(0, Color::Gray, Material::Metal, Shape::Cube, {4.5, 0.0}, {1.0, 0.0})};
        const SimResult r = rollout_counterfactual(one, 0);
        CHECK(r.events.empty());
    }
    SUBCASE("removing an isolated resting object changes nothing else") {
        auto objs = head_on_pair();
        objs.push_back(make_object(2, Color::Yellow, Material::Metal, Shape::Cylinder, {-4.0, 4.0}, {}));
        const SimResult factual = simulate(objs);
        const SimResult cf = rollout_counterfactual(objs, 2);
        std::vector<Event> expected;
        for (const auto& e : factual.events)
            if (!e.involves(2)) expected.push_back(e);
        REQUIRE(cf.events.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(event_identity(cf.events[i]) == event_identity(expected[i]));
            CHECK(std::abs(*cf.events[i].frame - *expected[i].frame) <= 1);
        }
    }
    SUBCASE("chain A->B->C: rollout equals direct re-simulation without A") {
        // A strikes B, B then strikes C.
        const std::vector<ObjectSpec> objs = {
            make_object(0, Color::Red, Material::Metal, Shape::Cube, {-3.0, 0.0}, {2.0, 0.0}),
            make_object(1, Color::Blue, Material::Rubber, Shape::Sphere, {-1.0, 0.0}, {}),
            make_object(2, Color::Cyan, Material::Metal, Shape::Cylinder, {1.5, 0.0}, {})};
        const SimResult factual = simulate(objs);
        REQUIRE(factual.events.size() >= 2);
        const SimResult cf = rollout_counterfactual(objs, 0);
        const std::vector<ObjectSpec> rest(objs.begin() + 1, objs.end());
        const SimResult direct = simulate(rest);
        CHECK(cf.events == direct.events);
        CHECK_FALSE(testing::occurs(cf.events, event_identity(Event::collision(1, 2, 0)), 0, 200));
    }
    SUBCASE("unknown id") { CHECK_THROWS_AS(rollout_counterfactual(head_on_pair(), 9), InputError); }
}

TEST_CASE("no tunneling: per-frame displacement stays below the radius on generated scenes") {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const SimResult r = simulate(testing::seeded_scene(1234, i));
        for (std::size_t k = 0; k < r.trace.object_ids.size(); ++k)
            for (std::size_t f = 1; f < r.trace.states[k].size(); ++f)
                CHECK((r.trace.states[k][f].position - r.trace.states[k][f - 1].position).norm() < kDefaultRadius);
    }
}
