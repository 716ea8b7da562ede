#include <set>

#include "doctest.h"
#include "eventqa/errors.hpp"
#include "eventqa/rng.hpp"
#include "eventqa/scene.hpp"

using namespace eventqa;

TEST_CASE("attribute space has 48 distinct triples") {
    std::set<Attribute> all;
    for (auto c : kAllColors)
        for (auto m : kAllMaterials)
            for (auto s : kAllShapes) all.insert({c, m, s});
    CHECK(all.size() == 48);
    for (int i = 0; i < kAttributeCombinations; ++i) CHECK(Attribute::from_index(i).index() == i);
}

TEST_CASE("attribute names round-trip") {
    for (auto c : kAllColors) CHECK(parse_color(to_string(c)) == c);
    for (auto m : kAllMaterials) CHECK(parse_material(to_string(m)) == m);
    for (auto s : kAllShapes) CHECK(parse_shape(to_string(s)) == s);
    CHECK_FALSE(parse_color("magenta"));
    CHECK_FALSE(parse_shape("cone"));
}

TEST_CASE("event_identity sorts participants and ignores frames") {
    const Event c{EventKind::Collision, 50, {3, 1}};
    const EventKey k = event_identity(c);
    CHECK(k.kind == EventKind::Collision);
    CHECK(k.ids == std::array<int, 2>{1, 3});

    const EventKey enter = event_identity(Event::enter(2, 10));
    CHECK(enter.kind == EventKind::Enter);
    CHECK(enter.ids[0] == 2);

    CHECK(event_identity(Event::collision(1, 3, 50)) == event_identity(Event::collision(3, 1, 62)));
    CHECK(event_identity(Event::collision(1, 3, std::nullopt)) == event_identity(Event::collision(1, 3, 7)));
}

TEST_CASE("event_identity rejects pseudo-events and malformed events") {
    CHECK_THROWS_AS(event_identity(Event::start()), InputError);
    CHECK_THROWS_AS(event_identity(Event::end()), InputError);
    CHECK_THROWS_AS(event_identity(Event{EventKind::Collision, 4, {2, 2}}), InputError);
    CHECK_THROWS_AS(event_identity(Event{EventKind::Enter, 4, {1, 2}}), InputError);
}

TEST_CASE("event_identity is symmetric in collision participants (property)") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const int a = rng.uniform_int(0, 20);
        int b = rng.uniform_int(0, 20);
        if (a == b) b = a + 1;
        CHECK(event_identity(Event{EventKind::Collision, rng.uniform_int(0, 174), {a, b}}) ==
              event_identity(Event{EventKind::Collision, rng.uniform_int(0, 174), {b, a}}));
    }
}

TEST_CASE("pseudo-events sit at the window edges") {
    CHECK(Event::start().frame == 0);
    CHECK(Event::end().frame == 124);
    CHECK(Event::start().participants.empty());
    CHECK(kTotalFrames == 7 * kFramesPerSecond);
}

TEST_CASE("sort_chronologically is stable and puts hypothetical events last") {
    std::vector<Event> v = {Event::collision(0, 1, std::nullopt), Event::enter(2, 30), Event::exit(1, 10),
                            Event::enter(3, 10)};
    sort_chronologically(v);
    CHECK(v[0] == Event::exit(1, 10));
    CHECK(v[1] == Event::enter(3, 10));
    CHECK(v[2] == Event::enter(2, 30));
    CHECK_FALSE(v[3].frame.has_value());
}

TEST_CASE("rng streams are reproducible and uniform_int stays in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(3);
    std::vector<int> hist(5);
    for (int i = 0; i < 5000; ++i) {
        const int v = r.uniform_int(2, 6);
        REQUIRE(v >= 2);
        REQUIRE(v <= 6);
        ++hist[static_cast<std::size_t>(v - 2)];
    }
    for (int h : hist) CHECK(h == doctest::Approx(1000).epsilon(0.1));
    CHECK(scene_seed(7, 1) != scene_seed(7, 2));
    CHECK(scene_seed(7, 1) == scene_seed(7, 1));
}
