#include <doctest.h>

#include <cmath>
#include <functional>

#include "comphy/error.hpp"
#include "comphy/events.hpp"
#include "generators.hpp"

using namespace comphy;

namespace {

ObjectState disc(double x, double y, double vx = 0.0, double vy = 0.0) {
    ObjectState s;
    s.position = {x, y};
    s.velocity = {vx, vy};
    s.radius = 0.04;
    return s;
}

/// Two discs on a horizontal line, object 0 fixed at x = 0.3, object 1 at
/// 0.3 + gap(t).
Trajectory pair_by_gap(int frames, const std::function<double(int)>& gap) {
    Trajectory t;
    for (int f = 0; f < frames; ++f) t.frames.push_back({disc(0.3, 0.5), disc(0.3 + gap(f), 0.5)});
    return t;
}

Trajectory single(int frames, const std::function<bool(int)>& present) {
    Trajectory t;
    for (int f = 0; f < frames; ++f) {
        ObjectState s = disc(0.5, 0.5);
        s.present = present(f);
        t.frames.push_back({s});
    }
    return t;
}

PropertyGraph signed_graph(std::vector<int> signs) {
    std::vector<PhysProps> props;
    for (int s : signs) props.push_back({1.0, s});
    return PropertyGraph::from_props(props);
}

}  // namespace

TEST_CASE("event kind names round trip") {
    for (auto k : {EventKind::In, EventKind::Out, EventKind::Collision, EventKind::Attraction, EventKind::Repulsion})
        CHECK(parse_event_kind(to_string(k)) == k);
    CHECK_FALSE(parse_event_kind("explosion"));
}

TEST_CASE("in and out events") {
    SUBCASE("entering at frame 10") {
        const auto e = detect_in_out(single(125, [](int f) { return f >= 10; }), "v");
        REQUIRE(e.size() == 1);
        CHECK(e[0].kind == EventKind::In);
        CHECK(e[0].frame == 10);
        CHECK(e[0].participants == std::vector<int>{0});
        CHECK(e[0].video_id == "v");
    }
    SUBCASE("always present") { CHECK(detect_in_out(single(125, [](int) { return true; })).empty()); }
    SUBCASE("leaving at frame 60") {
        const auto e = detect_in_out(single(125, [](int f) { return f < 60; }));
        REQUIRE(e.size() == 1);
        CHECK(e[0].kind == EventKind::Out);
        CHECK(e[0].frame == 60);
    }
}

TEST_CASE("collision detection") {
    SUBCASE("simulated head-on pair: one event at the contact frame") {
        const SimConfig cfg;
        const std::vector<PhysProps> p{{1.0, 0}, {1.0, 0}};
        const auto rec = simulate_recorded(std::vector<ObjectState>{disc(0.2, 0.5, 0.15), disc(0.8, 0.5, -0.15)}, p,
                                           cfg, 125);
        REQUIRE(rec.contacts.size() == 1);
        const auto e = detect_collisions(rec.trajectory);
        REQUIRE(e.size() == 1);
        CHECK(e[0].kind == EventKind::Collision);
        CHECK(e[0].participants == std::vector<int>{0, 1});
        CHECK(e[0].frame == rec.contacts[0].frame);
    }
    SUBCASE("never within contact distance") {
        CHECK(detect_collisions(pair_by_gap(60, [](int f) { return 0.5 - 0.002 * f; })).empty());
    }
    SUBCASE("touch, separate for five frames, touch again: two episodes") {
        auto gap = [](int f) {
            if (f <= 10) return 0.2 - 0.012 * f;  // contact at 10
            if (f <= 15) return 0.08 + 0.01 * (f - 10);
            return std::max(0.13 - 0.01 * (f - 15), 0.08);  // back in contact at 20
        };
        const auto e = detect_collisions(pair_by_gap(40, gap));
        REQUIRE(e.size() == 2);
        CHECK(e[0].frame == 10);
        CHECK(e[1].frame == 20);
    }
    SUBCASE("a grazing pass between frames still counts") {
        Trajectory t;
        for (int f = 0; f < 20; ++f) t.frames.push_back({disc(0.5, 0.5), disc(0.3 + 0.05 * f, 0.5 + 0.079)});
        CHECK(detect_collisions(t).size() == 1);
    }
}

TEST_CASE("charge annotation") {
    const auto approach = pair_by_gap(60, [](int f) { return 0.605 - 0.01 * f; });
    SUBCASE("opposite signs within the interaction radius attract") {
        const auto e = annotate_charge_events(approach, signed_graph({1, -1}));
        REQUIRE(e.size() == 1);
        CHECK(e[0].kind == EventKind::Attraction);
        CHECK(e[0].frame == 21);  // first gap below 0.4
    }
    SUBCASE("like signs repel") {
        const auto e = annotate_charge_events(approach, signed_graph({-1, -1}));
        REQUIRE(e.size() == 1);
        CHECK(e[0].kind == EventKind::Repulsion);
    }
    SUBCASE("an uncharged partner yields nothing") {
        CHECK(annotate_charge_events(approach, signed_graph({1, 0})).empty());
    }
    SUBCASE("relations without signs are rejected") {
        PropertyGraph g = signed_graph({1, -1});
        g.signs.reset();
        CHECK_THROWS_AS(annotate_charge_events(approach, g), Error);
    }
}

TEST_CASE("kinematic interaction detector") {
    const SimConfig cfg;
    EventParams params;
    params.damping = cfg.damping;
    SUBCASE("opposite charges are detected as attracting") {
        const auto t = simulate(std::vector<ObjectState>{disc(0.3, 0.45, 0, 0.05), disc(0.6, 0.55, 0, -0.05)},
                                std::vector<PhysProps>{{1.0, 1}, {1.0, -1}}, cfg, 2.0);
        const auto found = detect_interactions_kinematic(t, params);
        REQUIRE_FALSE(found.empty());
        CHECK(found[0].polarity == Polarity::Attract);
        CHECK(found[0].confidence >= 0.5);
    }
    SUBCASE("like charges passing within 0.3 repel") {
        const auto t = simulate(std::vector<ObjectState>{disc(0.2, 0.4, 0.15, 0), disc(0.8, 0.6, -0.15, 0)},
                                std::vector<PhysProps>{{1.0, 1}, {1.0, 1}}, cfg, 4.0);
        const auto found = detect_interactions_kinematic(t, params);
        REQUIRE_FALSE(found.empty());
        for (const auto& i : found) CHECK(i.polarity == Polarity::Repel);
    }
    SUBCASE("property: uncharged free motion is silent") {
        gen::Source src(21);
        for (int trial = 0; trial < 30; ++trial) {
            const int n = src.integer(2, 4);
            auto p = gen::props(src, n);
            for (auto& q : p) q.charge = 0;
            const auto t = simulate(gen::discs(src, n, 0.2), p, cfg, 5.0);
            CHECK(detect_interactions_kinematic(t, params).empty());
        }
    }
}

TEST_CASE("observable events are merged in frame order") {
    Trajectory t = pair_by_gap(40, [](int f) { return 0.3 - 0.02 * f; });
    for (int f = 0; f < 5; ++f) t.frames[static_cast<std::size_t>(f)][1].present = false;
    const auto e = observable_events(t);
    REQUIRE(e.size() == 2);
    CHECK(e[0].kind == EventKind::In);
    CHECK(e[1].kind == EventKind::Collision);
    for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k - 1].frame <= e[k].frame);
}

TEST_CASE("finite-difference velocity") {
    const auto t = pair_by_gap(10, [](int f) { return 0.2 + 0.004 * f; });
    CHECK(estimate_velocity(t, 5, 1).x == doctest::Approx(0.1));
    CHECK(estimate_velocity(t, 0, 1).x == doctest::Approx(0.1));
    CHECK(estimate_velocity(t, 9, 1).x == doctest::Approx(0.1));
}
