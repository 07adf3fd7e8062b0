#include <doctest.h>

#include <algorithm>
#include <set>

#include "comphy/error.hpp"
#include "comphy/genset.hpp"
#include "comphy/rng.hpp"
#include "comphy/serialization.hpp"

using namespace comphy;

namespace {

int count_heavy(const std::vector<PhysProps>& p) {
    return static_cast<int>(std::count_if(p.begin(), p.end(), [](const PhysProps& x) { return x.mass == kHeavyMass; }));
}

int count_charged(const std::vector<PhysProps>& p) {
    return static_cast<int>(std::count_if(p.begin(), p.end(), [](const PhysProps& x) { return x.charge != 0; }));
}

/// Structural requirements of a set, checked without the library's own checker.
std::string violation(const VideoSet& s) {
    const auto& obs = s.observed;
    const std::size_t n = obs.target.objects.size();
    if (n < 3 || n > 5) return "target size";
    if (obs.target.trajectory.frame_count() != 125) return "target length";
    if (obs.references.size() != 4) return "reference count";
    if (count_heavy(s.truth.props) > 1) return "heavy count";
    const int charged = count_charged(s.truth.props);
    if (charged != 0 && charged != 2) return "charged count";
    std::set<int> covered;
    for (std::size_t r = 0; r < obs.references.size(); ++r) {
        const Video& v = obs.references[r];
        if (v.objects.size() < 2 || v.objects.size() > 3) return "reference size";
        if (v.trajectory.frame_count() != 50) return "reference length";
        bool interaction = !s.truth.charge_events[r + 1].empty();
        for (const auto& e : v.events) interaction = interaction || e.kind == EventKind::Collision;
        if (!interaction) return "reference interaction";
        for (std::size_t k = 0; k < v.objects.size(); ++k) {
            const auto it = std::find(obs.target.objects.begin(), obs.target.objects.end(), v.objects[k]);
            if (it == obs.target.objects.end()) return "reference object not in roster";
            covered.insert(static_cast<int>(it - obs.target.objects.begin()));
        }
    }
    if (covered.size() != n) return "roster coverage";
    for (const auto& frame : obs.target.trajectory.frames)
        for (const auto& o : frame)
            if (o.velocity.x != 0.0 || o.velocity.y != 0.0) return "velocity leaked into the observable record";
    return {};
}

std::string serialized(const VideoSet& s) {
    return observed_line(s.observed, {}).dump() + truth_line(s.observed.set_id, s.truth, {}).dump();
}

}  // namespace

TEST_CASE("pinned generator streams") {
    Rng rng(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next();
    CHECK(v == 9981545732273789042ULL);
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    Rng a(3);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(a.below(7) < 7);
    }
}

TEST_CASE("property: rosters respect the population constraints") {
    GenConfig cfg;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed);
        const Roster r = sample_roster(rng, cfg);
        CHECK(r.attrs.size() >= 3);
        CHECK(r.attrs.size() <= 5);
        CHECK(count_heavy(r.props) <= 1);
        const int charged = count_charged(r.props);
        CHECK((charged == 0 || charged == 2));
        for (std::size_t i = 0; i < r.attrs.size(); ++i)
            for (std::size_t j = i + 1; j < r.attrs.size(); ++j) CHECK_FALSE(r.attrs[i] == r.attrs[j]);
        Rng again(seed);
        const Roster r2 = sample_roster(again, cfg);
        CHECK(r2.attrs == r.attrs);
        CHECK(r2.props == r.props);
    }
}

TEST_CASE("generated sets from seed 42") {
    GenConfig cfg;
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        const VideoSet s = generate_set(rng, cfg, "s" + std::to_string(i));
        CHECK(violation(s) == "");
        CHECK(check_set(s, cfg) == "");
    }
}

TEST_CASE("the extension continues the target bit for bit") {
    GenConfig cfg;
    Rng rng(43);
    for (int i = 0; i < 10; ++i) {
        const VideoSet s = generate_set(rng, cfg, "e");
        const Trajectory full = simulate(s.truth.initial_states[0], s.truth.props, cfg.sim, 7.0);
        REQUIRE(full.frame_count() == 175);
        for (std::size_t f = 0; f < 125; ++f)
            for (std::size_t o = 0; o < full.object_count(); ++o) {
                CHECK(full.at(f, o).position == s.observed.target.trajectory.at(f, o).position);
                CHECK(full.at(f, o).present == s.observed.target.trajectory.at(f, o).present);
            }
        for (std::size_t f = 0; f < 50; ++f)
            for (std::size_t o = 0; o < full.object_count(); ++o)
                CHECK(full.at(125 + f, o).position == s.truth.extension.at(f, o).position);
    }
}

TEST_CASE("same seed, same bytes") {
    GenConfig cfg;
    Rng a(44), b(44);
    for (int i = 0; i < 5; ++i) CHECK(serialized(generate_set(a, cfg, "x")) == serialized(generate_set(b, cfg, "x")));
}

TEST_CASE("a reference without any interaction is rejected") {
    GenConfig cfg;
    Rng rng(45);
    VideoSet s = generate_set(rng, cfg, "r");
    s.observed.references[0].events.clear();
    s.truth.charge_events[1].clear();
    CHECK(check_set(s, cfg) == "reference without interaction");
}

TEST_CASE("informativeness certificates") {
    GenConfig cfg;
    Rng rng(46);
    bool saw_mass = false, saw_relation = false;
    for (int i = 0; i < 60 && !(saw_mass && saw_relation); ++i) {
        VideoSet s = generate_set(rng, cfg, "c");
        for (std::size_t r = 0; r < s.observed.references.size() && !saw_mass; ++r)
            for (const auto& e : s.observed.references[r].events)
                if (e.kind == EventKind::Collision) {
                    const int a = s.truth.alignment[r][static_cast<std::size_t>(e.participants[0])];
                    const int b = s.truth.alignment[r][static_cast<std::size_t>(e.participants[1])];
                    const std::vector<int> pair{a, b};
                    CHECK(certify_informative(s, Need::Mass, pair));
                    saw_mass = true;
                    break;
                }
        std::vector<int> charged;
        for (std::size_t o = 0; o < s.truth.props.size(); ++o)
            if (s.truth.props[o].charge != 0) charged.push_back(static_cast<int>(o));
        if (charged.size() == 2 && !saw_relation) {
            for (auto& v : s.truth.charge_events) v.clear();
            CHECK_FALSE(certify_informative(s, Need::Relation, charged));
            CHECK_FALSE(certify_informative(s, Need::Charge, std::vector<int>{charged[0]}));
            saw_relation = true;
        }
    }
    CHECK(saw_mass);
    CHECK(saw_relation);
}

TEST_CASE("configuration errors") {
    GenConfig cfg;
    cfg.min_objects = 6;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = GenConfig{};
    cfg.speed_min = 0.3;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
