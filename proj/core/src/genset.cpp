#include "comphy/genset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "comphy/error.hpp"
#include "comphy/propgraph.hpp"

namespace comphy {

void GenConfig::validate() const {
    sim.validate();
    if (counts.train < 1 || counts.val < 1 || counts.test < 1)
        throw Error(ErrorKind::Config, "split counts must be at least 1");
    if (max_attempts < 1) throw Error(ErrorKind::Config, "max_attempts must be at least 1");
    if (!(speed_min >= 0.0 && speed_max >= speed_min))
        throw Error(ErrorKind::Config, "invalid initial speed range");
    if (min_objects < 2 || max_objects < min_objects || max_objects > 48)
        throw Error(ErrorKind::Config, "invalid object count range");
    if (!(radius_min > 0.0 && radius_max >= radius_min))
        throw Error(ErrorKind::Config, "invalid radius range");
}

Roster sample_roster(Rng& rng, const GenConfig& cfg) {
    const int n = rng.range(cfg.min_objects, cfg.max_objects);
    std::vector<int> triples(kColors.size() * kShapes.size() * kMaterials.size());
    for (std::size_t i = 0; i < triples.size(); ++i) triples[i] = static_cast<int>(i);
    rng.shuffle(triples);

    Roster r;
    for (int i = 0; i < n; ++i) {
        int t = triples[static_cast<std::size_t>(i)];
        StaticAttrs a;
        a.material = kMaterials[static_cast<std::size_t>(t % 2)];
        t /= 2;
        a.shape = kShapes[static_cast<std::size_t>(t % 3)];
        t /= 3;
        a.color = kColors[static_cast<std::size_t>(t)];
        r.attrs.push_back(a);
        r.radii.push_back(rng.uniform(cfg.radius_min, cfg.radius_max));
    }
    r.props.assign(static_cast<std::size_t>(n), PhysProps{});
    if (rng.bernoulli(cfg.p_heavy)) r.props[rng.below(static_cast<std::uint64_t>(n))].mass = kHeavyMass;
    if (rng.bernoulli(cfg.p_charged)) {
        const auto a = rng.below(static_cast<std::uint64_t>(n));
        auto b = rng.below(static_cast<std::uint64_t>(n - 1));
        if (b >= a) ++b;
        r.props[a].charge = rng.bernoulli(0.5) ? 1 : -1;
        r.props[b].charge = rng.bernoulli(0.5) ? 1 : -1;
    }
    r.graph = PropertyGraph::from_props(r.props);
    return r;
}

namespace {

Vec2 random_direction(Rng& rng) {
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {std::cos(a), std::sin(a)};
}

Vec2 random_velocity(Rng& rng, const GenConfig& cfg) {
    if (rng.bernoulli(cfg.p_at_rest)) return {};
    return random_direction(rng) * rng.uniform(cfg.speed_min, cfg.speed_max);
}

// Velocity sending an object from `from` at the disc at `to`, with a random
// impact offset of up to half the contact distance.
Vec2 aim(Rng& rng, Vec2 from, Vec2 to, double reach, double speed) {
    const Vec2 d = to - from;
    const Vec2 u = d / d.norm();
    const Vec2 perp{-u.y, u.x};
    const Vec2 goal = to + perp * (rng.uniform(-0.5, 0.5) * reach);
    const Vec2 g = goal - from;
    return g / g.norm() * speed;
}

struct Layout {
    std::vector<ObjectState> states;
    std::vector<char> placed;

    explicit Layout(const std::vector<double>& radii) : states(radii.size()), placed(radii.size(), 0) {
        for (std::size_t i = 0; i < radii.size(); ++i) states[i].radius = radii[i];
    }

    bool fits(std::size_t i, Vec2 p) const {
        const double m = states[i].radius + 0.02;
        if (p.x < m || p.y < m || p.x > 1.0 - m || p.y > 1.0 - m) return false;
        for (std::size_t j = 0; j < states.size(); ++j)
            if (placed[j] && j != i &&
                (states[j].position - p).norm() < states[i].radius + states[j].radius + 0.04)
                return false;
        return true;
    }

    void put(std::size_t i, Vec2 p, Vec2 v = {}) {
        states[i].position = p;
        states[i].velocity = v;
        placed[i] = 1;
    }

    bool scatter(Rng& rng, std::size_t i, double lo, double hi) {
        for (int tries = 0; tries < 200; ++tries) {
            const Vec2 p{rng.uniform(lo, hi), rng.uniform(lo, hi)};
            if (fits(i, p)) {
                put(i, p);
                return true;
            }
        }
        return false;
    }

    // Places i and j apart by `gap` beyond contact around a random centre.
    bool place_pair(Rng& rng, std::size_t i, std::size_t j, double gap) {
        const double dist = states[i].radius + states[j].radius + gap;
        for (int tries = 0; tries < 200; ++tries) {
            const Vec2 c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
            const Vec2 u = random_direction(rng);
            const Vec2 pi = c - u * (dist / 2.0);
            const Vec2 pj = c + u * (dist / 2.0);
            if (!fits(i, pi)) continue;
            placed[i] = 1;
            states[i].position = pi;
            if (fits(j, pj)) {
                put(j, pj);
                return true;
            }
            placed[i] = 0;
        }
        return false;
    }
};

struct Attempt {
    VideoSet set;
    std::vector<std::vector<Contact>> contacts;  // per video, target first
};

struct Failure {
    std::string reason;
};

std::vector<ObjectState> strip_velocities(std::vector<ObjectState> frame) {
    for (auto& s : frame) s.velocity = {};
    return frame;
}

Trajectory observable(const Trajectory& traj, std::size_t first, std::size_t last) {
    Trajectory out;
    out.fps = traj.fps;
    for (std::size_t f = first; f < last; ++f) out.frames.push_back(strip_velocities(traj.frames[f]));
    return out;
}

std::vector<ObjectState> target_layout(Rng& rng, const GenConfig& cfg, const Roster& roster) {
    const std::size_t n = roster.attrs.size();
    Layout layout(roster.radii);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    const bool entering = n >= 3 && rng.bernoulli(cfg.p_entering);
    const std::size_t inside = entering ? n - 1 : n;
    for (std::size_t k = 0; k < inside; ++k) {
        if (!layout.scatter(rng, order[k], 0.12, 0.88)) throw Failure{"target placement"};
        layout.states[order[k]].velocity = random_velocity(rng, cfg);
    }

    if (inside >= 2 && rng.bernoulli(cfg.p_target_collision)) {
        const std::size_t i = order[0];
        const std::size_t j = order[1];
        auto& si = layout.states[i];
        const auto& sj = layout.states[j];
        si.velocity = aim(rng, si.position, sj.position, si.radius + sj.radius,
                          rng.uniform(std::max(cfg.speed_min, 0.1), std::max(cfg.speed_max, 0.1)));
    }
    if (inside >= 3 && rng.bernoulli(cfg.p_late_collision)) {
        // A slow approach timed to make contact after the observed window.
        const std::size_t k = order[inside - 2];
        const std::size_t l = order[inside - 1];
        auto& sk = layout.states[k];
        auto& sl = layout.states[l];
        sl.velocity = {};
        const double gap = (sl.position - sk.position).norm() - sk.radius - sl.radius;
        const double t = rng.uniform(5.3, 6.6);
        const double d = cfg.sim.damping;
        const double speed = d > 0.0 ? gap * d / (1.0 - std::exp(-d * t)) : gap / t;
        if (speed <= 0.25) sk.velocity = aim(rng, sk.position, sl.position, 0.0, speed);
    }

    if (entering) {
        const std::size_t e = order[n - 1];
        auto& s = layout.states[e];
        const double out = s.radius + rng.uniform(0.02, 0.15);
        const double along = rng.uniform(0.2, 0.8);
        switch (rng.below(4)) {
            case 0: s.position = {-out, along}; break;
            case 1: s.position = {1.0 + out, along}; break;
            case 2: s.position = {along, -out}; break;
            default: s.position = {along, 1.0 + out}; break;
        }
        const Vec2 goal{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
        const Vec2 g = goal - s.position;
        s.velocity = g / g.norm() * rng.uniform(0.12, 0.2);
        layout.placed[e] = 1;
    }
    return layout.states;
}

struct RefPlan {
    std::vector<int> members;  // roster ids; the first two form the aimed pair
    bool charged_pair = false;
};

std::vector<RefPlan> plan_references(Rng& rng, const Roster& roster) {
    const int n = static_cast<int>(roster.attrs.size());
    std::vector<int> queue(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) queue[static_cast<std::size_t>(i)] = i;
    rng.shuffle(queue);

    auto add_random_member = [&](RefPlan& p) {
        std::vector<int> rest;
        for (int i = 0; i < n; ++i)
            if (std::find(p.members.begin(), p.members.end(), i) == p.members.end()) rest.push_back(i);
        if (!rest.empty()) p.members.push_back(rest[rng.below(rest.size())]);
    };

    std::vector<RefPlan> plans;
    std::vector<int> charged;
    for (int i = 0; i < n; ++i)
        if (roster.props[static_cast<std::size_t>(i)].charge != 0) charged.push_back(i);
    if (charged.size() == 2) {
        RefPlan p;
        p.members = charged;
        p.charged_pair = true;
        if (rng.bernoulli(0.5)) add_random_member(p);
        plans.push_back(std::move(p));
    }
    while (static_cast<int>(plans.size()) < kReferenceCount) {
        RefPlan p;
        const int size = std::min(n, rng.range(2, 3));
        while (static_cast<int>(p.members.size()) < 2 && !queue.empty()) {
            p.members.push_back(queue.back());
            queue.pop_back();
        }
        while (static_cast<int>(p.members.size()) < size) add_random_member(p);
        plans.push_back(std::move(p));
    }
    if (!queue.empty()) throw Failure{"reference coverage"};
    return plans;
}

std::vector<ObjectState> reference_layout(Rng& rng, const GenConfig& cfg, const Roster& roster,
                                          const RefPlan& plan) {
    std::vector<double> radii;
    for (int id : plan.members) radii.push_back(roster.radii[static_cast<std::size_t>(id)]);
    Layout layout(radii);
    if (plan.charged_pair) {
        if (!layout.place_pair(rng, 0, 1, rng.uniform(0.08, 0.22))) throw Failure{"reference placement"};
        for (std::size_t i = 0; i < 2; ++i)
            if (!rng.bernoulli(0.5)) layout.states[i].velocity = random_direction(rng) * rng.uniform(0.0, 0.04);
    } else {
        if (!layout.place_pair(rng, 0, 1, rng.uniform(0.06, 0.22))) throw Failure{"reference placement"};
        auto& a = layout.states[0];
        auto& b = layout.states[1];
        if (!rng.bernoulli(0.5)) b.velocity = random_direction(rng) * rng.uniform(0.0, 0.05);
        a.velocity = aim(rng, a.position, b.position, a.radius + b.radius, rng.uniform(0.12, 0.2)) + b.velocity;
    }
    for (std::size_t k = 2; k < plan.members.size(); ++k) {
        if (!layout.scatter(rng, k, 0.12, 0.88)) throw Failure{"reference placement"};
        layout.states[k].velocity = random_velocity(rng, cfg);
    }
    return layout.states;
}

// Every detected collision matches a simulator contact within two frames and
// every visible contact is detected.
bool collisions_match(const Video& video, const std::vector<Contact>& contacts) {
    const Trajectory& traj = video.trajectory;
    std::vector<const Event*> detected;
    for (const Event& e : video.events)
        if (e.kind == EventKind::Collision) detected.push_back(&e);
    auto same_pair = [](int a, int b, const Event& e) {
        return (e.participants[0] == std::min(a, b)) && (e.participants[1] == std::max(a, b));
    };
    for (const Event* e : detected) {
        bool found = false;
        for (const Contact& c : contacts)
            if (same_pair(c.a, c.b, *e) && std::abs(c.frame - e->frame) <= 2) found = true;
        if (!found) return false;
    }
    for (const Contact& c : contacts) {
        if (c.frame < 2 || static_cast<std::size_t>(c.frame) >= traj.frame_count()) continue;
        const auto f = static_cast<std::size_t>(c.frame);
        const auto a = static_cast<std::size_t>(c.a);
        const auto b = static_cast<std::size_t>(c.b);
        bool visible = true;
        for (std::size_t t = f - 2; t <= f; ++t)
            visible = visible && traj.at(t, a).present && traj.at(t, b).present;
        if (!visible) continue;
        bool found = false;
        for (const Event* e : detected)
            if (same_pair(c.a, c.b, *e) && std::abs(c.frame - e->frame) <= 2) found = true;
        if (!found) {
            // Contacts inside an already detected episode are fine.
            for (const Event* e : detected)
                if (same_pair(c.a, c.b, *e) && c.frame >= e->frame) found = true;
        }
        if (!found) return false;
    }
    return true;
}

Attempt build(Rng& rng, const GenConfig& cfg, const Roster& roster, const std::string& set_id) {
    Attempt out;
    VideoSet& vs = out.set;
    vs.observed.set_id = set_id;
    SetTruth& truth = vs.truth;
    truth.graph = roster.graph;
    truth.props = roster.props;

    const int target_frames = static_cast<int>(std::lround(kTargetSeconds * cfg.sim.record_fps));
    const int extension_frames = static_cast<int>(std::lround(kExtensionSeconds * cfg.sim.record_fps));
    const int reference_frames = static_cast<int>(std::lround(kReferenceSeconds * cfg.sim.record_fps));

    const auto initial = target_layout(rng, cfg, roster);
    const SimulationRecord full =
        simulate_recorded(initial, roster.props, cfg.sim, target_frames + extension_frames);
    Video& target = vs.observed.target;
    target.id = set_id + "/target";
    target.objects = roster.attrs;
    target.trajectory = observable(full.trajectory, 0, static_cast<std::size_t>(target_frames));
    target.events = observable_events(target.trajectory, target.id, cfg.events);
    truth.extension = observable(full.trajectory, static_cast<std::size_t>(target_frames),
                                 full.trajectory.frame_count());
    truth.initial_states.push_back(initial);
    truth.charge_events.push_back(annotate_charge_events(target.trajectory, roster.graph, target.id, cfg.events));
    std::vector<Contact> target_contacts;
    for (const Contact& c : full.contacts)
        if (c.frame < target_frames) target_contacts.push_back(c);
    out.contacts.push_back(std::move(target_contacts));

    const auto plans = plan_references(rng, roster);
    for (std::size_t r = 0; r < plans.size(); ++r) {
        const RefPlan& plan = plans[r];
        std::vector<PhysProps> props;
        std::vector<StaticAttrs> attrs;
        for (int id : plan.members) {
            props.push_back(roster.props[static_cast<std::size_t>(id)]);
            attrs.push_back(roster.attrs[static_cast<std::size_t>(id)]);
        }
        const auto start = reference_layout(rng, cfg, roster, plan);
        const SimulationRecord rec = simulate_recorded(start, props, cfg.sim, reference_frames);
        Video ref;
        ref.id = set_id + "/ref" + std::to_string(r);
        ref.objects = attrs;
        ref.trajectory = observable(rec.trajectory, 0, rec.trajectory.frame_count());
        ref.events = observable_events(ref.trajectory, ref.id, cfg.events);
        truth.charge_events.push_back(
            annotate_charge_events(ref.trajectory, PropertyGraph::from_props(props), ref.id, cfg.events));
        truth.initial_states.push_back(start);
        truth.alignment.push_back(plan.members);
        out.contacts.push_back(rec.contacts);
        vs.observed.references.push_back(std::move(ref));
    }
    return out;
}

std::string generation_check(const Attempt& a, const GenConfig& cfg) {
    if (std::string why = check_set(a.set, cfg); !why.empty()) return why;
    const ObservedSet& obs = a.set.observed;
    if (!collisions_match(obs.target, a.contacts[0])) return "target collision detection";
    for (std::size_t r = 0; r < obs.references.size(); ++r)
        if (!collisions_match(obs.references[r], a.contacts[r + 1])) return "reference collision detection";
    try {
        InferenceParams params;
        params.events = cfg.events;
        if (!infer_properties(obs, params).complete()) return "hidden properties not recoverable";
        const bool charged = std::any_of(a.set.truth.props.begin(), a.set.truth.props.end(),
                                         [](const PhysProps& p) { return p.charge != 0; });
        if (charged && collect_charge_evidence(obs, align_objects(obs), params).empty())
            return "charged pair never seen interacting";
    } catch (const Error&) {
        return "hidden properties not recoverable";
    }
    return {};
}

}  // namespace

std::string check_set(const VideoSet& set, const GenConfig& cfg) {
    const ObservedSet& obs = set.observed;
    const SetTruth& truth = set.truth;
    const std::size_t n = obs.roster().size();
    if (static_cast<int>(n) < cfg.min_objects || static_cast<int>(n) > cfg.max_objects)
        return "target object count";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (obs.roster()[i] == obs.roster()[j]) return "duplicate roster attributes";
    if (truth.props.size() != n || truth.graph.size() != n) return "property count";
    const auto heavy = std::count_if(truth.props.begin(), truth.props.end(),
                                     [](const PhysProps& p) { return p.mass == kHeavyMass; });
    if (heavy > 1) return "more than one heavy object";
    const auto charged = std::count_if(truth.props.begin(), truth.props.end(),
                                       [](const PhysProps& p) { return p.charge != 0; });
    if (charged != 0 && charged != 2) return "charged object count";
    if (obs.references.size() != static_cast<std::size_t>(kReferenceCount)) return "reference count";
    if (truth.alignment.size() != obs.references.size()) return "alignment size";
    std::vector<char> covered(n, 0);
    for (std::size_t r = 0; r < obs.references.size(); ++r) {
        const Video& ref = obs.references[r];
        if (ref.objects.size() < 2 || ref.objects.size() > 3) return "reference object count";
        if (truth.alignment[r].size() != ref.objects.size()) return "alignment size";
        for (std::size_t k = 0; k < ref.objects.size(); ++k) {
            const int id = truth.alignment[r][k];
            if (id < 0 || static_cast<std::size_t>(id) >= n || obs.roster()[static_cast<std::size_t>(id)] != ref.objects[k])
                return "alignment mismatch";
            covered[static_cast<std::size_t>(id)] = 1;
        }
        bool interaction = !truth.charge_events.at(r + 1).empty();
        for (const Event& e : ref.events) interaction = interaction || e.kind == EventKind::Collision;
        if (!interaction) return "reference without interaction";
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) return "roster coverage";
    const int extension_frames = static_cast<int>(std::lround(kExtensionSeconds * cfg.sim.record_fps));
    if (truth.extension.frame_count() != static_cast<std::size_t>(extension_frames)) return "extension length";
    return {};
}

VideoSet generate_set(Rng& rng, const GenConfig& cfg, const std::string& set_id) {
    const Roster roster = sample_roster(rng, cfg);
    std::string reason = "no attempt";
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        try {
            Attempt a = build(rng, cfg, roster, set_id);
            reason = generation_check(a, cfg);
            if (reason.empty()) return std::move(a.set);
        } catch (const Failure& f) {
            reason = f.reason;
        }
    }
    throw Error(ErrorKind::GenerationFailed,
                set_id + ": " + reason + " after " + std::to_string(cfg.max_attempts) + " attempts");
}

bool certify_informative(const VideoSet& set, Need need, std::span<const int> relevant) {
    if (need == Need::None) return true;
    const ObservedSet& obs = set.observed;
    const SetTruth& truth = set.truth;
    const std::size_t n = obs.roster().size();

    std::vector<char> collided(n, 0);
    std::vector<char> interacted(n, 0);
    std::vector<std::pair<int, int>> pairs;
    auto visit = [&](const Video& v, const std::vector<Event>& charge_events, auto&& id_of) {
        for (const Event& e : v.events)
            if (e.kind == EventKind::Collision)
                for (int p : e.participants) collided[static_cast<std::size_t>(id_of(p))] = 1;
        for (const Event& e : charge_events) {
            const int a = id_of(e.participants[0]);
            const int b = id_of(e.participants[1]);
            interacted[static_cast<std::size_t>(a)] = interacted[static_cast<std::size_t>(b)] = 1;
            pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    };
    visit(obs.target, truth.charge_events.at(0), [](int p) { return p; });
    for (std::size_t r = 0; r < obs.references.size(); ++r)
        visit(obs.references[r], truth.charge_events.at(r + 1),
              [&](int p) { return truth.alignment[r][static_cast<std::size_t>(p)]; });

    bool any_charged = false;
    for (const auto& p : truth.props) any_charged = any_charged || p.charge != 0;

    auto charge_certified = [&](int o) {
        if (truth.props[static_cast<std::size_t>(o)].charge != 0) return interacted[static_cast<std::size_t>(o)] != 0;
        return !any_charged || !pairs.empty();
    };

    switch (need) {
        case Need::None: return true;
        case Need::Mass:
            for (int o : relevant)
                if (!collided[static_cast<std::size_t>(o)]) return false;
            return true;
        case Need::Charge:
            for (int o : relevant)
                if (!charge_certified(o)) return false;
            return true;
        case Need::Relation: {
            if (relevant.size() != 2) return false;
            const int a = std::min(relevant[0], relevant[1]);
            const int b = std::max(relevant[0], relevant[1]);
            if (truth.props[static_cast<std::size_t>(a)].charge != 0 && truth.props[static_cast<std::size_t>(b)].charge != 0)
                return std::find(pairs.begin(), pairs.end(), std::make_pair(a, b)) != pairs.end();
            return charge_certified(a) && charge_certified(b);
        }
    }
    return false;
}

}  // namespace comphy
