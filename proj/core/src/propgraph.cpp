#include "comphy/propgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "comphy/error.hpp"
#include "comphy/parallel.hpp"

namespace comphy {

Alignment align_objects(const ObservedSet& set) {
    const auto& roster = set.roster();
    Alignment out;
    out.reserve(set.references.size());
    for (std::size_t r = 0; r < set.references.size(); ++r) {
        const Video& ref = set.references[r];
        std::vector<int> columns;
        std::vector<char> used(roster.size(), 0);
        for (const StaticAttrs& attrs : ref.objects) {
            auto it = std::find(roster.begin(), roster.end(), attrs);
            if (it == roster.end())
                throw Error(ErrorKind::AlignmentFailure,
                            "reference " + std::to_string(r) + " object (" +
                                std::string(to_string(attrs.color)) + ", " +
                                std::string(to_string(attrs.shape)) + ", " +
                                std::string(to_string(attrs.material)) + ") not in target");
            const auto id = static_cast<std::size_t>(it - roster.begin());
            if (used[id])
                throw Error(ErrorKind::AlignmentFailure,
                            "reference " + std::to_string(r) + " repeats a roster object");
            used[id] = 1;
            columns.push_back(static_cast<int>(id));
        }
        out.push_back(std::move(columns));
    }
    return out;
}

namespace {

template <typename Fn>
void for_each_video(const ObservedSet& set, const Alignment& align, Fn&& fn) {
    std::vector<int> identity(set.target.objects.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<int>(i);
    fn(set.target, identity, 0);
    for (std::size_t r = 0; r < set.references.size(); ++r)
        fn(set.references[r], align.at(r), static_cast<int>(r + 1));
}

}  // namespace

std::vector<ChargeEvidence> collect_charge_evidence(const ObservedSet& set, const Alignment& align,
                                                    const InferenceParams& params) {
    std::vector<ChargeEvidence> out;
    for_each_video(set, align, [&](const Video& v, const std::vector<int>& ids, int video) {
        for (const Interaction& it : detect_interactions_kinematic(v.trajectory, params.events)) {
            int a = ids[static_cast<std::size_t>(it.a)];
            int b = ids[static_cast<std::size_t>(it.b)];
            if (a > b) std::swap(a, b);
            out.push_back({a, b,
                           it.polarity == Polarity::Attract ? Relation::Opposite : Relation::Same,
                           video, it.frame});
        }
    });
    return out;
}

std::optional<double> collision_mass_ratio(const Trajectory& traj, int a, int b, int frame,
                                           const EventParams& params) {
    const auto frames = static_cast<int>(traj.frame_count());
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    auto dist = [&](int t) {
        return (traj.at(static_cast<std::size_t>(t), ub).position -
                traj.at(static_cast<std::size_t>(t), ua).position)
            .norm();
    };
    // Impact lies in (k-1, k+1) where the separation turns from shrinking to growing.
    int impact = -1;
    for (int k = std::max(2, frame - 1); k <= frame + 3 && k + 2 < frames; ++k) {
        if (dist(k) - dist(k - 1) < 0.0 && dist(k + 1) - dist(k) >= 0.0) {
            impact = k;
            break;
        }
    }
    if (impact < 0) return std::nullopt;
    const int lo = impact - 2;
    const int hi = impact + 2;
    for (int t = lo; t <= hi; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        if (!traj.at(ut, ua).present || !traj.at(ut, ub).present) return std::nullopt;
    }
    // Any third object near either participant spoils the two-body exchange.
    const std::size_t n = traj.object_count();
    for (int t = std::max(0, impact - 3); t <= std::min(frames - 1, impact + 3); ++t) {
        const auto ut = static_cast<std::size_t>(t);
        for (std::size_t m = 0; m < n; ++m) {
            if (m == ua || m == ub) continue;
            for (std::size_t p : {ua, ub}) {
                const auto& sp = traj.at(ut, p);
                const auto& sm = traj.at(ut, m);
                if ((sp.position - sm.position).norm() <= sp.radius + sm.radius + params.contact_guard)
                    return std::nullopt;
            }
        }
    }
    const double fps = traj.fps;
    const double span = 3.0 / fps;
    auto delta_v = [&](std::size_t o) {
        auto pos = [&](int t) { return traj.at(static_cast<std::size_t>(t), o).position; };
        const Vec2 before = (pos(impact - 1) - pos(impact - 2)) * fps;
        const Vec2 after = (pos(impact + 2) - pos(impact + 1)) * fps;
        // Undo the known friction acting over the stencil.
        return (after - before) + (before + after) * (0.5 * params.damping * span);
    };
    const double dva = delta_v(ua).norm();
    const double dvb = delta_v(ub).norm();
    if (dva + dvb < 0.02 || dvb < 1e-9 || dva < 1e-9) return std::nullopt;
    return dva / dvb;
}

std::vector<MassEvidence> collect_mass_evidence(const ObservedSet& set, const Alignment& align,
                                                const InferenceParams& params) {
    std::vector<MassEvidence> out;
    for_each_video(set, align, [&](const Video& v, const std::vector<int>& ids, int video) {
        for (const Event& e : detect_collisions(v.trajectory, v.id, params.events)) {
            const int ca = e.participants[0];
            const int cb = e.participants[1];
            auto ratio = collision_mass_ratio(v.trajectory, ca, cb, e.frame, params.events);
            if (!ratio) continue;
            out.push_back({ids[static_cast<std::size_t>(ca)], ids[static_cast<std::size_t>(cb)],
                           *ratio, video, e.frame});
        }
    });
    return out;
}

namespace {

bool charged_relation(Relation r) { return r == Relation::Same || r == Relation::Opposite; }

void assign_relation(PropertyGraph& g, std::size_t a, std::size_t b, Relation r) {
    const Relation cur = g.relation(a, b);
    if (cur == Relation::Unknown) {
        g.set_relation(a, b, r);
    } else if (cur != r) {
        throw Error(ErrorKind::InconsistentEvidence,
                    "objects " + std::to_string(a) + " and " + std::to_string(b) + " observed as both " +
                        std::string(to_string(cur)) + " and " + std::string(to_string(r)));
    }
}

}  // namespace

PropertyGraph infer_charge_edges(std::size_t objects, const std::vector<ChargeEvidence>& evidence,
                                 const InferenceParams& params) {
    PropertyGraph g(objects);
    for (const auto& e : evidence) {
        if (e.a == e.b || !charged_relation(e.relation))
            throw Error(ErrorKind::Data, "malformed charge evidence");
        assign_relation(g, static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b), e.relation);
    }

    // same∘same = same, opposite∘opposite = same, mixed = opposite.
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t a = 0; a < objects; ++a)
            for (std::size_t b = 0; b < objects; ++b) {
                if (b == a || !charged_relation(g.relation(a, b))) continue;
                for (std::size_t c = a + 1; c < objects; ++c) {
                    if (c == b || !charged_relation(g.relation(b, c))) continue;
                    const Relation derived =
                        g.relation(a, b) == g.relation(b, c) ? Relation::Same : Relation::Opposite;
                    if (g.relation(a, c) == Relation::Unknown) changed = true;
                    assign_relation(g, a, c, derived);
                }
            }
    }

    std::vector<char> charged(objects, 0);
    bool any_charged = false;
    for (std::size_t i = 0; i < objects; ++i)
        for (std::size_t j = i + 1; j < objects; ++j)
            if (charged_relation(g.relation(i, j))) charged[i] = charged[j] = 1, any_charged = true;

    if (any_charged || (params.charges_exhibited && evidence.empty())) {
        for (std::size_t i = 0; i < objects; ++i)
            for (std::size_t j = i + 1; j < objects; ++j)
                if (!charged[i] || !charged[j]) g.set_relation(i, j, Relation::None);
    }
    return g;
}

std::vector<MassLabel> infer_mass(std::size_t objects, const std::vector<MassEvidence>& evidence,
                                  const InferenceParams& params) {
    std::vector<MassLabel> labels(objects, MassLabel::Unknown);
    auto assign = [&](int id, MassLabel m) {
        auto& cur = labels[static_cast<std::size_t>(id)];
        if (cur == MassLabel::Unknown) cur = m;
        else if (cur != m)
            throw Error(ErrorKind::InconsistentEvidence,
                        "object " + std::to_string(id) + " observed as both heavy and light");
    };
    for (const auto& e : evidence) {
        if (e.ratio >= params.heavy_ratio) {
            assign(e.a, MassLabel::Light);
            assign(e.b, MassLabel::Heavy);
        } else if (e.ratio <= 1.0 / params.heavy_ratio) {
            assign(e.a, MassLabel::Heavy);
            assign(e.b, MassLabel::Light);
        } else {
            // Equal classes; two heavy objects cannot share a set.
            assign(e.a, MassLabel::Light);
            assign(e.b, MassLabel::Light);
        }
    }
    const auto heavies = std::count(labels.begin(), labels.end(), MassLabel::Heavy);
    if (heavies > 1) throw Error(ErrorKind::InconsistentEvidence, "more than one heavy object");
    if (heavies == 1)
        for (auto& m : labels)
            if (m == MassLabel::Unknown) m = MassLabel::Light;
    return labels;
}

PropertyGraph infer_properties(const ObservedSet& set, const InferenceParams& params) {
    const Alignment align = align_objects(set);
    const std::size_t n = set.roster().size();
    PropertyGraph g = infer_charge_edges(n, collect_charge_evidence(set, align, params), params);
    g.mass = infer_mass(n, collect_mass_evidence(set, align, params), params);
    return g;
}

double simulation_error(const ObservedSet& set, const Alignment& align,
                        const std::vector<PhysProps>& props, const SimConfig& cfg) {
    double total = 0.0;
    for_each_video(set, align, [&](const Video& v, const std::vector<int>& ids, int) {
        const Trajectory& traj = v.trajectory;
        if (traj.frame_count() < 2) return;
        std::vector<PhysProps> local;
        local.reserve(ids.size());
        for (int id : ids) local.push_back(props[static_cast<std::size_t>(id)]);
        const auto init = reconstruct_state(traj, 0, local, cfg);
        const auto sim =
            simulate_recorded(init, local, cfg, static_cast<int>(traj.frame_count())).trajectory;
        for (std::size_t t = 0; t < traj.frame_count(); ++t)
            for (std::size_t o = 0; o < ids.size(); ++o)
                total += (sim.at(t, o).position - traj.at(t, o).position).norm2();
    });
    return total;
}

namespace {

struct Assignment {
    std::vector<PhysProps> props;
    int charged = 0;
    int heavy = 0;

    // Lexicographic key: masses, then charges.
    std::vector<double> key() const {
        std::vector<double> k;
        for (const auto& p : props) k.push_back(p.mass);
        for (const auto& p : props) k.push_back(p.charge);
        return k;
    }
};

std::vector<Assignment> enumerate_assignments(std::size_t n) {
    std::vector<std::vector<double>> masses;
    masses.emplace_back(n, kLightMass);
    for (std::size_t h = 0; h < n; ++h) {
        masses.emplace_back(n, kLightMass);
        masses.back()[h] = kHeavyMass;
    }
    std::vector<std::vector<int>> charges;
    charges.emplace_back(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (int si : {-1, 1})
                for (int sj : {-1, 1}) {
                    std::vector<int> c(n, 0);
                    c[i] = si;
                    c[j] = sj;
                    charges.push_back(std::move(c));
                }
    std::vector<Assignment> out;
    for (const auto& m : masses)
        for (const auto& c : charges) {
            Assignment a;
            for (std::size_t i = 0; i < n; ++i) {
                a.props.push_back({m[i], c[i]});
                if (c[i] != 0) ++a.charged;
                if (m[i] == kHeavyMass) ++a.heavy;
            }
            out.push_back(std::move(a));
        }
    return out;
}

}  // namespace

FitResult fit_by_simulation(const ObservedSet& set, const SimConfig& cfg,
                            const FitOptions& options) {
    const std::size_t n = set.roster().size();
    if (n > options.max_objects)
        throw Error(ErrorKind::SearchSpaceExceeded,
                    std::to_string(n) + " objects exceed the limit of " +
                        std::to_string(options.max_objects));
    const Alignment align = align_objects(set);
    const auto candidates = enumerate_assignments(n);
    std::vector<double> scores(candidates.size());
    parallel_for(
        candidates.size(),
        [&](std::size_t i) { scores[i] = simulation_error(set, align, candidates[i].props, cfg); },
        options.threads);

    // Deterministic reduction: minimum score, then the tie-break order.
    const double best_score = *std::min_element(scores.begin(), scores.end());
    const double tol = 1e-20 + 1e-9 * best_score;
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (scores[i] > best_score + tol) continue;
        if (best == candidates.size()) {
            best = i;
            continue;
        }
        const auto& c = candidates[i];
        const auto& b = candidates[best];
        if (std::make_tuple(c.charged, c.heavy, c.key()) < std::make_tuple(b.charged, b.heavy, b.key()))
            best = i;
    }
    FitResult result;
    result.props = candidates[best].props;
    result.graph = PropertyGraph::from_props(result.props);
    result.score = scores[best];
    result.evaluated = candidates.size();
    return result;
}

}  // namespace comphy
