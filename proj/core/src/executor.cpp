#include "comphy/executor.hpp"

#include <algorithm>
#include <cmath>

#include "comphy/error.hpp"

namespace comphy {

std::string_view to_string(ExecMode m) {
    return m == ExecMode::Crisp ? "crisp" : "soft";
}

// ---------------------------------------------------------------------------
// Back-ends

Trajectory ExactBackend::counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const {
    const auto factual = props_from_graph(ctx.graph);
    const auto props = props_from_graph(graph);
    const auto start = reconstruct_state(ctx.target, 0, factual, cfg_);
    return simulate_recorded(start, props, cfg_, static_cast<int>(ctx.target.frame_count())).trajectory;
}

Trajectory ExactBackend::future(const ExecContext& ctx, int horizon) const {
    const std::size_t t = ctx.target.frame_count();
    if (t < 2) throw Error(ErrorKind::Data, "target too short for prediction");
    const auto props = props_from_graph(ctx.graph);
    const auto start = reconstruct_state(ctx.target, t - 2, props, cfg_);
    Trajectory run = simulate_recorded(start, props, cfg_, horizon + 2).trajectory;
    run.frames.erase(run.frames.begin(), run.frames.begin() + 2);
    return run;
}

Trajectory OracleBackend::counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const {
    const auto props = props_from_graph(graph);
    return simulate_recorded(initial_, props, cfg_, static_cast<int>(ctx.target.frame_count())).trajectory;
}

Trajectory OracleBackend::future(const ExecContext&, int horizon) const {
    Trajectory out = extension_;
    if (static_cast<int>(out.frames.size()) > horizon) out.frames.resize(static_cast<std::size_t>(horizon));
    return out;
}

ExecContext make_context(const ObservedSet& set, PropertyGraph graph,
                         std::shared_ptr<const DynamicsBackend> backend) {
    ExecContext ctx;
    ctx.roster = set.roster();
    ctx.target = set.target.trajectory;
    ctx.events = set.target.events;
    ctx.graph = std::move(graph);
    ctx.backend = std::move(backend);
    return ctx;
}

std::vector<bool> moving_objects(const Trajectory& traj, double threshold, int frame) {
    const std::size_t n = traj.object_count();
    std::vector<bool> moving(n, false);
    const std::size_t frames = traj.frame_count();
    if (frames < 2) return moving;
    std::size_t lo = 0;
    std::size_t hi = frames;
    if (frame >= 0) {
        lo = std::min(static_cast<std::size_t>(frame), frames - 1);
        hi = lo + 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = lo; f < hi && !moving[i]; ++f)
            if (traj.at(f, i).present && estimate_velocity(traj, f, i).norm() > threshold) moving[i] = true;
    return moving;
}

std::vector<Event> future_events(const Trajectory& past, const Trajectory& future,
                                 const EventParams& params) {
    Trajectory joined = past;
    joined.frames.insert(joined.frames.end(), future.frames.begin(), future.frames.end());
    const int start = static_cast<int>(past.frame_count());
    std::vector<Event> out;
    for (auto& e : observable_events(joined, {}, params))
        if (e.frame >= start) out.push_back(std::move(e));
    return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct Machine {
    const ExecContext& ctx;
    ExecMode mode;

    bool crisp() const { return mode == ExecMode::Crisp; }

    std::size_t size() const { return ctx.roster.size(); }

    Value object_set(std::vector<double> scores) const {
        Value v;
        v.sort = Sort::ObjectSet;
        v.object_scores = std::move(scores);
        return v;
    }

    Value event_set(std::vector<Event> events) const {
        Value v;
        v.sort = Sort::EventSet;
        v.event_scores.assign(events.size(), 1.0);
        v.events = std::move(events);
        return v;
    }

    Value boolean(double truth) const {
        Value v;
        v.sort = Sort::Boolean;
        v.truth = truth;
        return v;
    }

    Value token(std::string t) const {
        Value v;
        v.sort = Sort::Token;
        v.token = std::move(t);
        return v;
    }

    Value branch_object(const Op& op) const {
        Value b = run(op.branch, Value{});
        if (b.sort != Sort::Object) throw Error(ErrorKind::TypeMismatch, "branch is not an object");
        return b;
    }

    // Multiplies every member's score by score(i); in crisp mode the
    // concept is consulted only for current members.
    template <typename Score>
    Value filter(Value in, Score&& score) const {
        for (std::size_t i = 0; i < in.object_scores.size(); ++i) {
            double& s = in.object_scores[i];
            if (s == 0.0) continue;
            s *= score(i);
        }
        return in;
    }

    double mass_score(std::size_t i, bool heavy) const {
        if (crisp()) {
            const MassLabel m = ctx.graph.mass[i];
            if (m == MassLabel::Unknown)
                throw Error(ErrorKind::InsufficientEvidence, "mass of object " + std::to_string(i) + " unknown");
            return (m == MassLabel::Heavy) == heavy ? 1.0 : 0.0;
        }
        const double h = ctx.graph.heavy_score(i);
        return heavy ? h : 1.0 - h;
    }

    double charged_score(std::size_t i) const {
        if (crisp()) {
            const ChargeStatus c = ctx.graph.charge_status(i);
            if (c == ChargeStatus::Unknown)
                throw Error(ErrorKind::InsufficientEvidence,
                            "charge of object " + std::to_string(i) + " unknown");
            return c == ChargeStatus::Charged ? 1.0 : 0.0;
        }
        return ctx.graph.charged_score(i);
    }

    double relation_score(std::size_t i, std::size_t j, Relation want) const {
        if (i == j) return 0.0;
        if (crisp()) {
            const Relation r = ctx.graph.relation(i, j);
            if (r == Relation::Unknown)
                throw Error(ErrorKind::InsufficientEvidence, "relation between objects " + std::to_string(i) +
                                                                 " and " + std::to_string(j) + " unknown");
            return r == want ? 1.0 : 0.0;
        }
        return ctx.graph.scores(i, j)[static_cast<std::size_t>(want)];
    }

    PropertyGraph world_graph() const {
        return crisp() ? ctx.graph : labels_from_scores(ctx.graph);
    }

    Value counterfact(const Value& in, Condition c) const {
        if (!ctx.backend) throw Error(ErrorKind::Config, "no dynamics back-end");
        ExecContext world = ctx;
        world.graph = world_graph();
        const PropertyGraph edited = with_condition(world.graph, static_cast<std::size_t>(in.object), c);
        const Trajectory traj = ctx.backend->counterfactual(world, edited);
        return event_set(observable_events(traj, {}, ctx.event_params));
    }

    Value apply(const Op& op, Value in) const {
        const std::size_t n = size();
        switch (op.code) {
            case Opcode::Objects: return object_set(std::vector<double>(n, 1.0));
            case Opcode::Events: return event_set(ctx.events);
            case Opcode::UnseenEvents: {
                if (!ctx.backend) throw Error(ErrorKind::Config, "no dynamics back-end");
                ExecContext world = ctx;
                world.graph = world_graph();
                const Trajectory fut = ctx.backend->future(world, ctx.horizon);
                return event_set(future_events(ctx.target, fut, ctx.event_params));
            }
            case Opcode::FilterColor: {
                const auto c = parse_color(op.args.at(0));
                return filter(std::move(in), [&](std::size_t i) { return ctx.roster[i].color == c ? 1.0 : 0.0; });
            }
            case Opcode::FilterShape: {
                const auto s = parse_shape(op.args.at(0));
                return filter(std::move(in), [&](std::size_t i) { return ctx.roster[i].shape == s ? 1.0 : 0.0; });
            }
            case Opcode::FilterMaterial: {
                const auto m = parse_material(op.args.at(0));
                return filter(std::move(in),
                              [&](std::size_t i) { return ctx.roster[i].material == m ? 1.0 : 0.0; });
            }
            case Opcode::FilterMass: {
                const bool heavy = op.args.at(0) == "heavy";
                return filter(std::move(in), [&](std::size_t i) { return mass_score(i, heavy); });
            }
            case Opcode::FilterCharged:
                return filter(std::move(in), [&](std::size_t i) { return charged_score(i); });
            case Opcode::FilterUncharged:
                return filter(std::move(in), [&](std::size_t i) { return 1.0 - charged_score(i); });
            case Opcode::FilterSame:
            case Opcode::FilterOpposite: {
                const Value ref = branch_object(op);
                const auto o = static_cast<std::size_t>(ref.object);
                const Relation want = op.code == Opcode::FilterSame ? Relation::Same : Relation::Opposite;
                return filter(std::move(in),
                              [&](std::size_t i) { return relation_score(i, o, want) * ref.object_score; });
            }
            case Opcode::FilterMoving:
            case Opcode::FilterStationary: {
                const int frame = op.args.empty() ? -1 : std::stoi(op.args[0]);
                const auto moving = moving_objects(ctx.target, ctx.moving_threshold, frame);
                const bool want_moving = op.code == Opcode::FilterMoving;
                return filter(std::move(in), [&](std::size_t i) {
                    if (want_moving) return moving[i] ? 1.0 : 0.0;
                    bool visible = false;
                    if (frame >= 0) {
                        const auto f = std::min(static_cast<std::size_t>(frame), ctx.target.frame_count() - 1);
                        visible = ctx.target.at(f, i).present;
                    } else {
                        for (const auto& fr : ctx.target.frames) visible = visible || fr[i].present;
                    }
                    return visible && !moving[i] ? 1.0 : 0.0;
                });
            }
            case Opcode::FilterCollision:
            case Opcode::FilterIn:
            case Opcode::FilterOut: {
                const EventKind kind = op.code == Opcode::FilterCollision ? EventKind::Collision
                                       : op.code == Opcode::FilterIn      ? EventKind::In
                                                                          : EventKind::Out;
                Value ref;
                if (!op.branch.empty()) ref = branch_object(op);
                for (std::size_t e = 0; e < in.events.size(); ++e) {
                    double& s = in.event_scores[e];
                    if (in.events[e].kind != kind) {
                        s = 0.0;
                    } else if (!op.branch.empty()) {
                        s *= in.events[e].involves(ref.object) ? ref.object_score : 0.0;
                    }
                }
                return in;
            }
            case Opcode::Unique: {
                std::size_t best = 0;
                std::size_t members = 0;
                for (std::size_t i = 0; i < in.object_scores.size(); ++i) {
                    if (in.object_scores[i] > in.object_scores[best]) best = i;
                    if (in.object_scores[i] > 0.0) ++members;
                }
                if (crisp() && members != 1)
                    throw Error(ErrorKind::NonUniqueReference,
                                "reference matches " + std::to_string(members) + " objects");
                if (in.object_scores.empty())
                    throw Error(ErrorKind::NonUniqueReference, "reference over an empty scene");
                Value v;
                v.sort = Sort::Object;
                v.object = static_cast<int>(best);
                v.object_score = in.object_scores[best];
                return v;
            }
            case Opcode::Count: {
                const auto& scores = in.sort == Sort::ObjectSet ? in.object_scores : in.event_scores;
                Value v;
                v.sort = Sort::Integer;
                for (double s : scores) v.number += s;
                return v;
            }
            case Opcode::Exist: {
                const auto& scores = in.sort == Sort::ObjectSet ? in.object_scores : in.event_scores;
                double best = 0.0;
                for (double s : scores) best = std::max(best, s);
                return boolean(best);
            }
            case Opcode::Negate: return boolean(1.0 - in.truth);
            case Opcode::QueryColor: return token(std::string(to_string(ctx.roster.at(in.object).color)));
            case Opcode::QueryShape: return token(std::string(to_string(ctx.roster.at(in.object).shape)));
            case Opcode::QueryMaterial:
                return token(std::string(to_string(ctx.roster.at(in.object).material)));
            case Opcode::QueryMass:
                return token(mass_score(static_cast<std::size_t>(in.object), true) > 0.5 ? "heavy" : "light");
            case Opcode::QueryCharged: return boolean(charged_score(static_cast<std::size_t>(in.object)));
            case Opcode::QueryChargeRelation: {
                const Value other = branch_object(op);
                const Relation want = op.args.at(0) == "same" ? Relation::Same : Relation::Opposite;
                return boolean(relation_score(static_cast<std::size_t>(in.object),
                                              static_cast<std::size_t>(other.object), want));
            }
            case Opcode::CounterfactHeavier: return counterfact(in, Condition::Heavier);
            case Opcode::CounterfactLighter: return counterfact(in, Condition::Lighter);
            case Opcode::CounterfactUncharged: return counterfact(in, Condition::Uncharged);
            case Opcode::CounterfactOpposite: return counterfact(in, Condition::OppositeCharge);
        }
        throw Error(ErrorKind::TypeMismatch, "unknown opcode");
    }

    Value run(const Program& program, Value v) const {
        for (const Op& op : program) v = apply(op, std::move(v));
        return v;
    }
};

}  // namespace

Value execute(const Program& program, const ExecContext& ctx, ExecMode mode) {
    typecheck(program);
    return Machine{ctx, mode}.run(program, Value{});
}

Value execute_from(const Program& program, Value input, const ExecContext& ctx, ExecMode mode) {
    typecheck(program, input.sort);
    return Machine{ctx, mode}.run(program, std::move(input));
}

std::string answer_token(const Value& v) {
    switch (v.sort) {
        case Sort::Boolean: return v.truth > 0.5 ? "yes" : "no";
        case Sort::Integer: return std::to_string(std::lround(v.number));
        case Sort::Token: return v.token;
        default: throw Error(ErrorKind::TypeMismatch, "value has no answer form");
    }
}

std::vector<double> evaluate_choices(const Program& question, std::span<const Program> choices,
                                     const ExecContext& ctx, ExecMode mode) {
    const Value base = execute(question, ctx, mode);
    std::vector<double> out;
    out.reserve(choices.size());
    for (const Program& c : choices) out.push_back(execute_from(c, base, ctx, mode).truth);
    return out;
}

double evaluate_choice(const Program& question, const Program& choice, const ExecContext& ctx,
                       ExecMode mode) {
    return evaluate_choices(question, std::span<const Program>(&choice, 1), ctx, mode).front();
}

}  // namespace comphy
