#include "comphy/questions.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "comphy/error.hpp"

namespace comphy {

std::string_view to_string(QuestionKind k) {
    switch (k) {
        case QuestionKind::Factual: return "factual";
        case QuestionKind::Counterfactual: return "counterfactual";
        case QuestionKind::Predictive: return "predictive";
    }
    return "?";
}

std::optional<QuestionKind> parse_question_kind(std::string_view s) {
    for (auto k : {QuestionKind::Factual, QuestionKind::Counterfactual, QuestionKind::Predictive})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string question_family(const Program& p) {
    if (p.empty()) return "unknown";
    const Opcode last = p.back().code;
    switch (last) {
        case Opcode::QueryColor:
        case Opcode::QueryShape:
        case Opcode::QueryMaterial:
        case Opcode::QueryMass:
        case Opcode::QueryCharged: return std::string(to_string(last));
        case Opcode::QueryChargeRelation: return "charge_relation";
        case Opcode::CounterfactHeavier:
        case Opcode::CounterfactLighter:
        case Opcode::CounterfactUncharged:
        case Opcode::CounterfactOpposite: return std::string(to_string(last));
        case Opcode::UnseenEvents: return "predictive";
        case Opcode::Count:
            for (const Op& op : p)
                if (op.code == Opcode::FilterSame || op.code == Opcode::FilterOpposite) return "count_relation";
            return "count";
        case Opcode::Exist:
        case Opcode::Negate: return p.front().code == Opcode::Events ? "event_exist" : "exist";
        default: return "unknown";
    }
}

std::vector<std::string> answer_space(std::string_view family) {
    std::vector<std::string> out;
    if (family == "query_color") {
        for (auto c : kColors) out.emplace_back(to_string(c));
    } else if (family == "query_shape") {
        for (auto s : kShapes) out.emplace_back(to_string(s));
    } else if (family == "query_material") {
        for (auto m : kMaterials) out.emplace_back(to_string(m));
    } else if (family == "query_mass") {
        out = {"heavy", "light"};
    } else if (family == "count" || family == "count_relation") {
        for (int i = 0; i <= 5; ++i) out.push_back(std::to_string(i));
    } else {
        out = {"no", "yes"};
    }
    return out;
}

ExecContext truth_context(const VideoSet& set, const SimConfig& sim) {
    return make_context(set.observed, set.truth.graph, std::make_shared<ExactBackend>(sim));
}

// ---------------------------------------------------------------------------
// Descriptors

namespace {

Op filter_op(Opcode code, std::string arg = {}) {
    Op op;
    op.code = code;
    if (!arg.empty()) op.args.push_back(std::move(arg));
    return op;
}

Program with_source(Opcode source, const Program& filters) {
    Program p{filter_op(source)};
    p.insert(p.end(), filters.begin(), filters.end());
    return p;
}

// [objects, filters..., unique]
Program reference(const Program& filters) {
    Program p = with_source(Opcode::Objects, filters);
    p.push_back(filter_op(Opcode::Unique));
    return p;
}

bool uses(const Program& filters, Opcode code) {
    return std::any_of(filters.begin(), filters.end(), [&](const Op& op) { return op.code == code; });
}

Need descriptor_need(const Program& filters) {
    if (uses(filters, Opcode::FilterMass)) return Need::Mass;
    if (uses(filters, Opcode::FilterCharged) || uses(filters, Opcode::FilterUncharged)) return Need::Charge;
    return Need::None;
}

std::vector<int> all_objects(std::size_t n) {
    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
    return ids;
}

}  // namespace

std::vector<Program> unique_descriptors(const ExecContext& ctx, int object, bool with_properties) {
    const auto o = static_cast<std::size_t>(object);
    const StaticAttrs& a = ctx.roster.at(o);
    std::vector<std::optional<Op>> properties{std::nullopt};
    if (with_properties) {
        properties.push_back(filter_op(Opcode::FilterMass, std::string(to_string(ctx.graph.mass[o]))));
        properties.push_back(filter_op(ctx.graph.charge_status(o) == ChargeStatus::Charged ? Opcode::FilterCharged
                                                                                             : Opcode::FilterUncharged));
        const auto moving = moving_objects(ctx.target, ctx.moving_threshold);
        properties.push_back(filter_op(moving[o] ? Opcode::FilterMoving : Opcode::FilterStationary));
    }
    std::vector<Program> out;
    for (const auto& prop : properties)
        for (int mask = 0; mask < 8; ++mask) {
            Program f;
            if (prop) f.push_back(*prop);
            if (mask & 1) f.push_back(filter_op(Opcode::FilterColor, std::string(to_string(a.color))));
            if (mask & 2) f.push_back(filter_op(Opcode::FilterMaterial, std::string(to_string(a.material))));
            if (mask & 4) f.push_back(filter_op(Opcode::FilterShape, std::string(to_string(a.shape))));
            try {
                const Value v = execute(reference(f), ctx);
                if (v.object == object) out.push_back(std::move(f));
            } catch (const Error&) {
            }
        }
    std::stable_sort(out.begin(), out.end(),
                     [](const Program& x, const Program& y) { return x.size() < y.size(); });
    return out;
}

// ---------------------------------------------------------------------------
// Choices

namespace {

// One of the shortest static descriptors, as a reference program.
Program pick_reference(const ExecContext& ctx, int object, Rng& rng) {
    auto ds = unique_descriptors(ctx, object, false);
    if (ds.empty()) throw Error(ErrorKind::GenerationFailed, "object without unique descriptor");
    const std::size_t shortest = ds.front().size();
    std::size_t pool = 0;
    while (pool < ds.size() && ds[pool].size() <= shortest + 1) ++pool;
    return reference(ds[rng.below(pool)]);
}

bool collided(const std::vector<Event>& events, int a, int b) {
    for (const Event& e : events)
        if (e.kind == EventKind::Collision && e.involves(a) && e.involves(b)) return true;
    return false;
}

// Every pairwise collision statement, labelled by `events`.
std::vector<Choice> collision_candidates(const ExecContext& ctx, const std::vector<Event>& events, Rng& rng) {
    const int n = static_cast<int>(ctx.roster.size());
    std::vector<Program> refs;
    for (int i = 0; i < n; ++i) refs.push_back(pick_reference(ctx, i, rng));
    std::vector<Choice> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const bool swap = rng.bernoulli(0.5);
            const Program& a = refs[static_cast<std::size_t>(swap ? j : i)];
            const Program& b = refs[static_cast<std::size_t>(swap ? i : j)];
            Choice c;
            c.program = {Op{Opcode::FilterCollision, {}, a}, Op{Opcode::FilterCollision, {}, b},
                         filter_op(Opcode::Exist)};
            c.text = render(c.program);
            c.correct = collided(events, i, j);
            out.push_back(std::move(c));
        }
    return out;
}

// 3-4 choices with at least one of each label, or empty.
std::vector<Choice> select_choices(std::vector<Choice> candidates, Rng& rng) {
    std::vector<std::size_t> yes;
    std::vector<std::size_t> no;
    for (std::size_t i = 0; i < candidates.size(); ++i) (candidates[i].correct ? yes : no).push_back(i);
    if (yes.empty() || no.empty() || candidates.size() < 3) return {};
    const std::size_t k = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(rng.range(3, 4)));
    std::vector<std::size_t> chosen{yes[rng.below(yes.size())], no[rng.below(no.size())]};
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (i != chosen[0] && i != chosen[1]) rest.push_back(i);
    rng.shuffle(rest);
    for (std::size_t i = 0; chosen.size() < k; ++i) chosen.push_back(rest[i]);
    rng.shuffle(chosen);
    std::vector<Choice> out;
    for (std::size_t i : chosen) out.push_back(candidates[i]);
    return out;
}

std::vector<Event> oracle_counterfactual_events(const VideoSet& set, int object, Condition c,
                                                const SimConfig& sim, const EventParams& params) {
    const PropertyGraph edited = with_condition(set.truth.graph, static_cast<std::size_t>(object), c);
    const auto props = props_from_graph(edited);
    const Trajectory traj =
        simulate_recorded(set.truth.initial_states.at(0), props, sim,
                          static_cast<int>(set.observed.target.trajectory.frame_count()))
            .trajectory;
    return observable_events(traj, {}, params);
}

std::vector<Event> oracle_future_events(const VideoSet& set, const EventParams& params) {
    return future_events(set.observed.target.trajectory, set.truth.extension, params);
}

Opcode counterfact_opcode(Condition c) {
    switch (c) {
        case Condition::Heavier: return Opcode::CounterfactHeavier;
        case Condition::Lighter: return Opcode::CounterfactLighter;
        case Condition::Uncharged: return Opcode::CounterfactUncharged;
        case Condition::OppositeCharge: return Opcode::CounterfactOpposite;
    }
    return Opcode::CounterfactHeavier;
}

}  // namespace

std::vector<Choice> make_counterfactual_choices(const VideoSet& set, int object, Condition c, Rng& rng,
                                                const SimConfig& sim) {
    if (!counter_to_fact(set.truth.graph, static_cast<std::size_t>(object), c)) return {};
    const ExecContext ctx = truth_context(set, sim);
    const auto events = oracle_counterfactual_events(set, object, c, sim, ctx.event_params);
    return select_choices(collision_candidates(ctx, events, rng), rng);
}

std::vector<Choice> make_predictive_choices(const VideoSet& set, Rng& rng, const SimConfig& sim) {
    const ExecContext ctx = truth_context(set, sim);
    return select_choices(collision_candidates(ctx, oracle_future_events(set, ctx.event_params), rng), rng);
}

// ---------------------------------------------------------------------------
// Factual templates

namespace {

struct Draft {
    Program program;
    Need need = Need::None;
    std::vector<int> relevant;
};

struct Factory {
    const VideoSet& set;
    const ExecContext& ctx;
    Rng& rng;
    const QuestionConfig& qcfg;

    int n() const { return static_cast<int>(ctx.roster.size()); }
    int random_object() { return static_cast<int>(rng.below(static_cast<std::uint64_t>(n()))); }

    std::optional<int> charged_object() {
        std::vector<int> ids;
        for (int i = 0; i < n(); ++i)
            if (set.truth.props[static_cast<std::size_t>(i)].charge != 0) ids.push_back(i);
        if (ids.empty()) return std::nullopt;
        return ids[rng.below(ids.size())];
    }

    // A descriptor of `object` that does not mention `avoid`.
    std::optional<Program> describe(int object, bool properties, Opcode avoid) {
        auto ds = unique_descriptors(ctx, object, properties);
        std::vector<Program> ok;
        for (auto& d : ds)
            if (!uses(d, avoid) && (!properties || descriptor_need(d) != Need::None || uses(d, Opcode::FilterMoving) ||
                                    uses(d, Opcode::FilterStationary)))
                ok.push_back(std::move(d));
        if (ok.empty()) return std::nullopt;
        const std::size_t pool = std::min<std::size_t>(ok.size(), 3);
        return ok[rng.below(pool)];
    }

    std::optional<Draft> query_attribute(Opcode query, Opcode attr_filter) {
        const int o = random_object();
        const bool props = rng.bernoulli(qcfg.p_property_descriptor);
        auto d = describe(o, props, attr_filter);
        if (!d) return std::nullopt;
        Draft out;
        out.program = reference(*d);
        out.program.push_back(filter_op(query));
        out.need = descriptor_need(*d);
        if (out.need != Need::None) out.relevant = all_objects(ctx.roster.size());
        return out;
    }

    std::optional<Draft> query_property(Opcode query, Need need) {
        int o = random_object();
        if (need == Need::Charge && rng.bernoulli(0.5))
            if (auto c = charged_object()) o = *c;
        auto d = describe(o, false, Opcode::Objects);
        if (!d) return std::nullopt;
        Draft out;
        out.program = reference(*d);
        out.program.push_back(filter_op(query));
        out.need = need;
        out.relevant = {o};
        return out;
    }

    std::optional<Draft> charge_relation() {
        int a = random_object();
        int b = random_object();
        std::vector<int> charged;
        for (int i = 0; i < n(); ++i)
            if (set.truth.props[static_cast<std::size_t>(i)].charge != 0) charged.push_back(i);
        if (charged.size() == 2 && rng.bernoulli(0.6)) {
            a = charged[0];
            b = charged[1];
            if (rng.bernoulli(0.5)) std::swap(a, b);
        }
        if (a == b) return std::nullopt;
        auto da = describe(a, false, Opcode::Objects);
        auto db = describe(b, false, Opcode::Objects);
        if (!da || !db) return std::nullopt;
        Draft out;
        out.program = reference(*da);
        out.program.push_back(Op{Opcode::QueryChargeRelation, {rng.bernoulli(0.5) ? "same" : "opposite"}, reference(*db)});
        out.need = Need::Relation;
        out.relevant = {a, b};
        return out;
    }

    // property adjective (+ optional attribute) for plural descriptors
    Program plural_filters(Need& need) {
        Program f;
        switch (rng.below(6)) {
            case 0: f.push_back(filter_op(Opcode::FilterMass, "heavy")); need = Need::Mass; break;
            case 1: f.push_back(filter_op(Opcode::FilterMass, "light")); need = Need::Mass; break;
            case 2: f.push_back(filter_op(Opcode::FilterCharged)); need = Need::Charge; break;
            case 3: f.push_back(filter_op(Opcode::FilterUncharged)); need = Need::Charge; break;
            case 4: f.push_back(filter_op(Opcode::FilterMoving)); need = Need::None; break;
            default: f.push_back(filter_op(Opcode::FilterStationary)); need = Need::None; break;
        }
        const StaticAttrs& a = ctx.roster[static_cast<std::size_t>(random_object())];
        switch (rng.below(4)) {
            case 0: f.push_back(filter_op(Opcode::FilterColor, std::string(to_string(a.color)))); break;
            case 1: f.push_back(filter_op(Opcode::FilterShape, std::string(to_string(a.shape)))); break;
            default: break;
        }
        return f;
    }

    std::optional<Draft> count() {
        Draft out;
        const Program f = plural_filters(out.need);
        out.program = with_source(Opcode::Objects, f);
        out.program.push_back(filter_op(Opcode::Count));
        out.relevant = all_objects(ctx.roster.size());
        return out;
    }

    std::optional<Draft> exist() {
        Draft out;
        const Program f = plural_filters(out.need);
        out.program = with_source(Opcode::Objects, f);
        out.program.push_back(filter_op(Opcode::Exist));
        if (rng.bernoulli(0.5)) out.program.push_back(filter_op(Opcode::Negate));
        out.relevant = all_objects(ctx.roster.size());
        return out;
    }

    std::optional<Draft> count_relation() {
        int o = random_object();
        if (rng.bernoulli(0.6))
            if (auto c = charged_object()) o = *c;
        auto d = describe(o, false, Opcode::Objects);
        if (!d) return std::nullopt;
        Draft out;
        out.program = {filter_op(Opcode::Objects)};
        if (rng.bernoulli(0.3)) {
            const StaticAttrs& a = ctx.roster[static_cast<std::size_t>(random_object())];
            out.program.push_back(filter_op(Opcode::FilterShape, std::string(to_string(a.shape))));
        }
        out.program.push_back(Op{rng.bernoulli(0.5) ? Opcode::FilterSame : Opcode::FilterOpposite, {}, reference(*d)});
        out.program.push_back(filter_op(Opcode::Count));
        out.need = Need::Charge;
        out.relevant = all_objects(ctx.roster.size());
        return out;
    }

    std::optional<Draft> event_exist() {
        const auto& events = ctx.events;
        Draft out;
        out.program = {filter_op(Opcode::Events)};
        const auto kind = rng.below(3);
        if (kind == 0) {
            int a = random_object();
            int b = random_object();
            std::vector<const Event*> hits;
            for (const Event& e : events)
                if (e.kind == EventKind::Collision) hits.push_back(&e);
            if (!hits.empty() && rng.bernoulli(0.5)) {
                const Event* e = hits[rng.below(hits.size())];
                a = e->participants[0];
                b = e->participants[1];
                if (rng.bernoulli(0.5)) std::swap(a, b);
            }
            if (a == b) return std::nullopt;
            auto da = describe(a, false, Opcode::Objects);
            auto db = describe(b, false, Opcode::Objects);
            if (!da || !db) return std::nullopt;
            out.program.push_back(Op{Opcode::FilterCollision, {}, reference(*da)});
            out.program.push_back(Op{Opcode::FilterCollision, {}, reference(*db)});
        } else {
            const EventKind want = kind == 1 ? EventKind::In : EventKind::Out;
            int o = random_object();
            std::vector<int> hits;
            for (const Event& e : events)
                if (e.kind == want) hits.push_back(e.participants[0]);
            if (!hits.empty() && rng.bernoulli(0.5)) o = hits[rng.below(hits.size())];
            auto d = describe(o, false, Opcode::Objects);
            if (!d) return std::nullopt;
            out.program.push_back(Op{want == EventKind::In ? Opcode::FilterIn : Opcode::FilterOut, {}, reference(*d)});
        }
        out.program.push_back(filter_op(Opcode::Exist));
        return out;
    }

    std::vector<Draft> factual() {
        std::vector<Draft> out;
        for (int t = 0; t < qcfg.factual_per_family; ++t) {
            for (auto d : {query_attribute(Opcode::QueryColor, Opcode::FilterColor),
                           query_attribute(Opcode::QueryShape, Opcode::FilterShape),
                           query_attribute(Opcode::QueryMaterial, Opcode::FilterMaterial),
                           query_property(Opcode::QueryMass, Need::Mass),
                           query_property(Opcode::QueryCharged, Need::Charge), charge_relation(), count(),
                           exist(), count_relation(), event_exist()})
                if (d) out.push_back(std::move(*d));
        }
        return out;
    }
};

// Labels agree between the hidden-state rollout and the exact back-end.
std::vector<Choice> verified(const Program& question, std::vector<Choice> candidates, const ExecContext& ctx) {
    std::vector<Program> programs;
    for (const auto& c : candidates) programs.push_back(c.program);
    const auto truth = evaluate_choices(question, programs, ctx);
    std::vector<Choice> out;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if ((truth[i] > 0.5) == candidates[i].correct) out.push_back(std::move(candidates[i]));
    return out;
}

bool round_trips(const Program& p, const std::string& text) {
    try {
        return parse(text) == p;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

std::vector<Question> instantiate(const VideoSet& set, Rng& rng, const QuestionConfig& qcfg, const SimConfig& sim) {
    const ExecContext ctx = truth_context(set, sim);
    const int n = static_cast<int>(ctx.roster.size());
    std::vector<Question> out;
    std::set<std::string> seen;

    auto emit = [&](Question q) {
        std::string key = q.text;
        for (const auto& c : q.choices) key += "|" + c.text;
        if (!seen.insert(key).second) return;
        q.set_id = set.observed.set_id;
        q.qid = set.observed.set_id + "/q" + std::to_string(out.size());
        q.family = question_family(q.program);
        out.push_back(std::move(q));
    };

    Factory factory{set, ctx, rng, qcfg};
    for (Draft& d : factory.factual()) {
        if (!certify_informative(set, d.need, d.relevant)) continue;
        Question q;
        q.kind = QuestionKind::Factual;
        q.program = std::move(d.program);
        try {
            q.text = render(q.program);
            q.answer = answer_token(execute(q.program, ctx));
        } catch (const Error&) {
            continue;
        }
        if (!round_trips(q.program, q.text)) continue;
        emit(std::move(q));
    }

    for (int o = 0; o < n; ++o)
        for (Condition c : {Condition::Heavier, Condition::Lighter, Condition::Uncharged, Condition::OppositeCharge}) {
            if (!counter_to_fact(set.truth.graph, static_cast<std::size_t>(o), c)) continue;
            const Need need = c == Condition::Heavier || c == Condition::Lighter ? Need::Mass : Need::Charge;
            const std::vector<int> relevant{o};
            if (!certify_informative(set, need, relevant)) continue;
            Program question = pick_reference(ctx, o, rng);
            question.push_back(filter_op(counterfact_opcode(c)));
            const auto events = oracle_counterfactual_events(set, o, c, sim, ctx.event_params);
            std::vector<Choice> candidates;
            try {
                candidates = verified(question, collision_candidates(ctx, events, rng), ctx);
            } catch (const Error&) {
                continue;
            }
            for (int v = 0; v < qcfg.variants_per_condition; ++v) {
                auto choices = select_choices(candidates, rng);
                if (choices.empty()) break;
                Question q;
                q.kind = QuestionKind::Counterfactual;
                q.program = question;
                q.text = render(question);
                q.choices = std::move(choices);
                emit(std::move(q));
            }
        }

    {
        Program question{filter_op(Opcode::UnseenEvents)};
        std::vector<Choice> candidates;
        try {
            candidates = verified(question, collision_candidates(ctx, oracle_future_events(set, ctx.event_params), rng), ctx);
        } catch (const Error&) {
        }
        for (int v = 0; v < qcfg.predictive_variants && !candidates.empty(); ++v) {
            auto choices = select_choices(candidates, rng);
            if (choices.empty()) break;
            Question q;
            q.kind = QuestionKind::Predictive;
            q.program = question;
            q.text = render(question);
            q.choices = std::move(choices);
            emit(std::move(q));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Balancing

BalanceResult balance(const std::vector<Question>& pool, Rng& rng, const KindRatios& ratios) {
    BalanceResult result;
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    // Factual answers: no answer above half of its family.
    std::vector<char> keep(pool.size(), 1);
    std::map<std::string, std::map<std::string, std::size_t>> answers;
    for (const auto& q : pool)
        if (q.kind == QuestionKind::Factual) ++answers[q.family][q.answer];
    std::map<std::string, std::map<std::string, std::size_t>> allowance;
    for (const auto& [family, counts] : answers) {
        std::size_t total = 0;
        std::size_t top = 0;
        std::string top_answer;
        for (const auto& [a, c] : counts) {
            total += c;
            if (c > top) top = c, top_answer = a;
        }
        auto& allow = allowance[family];
        for (const auto& [a, c] : counts) allow[a] = c;
        if (2 * top > total) allow[top_answer] = total - top;
    }
    for (std::size_t i : order) {
        const Question& q = pool[i];
        if (q.kind != QuestionKind::Factual) continue;
        auto& left = allowance[q.family][q.answer];
        if (left == 0) keep[i] = 0;
        else --left;
    }

    std::vector<std::size_t> by_kind[3];
    for (std::size_t i : order)
        if (keep[i]) by_kind[static_cast<int>(pool[i].kind)].push_back(i);
    double wanted[3] = {ratios.factual, ratios.counterfactual, ratios.predictive};
    double share = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (by_kind[k].empty() && wanted[k] > 0.0) {
            result.warnings.push_back("no " + std::string(to_string(static_cast<QuestionKind>(k))) +
                                      " questions available; ratios renormalised");
            wanted[k] = 0.0;
        }
        share += wanted[k];
    }
    std::size_t take[3] = {0, 0, 0};
    if (share > 0.0) {
        double total = 1e300;
        for (int k = 0; k < 3; ++k)
            if (wanted[k] > 0.0) total = std::min(total, static_cast<double>(by_kind[k].size()) * share / wanted[k]);
        for (int k = 0; k < 3; ++k)
            take[k] = std::min(by_kind[k].size(), static_cast<std::size_t>(std::floor(total * wanted[k] / share)));
    }
    std::vector<char> chosen(pool.size(), 0);
    for (int k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < take[k]; ++j) chosen[by_kind[k][j]] = 1;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (chosen[i]) result.questions.push_back(pool[i]);
    return result;
}

std::vector<Constraint> extract_imagination_constraints(const Question& q) {
    if (q.kind != QuestionKind::Counterfactual || q.program.size() < 3) return {};
    const Opcode cf = q.program.back().code;
    const Program ref(q.program.begin(), q.program.end() - 1);       // [objects, D..., unique]
    const Program filters(q.program.begin(), q.program.end() - 2);  // [objects, D...]
    std::vector<Constraint> out;
    Program exists = filters;
    exists.push_back(filter_op(Opcode::Exist));
    out.push_back({exists, true});
    switch (cf) {
        case Opcode::CounterfactHeavier:
        case Opcode::CounterfactLighter: {
            Program p = filters;
            p.push_back(filter_op(Opcode::FilterMass, cf == Opcode::CounterfactHeavier ? "heavy" : "light"));
            p.push_back(filter_op(Opcode::Exist));
            out.push_back({p, false});
            break;
        }
        case Opcode::CounterfactUncharged:
        case Opcode::CounterfactOpposite: {
            Program p = ref;
            p.push_back(filter_op(Opcode::QueryCharged));
            out.push_back({p, true});
            break;
        }
        default: return {};
    }
    return out;
}

}  // namespace comphy
