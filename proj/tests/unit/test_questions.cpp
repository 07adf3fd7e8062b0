#include <comphy/error.hpp>
#include <comphy/events.hpp>
#include <comphy/executor.hpp>
#include <comphy/genset.hpp>
#include <comphy/questions.hpp>

#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>

using namespace comphy;

namespace {

struct Corpus {
    std::vector<VideoSet> sets;
    std::vector<std::vector<Question>> questions;
};

const Corpus& corpus() {
    static const Corpus c = [] {
        Corpus out;
        GenConfig cfg;
        Rng rng(2024);
        for (int i = 0; i < 30; ++i) {
            out.sets.push_back(generate_set(rng, cfg, "q" + std::to_string(i)));
            Rng qrng(100 + static_cast<std::uint64_t>(i));
            out.questions.push_back(instantiate(out.sets.back(), qrng));
        }
        return out;
    }();
    return c;
}

int referenced_object(const Program& ref, const ExecContext& ctx) {
    return execute(ref, ctx).object;
}

Program reference_of(const Program& p) {
    const auto unique = std::find_if(p.begin(), p.end(), [](const Op& op) { return op.code == Opcode::Unique; });
    return Program(p.begin(), unique + 1);
}

Question synthetic(int i, QuestionKind kind, std::string family, std::string answer) {
    Question q;
    q.qid = "s" + std::to_string(i);
    q.set_id = "set";
    q.kind = kind;
    q.family = std::move(family);
    q.answer = std::move(answer);
    return q;
}

std::map<QuestionKind, double> shares(const std::vector<Question>& qs) {
    std::map<QuestionKind, double> out;
    for (const Question& q : qs) out[q.kind] += 1.0 / static_cast<double>(qs.size());
    return out;
}

}  // namespace

TEST_CASE("every generated question is self-consistent on ground truth") {
    std::size_t total = 0;
    for (std::size_t s = 0; s < corpus().sets.size(); ++s) {
        const VideoSet& set = corpus().sets[s];
        const ExecContext ctx = truth_context(set);
        for (const Question& q : corpus().questions[s]) {
            INFO(q.text);
            ++total;
            CHECK(q.set_id == set.observed.set_id);
            CHECK(parse(q.text) == q.program);
            CHECK(question_family(q.program) == q.family);
            if (q.kind == QuestionKind::Factual) {
                CHECK(q.choices.empty());
                CHECK(answer_token(execute(q.program, ctx)) == q.answer);
                const auto space = answer_space(q.family);
                CHECK(std::find(space.begin(), space.end(), q.answer) != space.end());
            } else {
                CHECK(q.answer.empty());
                CHECK(q.choices.size() >= 3);
                CHECK(q.choices.size() <= 4);
                const auto n_correct = std::count_if(q.choices.begin(), q.choices.end(),
                                                     [](const Choice& c) { return c.correct; });
                CHECK(n_correct >= 1);
                CHECK(n_correct < static_cast<long>(q.choices.size()));
                for (const Choice& c : q.choices) {
                    CHECK(parse(c.text) == c.program);
                    CHECK(evaluate_choice(q.program, c.program, ctx) == (c.correct ? 1.0 : 0.0));
                }
            }
        }
    }
    CHECK(total > 200);
}

TEST_CASE("physical factual answers match the hidden properties") {
    for (std::size_t s = 0; s < corpus().sets.size(); ++s) {
        const VideoSet& set = corpus().sets[s];
        const ExecContext ctx = truth_context(set);
        for (const Question& q : corpus().questions[s]) {
            if (q.family != "query_mass" && q.family != "query_charged") continue;
            INFO(q.text);
            const auto o = static_cast<std::size_t>(referenced_object(reference_of(q.program), ctx));
            const PhysProps& p = set.truth.props[o];
            if (q.family == "query_mass") CHECK(q.answer == (p.mass == kHeavyMass ? "heavy" : "light"));
            else CHECK(q.answer == (p.charge != 0 ? "yes" : "no"));
        }
    }
}

TEST_CASE("imagination constraints hold on ground truth") {
    std::size_t checked = 0;
    for (std::size_t s = 0; s < corpus().sets.size(); ++s) {
        const ExecContext ctx = truth_context(corpus().sets[s]);
        for (const Question& q : corpus().questions[s]) {
            const auto cs = extract_imagination_constraints(q);
            if (q.kind != QuestionKind::Counterfactual) {
                CHECK(cs.empty());
                continue;
            }
            REQUIRE(cs.size() == 2);
            for (const Constraint& c : cs) {
                ++checked;
                CHECK((execute(c.program, ctx).truth == 1.0) == c.expected);
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("imagination constraints of the heavier and uncharged conditions") {
    Question q;
    q.kind = QuestionKind::Counterfactual;
    q.program = parse("What would happen if the purple object were heavier?");
    const auto cs = extract_imagination_constraints(q);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].program == parse("Are there any purple objects?"));
    CHECK(cs[0].expected);
    CHECK(render(cs[0].program) == "Are there any purple objects?");
    CHECK(cs[1].program == Program{Op{Opcode::Objects, {}, {}}, Op{Opcode::FilterColor, {"purple"}, {}},
                                   Op{Opcode::FilterMass, {"heavy"}, {}}, Op{Opcode::Exist, {}, {}}});
    CHECK_FALSE(cs[1].expected);

    q.program = parse("What would happen if the cyan object were uncharged?");
    const auto uc = extract_imagination_constraints(q);
    REQUIRE(uc.size() == 2);
    CHECK(uc[1].program == parse("Is the cyan object charged?"));
    CHECK(uc[1].expected);

    q.kind = QuestionKind::Factual;
    q.program = parse("Is the cyan object charged?");
    CHECK(extract_imagination_constraints(q).empty());
}

TEST_CASE("uncharged counterfactuals remove the object's charge events") {
    std::size_t checked = 0;
    for (std::size_t s = 0; s < corpus().sets.size(); ++s) {
        const VideoSet& set = corpus().sets[s];
        const ExecContext ctx = truth_context(set);
        const OracleBackend oracle(set.truth.initial_states[0], set.truth.extension);
        for (const Question& q : corpus().questions[s]) {
            if (q.family != "counterfact_uncharged") continue;
            const int o = referenced_object(reference_of(q.program), ctx);
            const PropertyGraph edited = with_condition(set.truth.graph, static_cast<std::size_t>(o),
                                                        Condition::Uncharged);
            const Trajectory cf = oracle.counterfactual(ctx, edited);
            for (const Event& e : annotate_charge_events(cf, edited)) CHECK_FALSE(e.involves(o));
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("counter-to-fact rule") {
    const VideoSet& set = corpus().sets[0];
    for (std::size_t i = 0; i < set.truth.props.size(); ++i) {
        Rng rng(1);
        const int o = static_cast<int>(i);
        if (set.truth.props[i].mass == kHeavyMass) CHECK(make_counterfactual_choices(set, o, Condition::Heavier, rng).empty());
        else CHECK(make_counterfactual_choices(set, o, Condition::Lighter, rng).empty());
        if (set.truth.props[i].charge == 0) {
            CHECK(make_counterfactual_choices(set, o, Condition::Uncharged, rng).empty());
            CHECK(make_counterfactual_choices(set, o, Condition::OppositeCharge, rng).empty());
        }
    }
}

TEST_CASE("predictive labels follow a fresh seven second simulation") {
    std::size_t checked = 0;
    for (std::size_t s = 0; s < corpus().sets.size(); ++s) {
        const VideoSet& set = corpus().sets[s];
        const ExecContext ctx = truth_context(set);
        const Trajectory full = simulate(set.truth.initial_states[0], set.truth.props, SimConfig{}, 7.0);
        std::vector<Event> late;
        for (const Event& e : detect_collisions(full))
            if (e.frame >= 125) late.push_back(e);
        Rng rng(9);
        for (const Choice& c : make_predictive_choices(set, rng)) {
            const int a = referenced_object(c.program[0].branch, ctx);
            const int b = referenced_object(c.program[1].branch, ctx);
            const bool occurs = std::any_of(late.begin(), late.end(),
                                            [&](const Event& e) { return e.involves(a) && e.involves(b); });
            CHECK(c.correct == occurs);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("instantiate is deterministic under its seed") {
    const VideoSet& set = corpus().sets[3];
    Rng a(77);
    Rng b(77);
    CHECK(instantiate(set, a) == instantiate(set, b));
}

TEST_CASE("balance hits the kind ratios") {
    std::vector<Question> pool;
    const char* answers[] = {"red", "blue", "green", "cyan", "gray"};
    for (int i = 0; i < 2000; ++i) {
        if (i % 10 < 5) pool.push_back(synthetic(i, QuestionKind::Factual, "query_color", answers[i % 5]));
        else if (i % 10 < 9) pool.push_back(synthetic(i, QuestionKind::Counterfactual, "counterfact_heavier", ""));
        else pool.push_back(synthetic(i, QuestionKind::Predictive, "predictive", ""));
    }
    Rng rng(3);
    const BalanceResult r = balance(pool, rng);
    CHECK(r.warnings.empty());
    const auto sh = shares(r.questions);
    CHECK(std::abs(sh.at(QuestionKind::Factual) - 0.42) <= 0.02);
    CHECK(std::abs(sh.at(QuestionKind::Counterfactual) - 0.50) <= 0.02);
    CHECK(std::abs(sh.at(QuestionKind::Predictive) - 0.08) <= 0.02);

    Rng again(3);
    CHECK(balance(pool, again).questions == r.questions);
}

TEST_CASE("balance caps a dominant factual answer") {
    std::vector<Question> pool;
    for (int i = 0; i < 400; ++i)
        pool.push_back(synthetic(i, QuestionKind::Factual, "count", i % 5 == 0 ? "1" : "2"));
    for (int i = 400; i < 1000; ++i) pool.push_back(synthetic(i, QuestionKind::Counterfactual, "counterfact_lighter", ""));
    for (int i = 1000; i < 1100; ++i) pool.push_back(synthetic(i, QuestionKind::Predictive, "predictive", ""));
    Rng rng(4);
    const BalanceResult r = balance(pool, rng);
    std::map<std::string, int> counts;
    int factual = 0;
    for (const Question& q : r.questions)
        if (q.kind == QuestionKind::Factual) {
            ++counts[q.answer];
            ++factual;
        }
    REQUIRE(factual > 0);
    for (const auto& [answer, n] : counts) CHECK(2 * n <= factual);
    for (std::size_t i = 1; i < r.questions.size(); ++i)
        CHECK(std::stoi(r.questions[i - 1].qid.substr(1)) < std::stoi(r.questions[i].qid.substr(1)));
}

TEST_CASE("balance of a factual-only pool warns") {
    std::vector<Question> pool;
    const char* answers[] = {"cube", "sphere", "cylinder"};
    for (int i = 0; i < 60; ++i) pool.push_back(synthetic(i, QuestionKind::Factual, "query_shape", answers[i % 3]));
    Rng rng(5);
    const BalanceResult r = balance(pool, rng);
    CHECK_FALSE(r.warnings.empty());
    CHECK(r.questions.size() == pool.size());
    for (const Question& q : r.questions) CHECK(q.kind == QuestionKind::Factual);
}

TEST_CASE("unique descriptors resolve to their object") {
    for (std::size_t s = 0; s < 10; ++s) {
        const ExecContext ctx = truth_context(corpus().sets[s]);
        for (int o = 0; o < static_cast<int>(ctx.roster.size()); ++o) {
            const auto ds = unique_descriptors(ctx, o, true);
            REQUIRE_FALSE(ds.empty());
            for (std::size_t k = 1; k < ds.size(); ++k) CHECK(ds[k - 1].size() <= ds[k].size());
            for (const Program& d : ds) {
                Program ref{Op{Opcode::Objects, {}, {}}};
                ref.insert(ref.end(), d.begin(), d.end());
                ref.push_back(Op{Opcode::Unique, {}, {}});
                CHECK(execute(ref, ctx).object == o);
            }
        }
    }
}
