#include <comphy/corpus.hpp>
#include <comphy/error.hpp>
#include <comphy/harness.hpp>
#include <comphy/neural.hpp>
#include <comphy/propgraph.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>

using namespace comphy;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime bound
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::uint64_t g_seed = 20261016;

// ---------------------------------------------------------------------------
// Shared corpora

const Split& question_corpus() {
    static const Split s = [] {
        GenConfig cfg;
        cfg.seed = g_seed;
        return generate_split(cfg, {}, "train", 0, 800);
    }();
    return s;
}

const Split& held_out_corpus() {
    static const Split s = [] {
        GenConfig cfg;
        cfg.seed = g_seed;
        return generate_split(cfg, {}, "test", 800, 200);
    }();
    return s;
}

std::map<std::string, const VideoSet*> sets_by_id(const Split& split) {
    std::map<std::string, const VideoSet*> out;
    for (const VideoSet& s : split.sets) out[s.observed.set_id] = &s;
    return out;
}

// ---------------------------------------------------------------------------
// 1. Physics conservation

Outcome physics_conservation() {
    Rng rng(g_seed);
    SimConfig cfg;
    double third_law = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        ObjectState a{{rng.uniform(), rng.uniform()}, {}, rng.uniform(0.03, 0.05)};
        ObjectState b{{rng.uniform(), rng.uniform()}, {}, rng.uniform(0.03, 0.05)};
        const PhysProps pa{rng.bernoulli(0.5) ? kHeavyMass : kLightMass, rng.range(-1, 1)};
        const PhysProps pb{rng.bernoulli(0.5) ? kHeavyMass : kLightMass, rng.range(-1, 1)};
        const Vec2 sum = pair_force(a, b, pa, pb, cfg) + pair_force(b, a, pb, pa, cfg);
        third_law = std::max(third_law, sum.norm());
    }

    double momentum_err = 0.0;
    int collisions = 0;
    while (collisions < 1000) {
        const double ra = rng.uniform(0.03, 0.05);
        const double rb = rng.uniform(0.03, 0.05);
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 n{std::cos(angle), std::sin(angle)};
        ObjectState a{{0.5, 0.5}, {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)}, ra};
        ObjectState b{a.position + n * (0.999 * (ra + rb)), {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)}, rb};
        const std::vector<ObjectState> states{a, b};
        const std::vector<PhysProps> props{{rng.bernoulli(0.5) ? kHeavyMass : kLightMass, 0},
                                           {rng.bernoulli(0.5) ? kHeavyMass : kLightMass, 0}};
        std::vector<std::pair<int, int>> impulses;
        const auto after = resolve_collisions(states, props, cfg, impulses);
        if (impulses.empty()) continue;
        ++collisions;
        const Vec2 p0 = momentum(states, props);
        const Vec2 p1 = momentum(after, props);
        const double scale = props[0].mass * a.velocity.norm() + props[1].mass * b.velocity.norm();
        momentum_err = std::max(momentum_err, (p1 - p0).norm() / scale);
    }

    SimConfig elastic;
    elastic.damping = 0.0;
    elastic.restitution = 1.0;
    double energy_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ObjectState> init;
        std::vector<PhysProps> props;
        while (init.size() < 5) {
            ObjectState s{{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)},
                          {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)},
                          rng.uniform(0.03, 0.05)};
            const bool clear = std::all_of(init.begin(), init.end(), [&](const ObjectState& o) {
                return (o.position - s.position).norm() > o.radius + s.radius + 0.01;
            });
            if (!clear) continue;
            init.push_back(s);
            props.push_back({rng.bernoulli(0.3) ? kHeavyMass : kLightMass, 0});
        }
        const double e0 = kinetic_energy(init, props);
        const Trajectory t = simulate(init, props, elastic, 5.0);
        const double e1 = kinetic_energy(t.frames.back(), props);
        energy_err = std::max(energy_err, std::abs(e1 - e0) / e0);
    }

    SimConfig bare;
    bare.softening_min_dist = 0.0;
    double inverse_square = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double d = rng.uniform(0.1, 0.4);
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        const ObjectState a{{0.0, 0.0}, {}, 0.01};
        const ObjectState b1{dir * d, {}, 0.01};
        const ObjectState b2{dir * (2.0 * d), {}, 0.01};
        const PhysProps pa{kLightMass, 1};
        const PhysProps pb{kLightMass, rng.bernoulli(0.5) ? 1 : -1};
        const Vec2 f1 = pair_force(a, b1, pa, pb, bare);
        const Vec2 f2 = pair_force(a, b2, pa, pb, bare);
        inverse_square = std::max(inverse_square, (f2 - f1 * 0.25).norm() / f1.norm());
    }

    const bool pass = third_law < 1e-12 && momentum_err < 1e-9 && energy_err < 1e-6 && inverse_square < 1e-12;
    return {pass, fmt("third-law %.2e, momentum %.2e, energy %.2e, F(2d)-F(d)/4 %.2e", third_law, momentum_err,
                      energy_err, inverse_square)};
}

// ---------------------------------------------------------------------------
// 2. Mass-ratio law

Outcome mass_ratio() {
    Rng rng(g_seed + 2);
    SimConfig cfg;
    int configs = 0;
    int in_range = 0;
    double lo = 1e9;
    double hi = 0.0;
    while (configs < 200) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        const Vec2 side{-dir.y, dir.x};
        const double offset = rng.uniform(-0.04, 0.04);
        ObjectState light{Vec2{0.5, 0.5} - dir * 0.25, dir * rng.uniform(0.1, 0.25), rng.uniform(0.03, 0.05)};
        ObjectState heavy{Vec2{0.5, 0.5} + dir * 0.2 + side * offset, dir * -rng.uniform(0.0, 0.1),
                          rng.uniform(0.03, 0.05)};
        const bool light_first = rng.bernoulli(0.5);
        std::vector<ObjectState> init{light, heavy};
        std::vector<PhysProps> props{{kLightMass, 0}, {kHeavyMass, 0}};
        if (!light_first) {
            std::swap(init[0], init[1]);
            std::swap(props[0], props[1]);
        }
        const SimulationRecord rec = simulate_recorded(init, props, cfg, 125);
        if (rec.contacts.size() != 1) continue;
        ++configs;
        Trajectory observed = rec.trajectory;
        for (auto& frame : observed.frames)
            for (auto& o : frame) o.velocity = {};
        const int l = light_first ? 0 : 1;
        const int h = 1 - l;
        const auto r = collision_mass_ratio(observed, l, h, rec.contacts[0].frame);
        if (!r) continue;
        lo = std::min(lo, *r);
        hi = std::max(hi, *r);
        if (*r >= 4.0 && *r <= 6.0) ++in_range;
    }
    return {configs >= 100 && in_range == configs,
            fmt("%d/%d configurations in [4, 6], ratio range [%.3f, %.3f]", in_range, configs, lo, hi)};
}

// ---------------------------------------------------------------------------
// 3. Generator structure

std::string structural_violation(const VideoSet& s, const SimConfig& sim) {
    const ObservedSet& obs = s.observed;
    const std::size_t n = obs.roster().size();
    if (n < 3 || n > 5) return "target size";
    int heavy = 0;
    int charged = 0;
    for (const PhysProps& p : s.truth.props) {
        heavy += p.mass == kHeavyMass ? 1 : 0;
        charged += p.charge != 0 ? 1 : 0;
    }
    if (heavy > 1) return "heavy count";
    if (charged != 0 && charged != 2) return "charged count";
    if (obs.references.size() != static_cast<std::size_t>(kReferenceCount)) return "reference count";
    std::set<std::size_t> covered;
    for (std::size_t r = 0; r < obs.references.size(); ++r) {
        const Video& v = obs.references[r];
        if (v.objects.size() < 2 || v.objects.size() > 3) return "reference size";
        bool interaction = !s.truth.charge_events.at(r + 1).empty();
        for (const Event& e : v.events) interaction = interaction || e.kind == EventKind::Collision;
        if (!interaction) return "reference without interaction";
        for (const StaticAttrs& a : v.objects) {
            const auto it = std::find(obs.roster().begin(), obs.roster().end(), a);
            if (it == obs.roster().end()) return "reference object outside the roster";
            covered.insert(static_cast<std::size_t>(it - obs.roster().begin()));
        }
    }
    if (covered.size() != n) return "roster coverage";
    const Trajectory full = simulate(s.truth.initial_states.at(0), s.truth.props, sim, 7.0);
    if (full.frame_count() != 175 || s.truth.extension.frame_count() != 50) return "extension length";
    for (std::size_t f = 0; f < 125; ++f)
        for (std::size_t o = 0; o < n; ++o)
            if (full.at(f, o).position != obs.target.trajectory.at(f, o).position ||
                full.at(f, o).present != obs.target.trajectory.at(f, o).present)
                return "target replay";
    for (std::size_t f = 0; f < 50; ++f)
        for (std::size_t o = 0; o < n; ++o)
            if (full.at(125 + f, o).position != s.truth.extension.at(f, o).position ||
                full.at(125 + f, o).present != s.truth.extension.at(f, o).present)
                return "extension continuation";
    return {};
}

Outcome generator_structure() {
    GenConfig cfg;
    cfg.seed = g_seed + 3;
    const Split a = generate_split(cfg, {}, "gen", 0, 500);
    std::map<std::string, int> failures;
    for (const VideoSet& s : a.sets)
        if (const std::string why = structural_violation(s, cfg.sim); !why.empty()) ++failures[why];
    const Split b = generate_split(cfg, {}, "gen", 0, 500);
    std::size_t differing = 0;
    for (std::size_t i = 0; i < a.sets.size(); ++i) {
        const std::string x = observed_line(a.sets[i].observed, {}).dump() +
                              truth_line(a.sets[i].observed.set_id, a.sets[i].truth, {}).dump();
        const std::string y = observed_line(b.sets[i].observed, {}).dump() +
                              truth_line(b.sets[i].observed.set_id, b.sets[i].truth, {}).dump();
        differing += x == y ? 0 : 1;
    }
    std::string detail = fmt("%zu sets, %zu regenerated differently", a.sets.size(), differing);
    for (const auto& [why, count] : failures) detail += fmt(", %s: %d", why.c_str(), count);
    return {failures.empty() && differing == 0 && a.sets.size() == 500, detail};
}

// ---------------------------------------------------------------------------
// 4. Question self-consistency

Outcome question_consistency() {
    const Split& split = question_corpus();
    const auto by_id = sets_by_id(split);
    std::map<std::string, ExecContext> contexts;
    std::size_t checked = 0;
    std::size_t mismatched = 0;
    std::size_t choices = 0;
    for (const Question& q : split.questions) {
        const VideoSet& set = *by_id.at(q.set_id);
        auto it = contexts.find(q.set_id);
        if (it == contexts.end()) it = contexts.emplace(q.set_id, truth_context(set)).first;
        const ExecContext& ctx = it->second;
        ++checked;
        try {
            if (q.kind == QuestionKind::Factual) {
                mismatched += answer_token(execute(q.program, ctx)) == q.answer ? 0 : 1;
            } else {
                bool ok = true;
                for (const Choice& c : q.choices) {
                    ++choices;
                    ok = ok && evaluate_choice(q.program, c.program, ctx) == (c.correct ? 1.0 : 0.0);
                }
                mismatched += ok ? 0 : 1;
            }
        } catch (const Error&) {
            ++mismatched;
        }
    }
    std::map<QuestionKind, double> share;
    for (const Question& q : split.questions) share[q.kind] += 1.0 / static_cast<double>(split.questions.size());
    const double f = share[QuestionKind::Factual];
    const double c = share[QuestionKind::Counterfactual];
    const double p = share[QuestionKind::Predictive];
    const bool balanced = std::abs(f - 0.42) <= 0.02 && std::abs(c - 0.50) <= 0.02 && std::abs(p - 0.08) <= 0.02;
    return {checked >= 5000 && mismatched == 0 && balanced,
            fmt("%zu questions (%zu choices), %zu mismatched; ratios %.3f/%.3f/%.3f", checked, choices, mismatched, f,
                c, p)};
}

// ---------------------------------------------------------------------------
// 5. Parser round trip

Outcome parser_round_trip() {
    const Split& split = question_corpus();
    std::size_t texts = 0;
    std::size_t failed = 0;
    auto check = [&](const std::string& text, const Program& program) {
        ++texts;
        try {
            if (parse(text) != program || render(program) != text) ++failed;
        } catch (const Error&) {
            ++failed;
        }
    };
    for (const Question& q : split.questions) {
        check(q.text, q.program);
        for (const Choice& c : q.choices) check(c.text, c.program);
    }
    return {failed == 0 && texts > 0, fmt("%zu texts, %zu failed parse or round trip", texts, failed)};
}

// ---------------------------------------------------------------------------
// 6. Exact inference closed loop

Outcome exact_inference() {
    GenConfig cfg;
    cfg.seed = g_seed + 6;
    std::vector<VideoSet> sets(500);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        Rng rng(derive_seed(cfg.seed, i));
        sets[i] = generate_set(rng, cfg, "inf" + std::to_string(i));
    }
    std::size_t items = 0;
    std::size_t wrong = 0;
    std::size_t errors = 0;
    for (const VideoSet& s : sets) {
        PropertyGraph g;
        const std::size_t n = s.observed.roster().size();
        try {
            g = infer_properties(s.observed);
        } catch (const Error&) {
            ++errors;
            g = PropertyGraph(n);
        }
        const PropertyGraph& truth = s.truth.graph;
        for (std::size_t i = 0; i < n; ++i) {
            const int rel[] = {static_cast<int>(i)};
            if (certify_informative(s, Need::Mass, rel)) {
                ++items;
                wrong += g.mass[i] == truth.mass[i] ? 0 : 1;
            }
            if (certify_informative(s, Need::Charge, rel)) {
                ++items;
                wrong += g.charge_status(i) == truth.charge_status(i) ? 0 : 1;
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                const int pair[] = {static_cast<int>(i), static_cast<int>(j)};
                if (!certify_informative(s, Need::Relation, pair)) continue;
                ++items;
                wrong += g.relation(i, j) == truth.relation(i, j) ? 0 : 1;
            }
        }
    }

    GenConfig small = cfg;
    small.max_objects = 4;
    std::size_t fit_sets = 0;
    std::size_t fit_wrong = 0;
    for (std::uint64_t i = 0; fit_sets < 50; ++i) {
        Rng rng(derive_seed(cfg.seed + 1, i));
        const VideoSet s = generate_set(rng, small, "fit" + std::to_string(i));
        ++fit_sets;
        const FitResult fit = fit_by_simulation(s.observed, small.sim);
        fit_wrong += same_labels(fit.graph, s.truth.graph) ? 0 : 1;
    }
    return {wrong == 0 && errors == 0 && items > 0 && fit_wrong == 0,
            fmt("%zu informative items, %zu wrong, %zu inference errors; fit %zu/%zu sets", items, wrong, errors,
                fit_sets - fit_wrong, fit_sets)};
}

// ---------------------------------------------------------------------------
// 7. Exact-mode end to end

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Outcome exact_end_to_end() {
    TempDir dir("comphy_acceptance_exact");
    GenConfig cfg;
    cfg.seed = g_seed;
    write_corpus(dir.path, cfg, {held_out_corpus()});
    RunConfig run;
    run.sets = dir.path / "test" / "sets.jsonl";
    run.gt = dir.path / "test" / "gt.jsonl";
    run.out = dir.path / "pred.jsonl";
    run.validate();
    const std::vector<Prediction> preds = answer_corpus(run);
    const std::vector<Question> gt = load_gt_questions(run.gt);
    const Report r = evaluate(read_predictions(run.out), gt);

    bool perfect = r.questions == gt.size() && !gt.empty();
    std::string detail = fmt("%zu questions:", r.questions);
    for (const auto& [kind, k] : r.kinds) {
        const bool mc = kind != "factual";
        perfect = perfect && k.correct == k.questions && k.errors == 0 && (!mc || k.options_correct == k.options);
        detail += mc ? fmt(" %s %.4f/%.4f", kind.c_str(), k.per_option(), k.accuracy())
                     : fmt(" %s %.4f", kind.c_str(), k.accuracy());
    }

    Rng rng(g_seed + 7);
    std::size_t trials = 0;
    std::size_t violations = 0;
    for (double rate : {0.02, 0.05, 0.1, 0.2, 0.3, 0.5}) {
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<Prediction> corrupted = preds;
            for (Prediction& p : corrupted) {
                if (p.kind == QuestionKind::Factual) {
                    if (rng.bernoulli(rate)) p.answer = "corrupted";
                } else {
                    for (std::size_t c = 0; c < p.choice_labels.size(); ++c)
                        if (rng.bernoulli(rate)) p.choice_labels[c] = !p.choice_labels[c];
                }
            }
            const Report cr = evaluate(corrupted, gt);
            for (const auto& [kind, k] : cr.kinds) {
                if (kind == "factual") continue;
                ++trials;
                violations += k.accuracy() <= k.per_option() ? 0 : 1;
            }
        }
    }
    detail += fmt("; per-question <= per-option on %zu/%zu perturbed reports", trials - violations, trials);
    return {perfect && violations == 0, detail};
}

// ---------------------------------------------------------------------------
// 8. Neural correctness

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

template <typename Model, typename Loss>
double gradient_check(Model& model, Loss&& loss) {
    Model grad = model.zeros_like();
    loss(model, &grad);
    auto parts = model.parts();
    auto grad_parts = grad.parts();
    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        auto params = parts[p].mlp->parameters();
        auto grads = grad_parts[p].mlp->parameters();
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double saved = *params[k];
            *params[k] = saved + eps;
            const double up = loss(model, nullptr);
            *params[k] = saved - eps;
            const double down = loss(model, nullptr);
            *params[k] = saved;
            worst = std::max(worst, relative_error((up - down) / (2 * eps), *grads[k]));
        }
    }
    return worst;
}

Vec random_vec(Rng& rng, std::size_t n, double scale) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
}

std::vector<Vec> dyn_nodes(Rng& rng, std::size_t n) {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < n; ++i) {
        Vec v = random_vec(rng, kDynInput, 0.5);
        v[0] = rng.uniform(0.1, 0.9);
        v[1] = rng.uniform(0.1, 0.9);
        v[2] = v[3] = rng.uniform(0.06, 0.1);
        v[12] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        out.push_back(v);
    }
    return out;
}

Outcome neural_correctness() {
    Rng rng(g_seed + 8);
    double grad_err = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        PpiModel pm = PpiModel::create(rng, 6);
        for (auto& part : pm.parts())
            for (double* p : part.mlp->parameters()) *p += rng.uniform(-0.1, 0.1);
        std::vector<Vec> inputs;
        for (int i = 0; i < 4; ++i) inputs.push_back(random_vec(rng, kPpiInput, 1.0));
        const std::vector<char> mask{1, 1, 1, static_cast<char>(trial == 0 ? 0 : 1)};
        PpiTargets t;
        t.mass = {0, 1, -1, 0};
        t.relation = {1, 2, 0, -1, 2, 2};
        t.ground = {{1, 0, 1}, {0, 1, 0}, {0, 0, 0}, {1, 1, 0}};
        t.mass_facts = {{1, 1}};
        t.charged_facts = {0};
        t.fact_weight = 0.5;
        grad_err = std::max(grad_err, gradient_check(pm, [&](const PpiModel& m, PpiModel* g) {
                                return ppi_loss(m, inputs, mask, t, g);
                            }));

        DynModel dm = DynModel::create(rng, 6);
        for (auto& part : dm.parts())
            for (double* p : part.mlp->parameters()) *p = rng.uniform(-0.5, 0.5);
        auto nodes = dyn_nodes(rng, 4);
        nodes[1][0] = nodes[0][0] + 0.09;
        nodes[1][1] = nodes[0][1];
        std::vector<int> z(6);
        for (int& c : z) c = rng.range(0, 2);
        std::vector<std::array<double, 4>> next;
        for (const Vec& v : nodes) next.push_back({v[0] + 0.01, v[1] - 0.01, v[2], v[3]});
        grad_err = std::max(grad_err, gradient_check(dm, [&](const DynModel& m, DynModel* g) {
                                return dyn_loss(m, nodes, z, mask, next, g);
                            }));
    }

    double equivariance = 0.0;
    bool padding_exact = true;
    const PpiModel pm = PpiModel::create(rng, 32);
    const DynModel dm = DynModel::create(rng, 32);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.range(2, 6));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);

        std::vector<Vec> inputs;
        for (std::size_t i = 0; i < n; ++i) inputs.push_back(random_vec(rng, kPpiInput, 1.0));
        std::vector<Vec> pin(n);
        for (std::size_t k = 0; k < n; ++k) pin[k] = inputs[perm[k]];
        const PpiOutput a = ppi_forward(pm, inputs, {});
        const PpiOutput b = ppi_forward(pm, pin, {});
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < 2; ++c) equivariance = std::max(equivariance, std::abs(b.mass[k][c] - a.mass[perm[k]][c]));
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = k + 1; l < n; ++l)
                for (std::size_t c = 0; c < 3; ++c)
                    equivariance = std::max(equivariance, std::abs(b.relation[edge_index(k, l, n)][c] -
                                                                   a.relation[edge_index(perm[k], perm[l], n)][c]));

        const auto nodes = dyn_nodes(rng, n);
        std::vector<int> z(edge_count(n));
        for (int& c : z) c = rng.range(0, 2);
        std::vector<Vec> pn(n);
        std::vector<int> pz(z.size());
        for (std::size_t k = 0; k < n; ++k) pn[k] = nodes[perm[k]];
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = k + 1; l < n; ++l) pz[edge_index(k, l, n)] = z[edge_index(perm[k], perm[l], n)];
        const auto da = dyn_forward(dm, nodes, z, {});
        const auto db = dyn_forward(dm, pn, pz, {});
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < 4; ++c) equivariance = std::max(equivariance, std::abs(db[k][c] - da[perm[k]][c]));

        const std::size_t extra = static_cast<std::size_t>(rng.range(1, 3));
        std::vector<Vec> padded = inputs;
        auto pnodes = nodes;
        std::vector<char> mask(n, 1);
        std::vector<int> padded_z(edge_count(n + extra), 0);
        for (std::size_t e = 0; e < extra; ++e) {
            padded.push_back(random_vec(rng, kPpiInput, 1.0));
            pnodes.push_back(dyn_nodes(rng, 1)[0]);
            mask.push_back(0);
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = k + 1; l < n; ++l) padded_z[edge_index(k, l, n + extra)] = z[edge_index(k, l, n)];
        const PpiOutput pp = ppi_forward(pm, padded, mask);
        const auto pd = dyn_forward(dm, pnodes, padded_z, mask);
        for (std::size_t k = 0; k < n; ++k) {
            padding_exact = padding_exact && pp.mass[k] == a.mass[k] && pd[k] == da[k];
            for (std::size_t l = k + 1; l < n; ++l)
                padding_exact = padding_exact && pp.relation[edge_index(k, l, n + extra)] == a.relation[edge_index(k, l, n)];
        }
    }
    return {grad_err < 1e-4 && equivariance < 1e-10 && padding_exact,
            fmt("gradient %.2e, equivariance %.2e, padding %s", grad_err, equivariance,
                padding_exact ? "exact" : "inexact")};
}

// ---------------------------------------------------------------------------
// 9. Learned-mode learning signal

Outcome learning_signal() {
    GenConfig cfg;
    cfg.seed = g_seed + 9;
    const Split train_split = generate_split(cfg, {}, "train", 0, 200);
    const Split test_split = generate_split(cfg, {}, "test", 200, 50);
    TrainConfig tc;
    tc.seed = cfg.seed;
    const TrainResult trained = train(train_split.sets, train_split.questions, tc);
    const PpiAccuracy acc = evaluate_ppi(trained.models.ppi, test_split.sets);
    const RolloutError roll = evaluate_rollout(trained.models.dyn, test_split.sets, 25, 25);
    const bool pass = acc.mass > acc.mass_majority && acc.charge > acc.charge_majority &&
                      roll.model < roll.constant_velocity;
    return {pass, fmt("mass %.4f vs majority %.4f, charge %.4f vs majority %.4f, 1 s rollout %.5f vs CV %.5f",
                      acc.mass, acc.mass_majority, acc.charge, acc.charge_majority, roll.model,
                      roll.constant_velocity)};
}

// ---------------------------------------------------------------------------
// 10. Blind baselines

Outcome blind_baselines() {
    const std::vector<Question>& train_q = question_corpus().questions;
    const std::vector<Question>& eval_q = held_out_corpus().questions;

    std::map<std::string, std::map<std::string, int>> answers;
    std::map<std::string, std::pair<int, int>> labels;  // (incorrect, correct)
    for (const Question& q : train_q) {
        if (q.kind == QuestionKind::Factual) {
            ++answers[q.family][q.answer];
        } else {
            for (const Choice& c : q.choices) (c.correct ? labels[q.family].second : labels[q.family].first)++;
        }
    }
    auto modal_answer = [&](const std::string& family) -> std::optional<std::string> {
        const auto it = answers.find(family);
        if (it == answers.end()) return std::nullopt;
        std::string best;
        int count = -1;
        for (const auto& [a, n] : it->second)
            if (n > count || (n == count && a < best)) best = a, count = n;
        return best;
    };

    const auto f1 = blind_baseline(Baseline::Frequent, train_q, eval_q, 1);
    const auto f2 = blind_baseline(Baseline::Frequent, train_q, eval_q, 2);
    std::size_t oracle_mismatch = 0;
    for (std::size_t i = 0; i < eval_q.size(); ++i) {
        const Question& q = eval_q[i];
        const Prediction& p = f1[i];
        if (q.kind == QuestionKind::Factual) {
            const auto a = modal_answer(q.family);
            oracle_mismatch += a && p.answer == *a ? 0 : 1;
        } else {
            const auto it = labels.find(q.family);
            const bool label = it != labels.end() && it->second.second > it->second.first;
            for (bool l : p.choice_labels) oracle_mismatch += l == label ? 0 : 1;
            oracle_mismatch += p.choice_labels.size() == q.choices.size() ? 0 : 1;
        }
    }

    const auto random = blind_baseline(Baseline::Random, train_q, eval_q, g_seed);
    const Report r = evaluate(random, eval_q);
    std::size_t options = 0;
    std::size_t matched = 0;
    for (const auto& [kind, k] : r.kinds) {
        if (kind == "factual") continue;
        options += k.options;
        matched += k.options_correct;
    }
    const double rate = options ? static_cast<double>(matched) / static_cast<double>(options) : 0.0;
    const bool pass = f1 == f2 && oracle_mismatch == 0 && options >= 2000 && std::abs(rate - 0.5) <= 0.05;
    return {pass, fmt("frequent %s, %zu oracle mismatches; random per-option %.4f over %zu options",
                      f1 == f2 ? "deterministic" : "nondeterministic", oracle_mismatch, rate, options)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::vector<int> only;
    app.add_option("criteria", only, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
    app.add_option("--seed", g_seed, "Base seed");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "physics conservation", 10, physics_conservation},
        {2, "mass-ratio law", 30, mass_ratio},
        {3, "generator structure", 120, generator_structure},
        {4, "question self-consistency", 120, question_consistency},
        {5, "parser round trip", 30, parser_round_trip},
        {6, "exact inference closed loop", 600, exact_inference},
        {7, "exact-mode end to end", 0, exact_end_to_end},
        {8, "neural correctness", 60, neural_correctness},
        {9, "learned-mode learning signal", 900, learning_signal},
        {10, "blind baselines", 0, blind_baselines},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::string timing = c.limit_s > 0 ? fmt("%.1f s, limit %.0f s", secs, c.limit_s) : fmt("%.1f s", secs);
        std::printf("criterion %2d %-30s %s  %s [%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
