#include <algorithm>
#include <cmath>
#include <limits>

#include "comphy/error.hpp"
#include "comphy/neural.hpp"

namespace comphy {

namespace {

constexpr double kAccelScale = 0.2;
constexpr double kVelocityScale = 10.0;

template <std::size_t K>
std::array<double, K> softmax(const std::array<double, K>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    std::array<double, K> p{};
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += p[k] = std::exp(z[k] - mx);
    for (auto& v : p) v /= sum;
    return p;
}

Vec concat(const Vec& a, const Vec& b) {
    Vec out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void add_to(Vec& acc, const Vec& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

std::vector<NamedMlp> named(std::initializer_list<std::pair<const char*, Mlp*>> items) {
    std::vector<NamedMlp> out;
    for (auto [n, m] : items) out.push_back({n, m});
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PPI

std::vector<Vec> ppi_inputs(const Trajectory& traj) {
    const std::size_t frames = traj.frame_count();
    const std::size_t n = traj.object_count();
    std::vector<Vec> out(n, Vec(kPpiInput, 0.0));
    if (frames == 0) return out;
    const double fps = traj.fps;
    for (std::size_t o = 0; o < n; ++o) {
        auto pos = [&](std::size_t f) { return traj.at(f, o).position; };
        for (int k = 0; k < kPpiFrames; ++k) {
            const std::size_t lo = frames * static_cast<std::size_t>(k) / kPpiFrames;
            std::size_t hi = frames * static_cast<std::size_t>(k + 1) / kPpiFrames;
            if (hi <= lo) hi = lo + 1;
            double* cell = out[o].data() + k * kPpiFrameFeatures;
            int present = 0;
            double best_a = -1.0;
            for (std::size_t f = lo; f < hi && f < frames; ++f) {
                const ObjectState& s = traj.at(f, o);
                if (!s.present) continue;
                ++present;
                const std::size_t a = f == 0 ? 0 : f - 1;
                const std::size_t b = f + 1 < frames ? f + 1 : f;
                const Vec2 v = b > a ? (pos(b) - pos(a)) * (fps / static_cast<double>(b - a)) : Vec2{};
                Vec2 acc{};
                if (f > 0 && f + 1 < frames) acc = (pos(f + 1) - pos(f) * 2.0 + pos(f - 1)) * (fps * fps);
                cell[0] += s.position.x;
                cell[1] += s.position.y;
                cell[2] += 2.0 * s.radius;
                cell[3] += 2.0 * s.radius;
                cell[4] += v.x * kVelocityScale;
                cell[5] += v.y * kVelocityScale;
                if (acc.norm() > best_a) {
                    best_a = acc.norm();
                    cell[6] = acc.x * kAccelScale;
                    cell[7] = acc.y * kAccelScale;
                }
            }
            if (present > 1)
                for (int i = 0; i < 6; ++i) cell[i] /= present;
        }
    }
    return out;
}

PpiModel PpiModel::create(Rng& rng, int d) {
    PpiModel m;
    m.f_emb = Mlp::create({kPpiInput, d, d}, rng);
    m.f_rel0 = Mlp::create({2 * d, d, d}, rng);
    m.f_rel1 = Mlp::create({2 * d, d, d}, rng);
    m.f_enc0 = Mlp::create({d, d, d}, rng);
    m.f_enc1 = Mlp::create({d, d, d}, rng);
    m.f_v_pred = Mlp::create({d, d, 2}, rng);
    m.f_e_pred = Mlp::create({d, d, 3}, rng);
    m.f_ground = Mlp::create({d, kGroundConcepts}, rng);
    return m;
}

std::vector<NamedMlp> PpiModel::parts() {
    return named({{"f_emb", &f_emb},
                  {"f_rel0", &f_rel0},
                  {"f_rel1", &f_rel1},
                  {"f_enc0", &f_enc0},
                  {"f_enc1", &f_enc1},
                  {"f_v_pred", &f_v_pred},
                  {"f_e_pred", &f_e_pred},
                  {"f_ground", &f_ground}});
}

PpiModel PpiModel::zeros_like() const {
    PpiModel z = *this;
    for (auto& p : z.parts()) p.mlp->fill(0.0);
    return z;
}

namespace {

struct PpiTrace {
    std::size_t n = 0;
    std::vector<char> mask;
    std::vector<Mlp::Tape> emb, enc0, enc1, vpred, ground;
    std::vector<Vec> v0, v1, v2;
    // ordered pairs (i, j), i != j, both present
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<Mlp::Tape> rel0, rel1, epred;
    std::vector<Vec> e0, e1;
    std::vector<std::array<double, 2>> mass;
    std::vector<std::array<double, 3>> ground_logits;
    std::vector<std::array<double, 3>> pair_logits;  // per ordered pair
};

PpiTrace ppi_trace(const PpiModel& m, const std::vector<Vec>& inputs, const std::vector<char>& mask) {
    PpiTrace t;
    t.n = inputs.size();
    t.mask = mask.empty() ? std::vector<char>(t.n, 1) : mask;
    const std::size_t d = static_cast<std::size_t>(m.f_emb.out_dim());
    t.emb.resize(t.n);
    t.enc0.resize(t.n);
    t.enc1.resize(t.n);
    t.vpred.resize(t.n);
    t.ground.resize(t.n);
    t.v0.assign(t.n, Vec(d, 0.0));
    t.v1.assign(t.n, Vec(d, 0.0));
    t.v2.assign(t.n, Vec(d, 0.0));
    t.mass.assign(t.n, {0.0, 0.0});
    t.ground_logits.assign(t.n, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < t.n; ++i)
        if (t.mask[i]) t.v0[i] = m.f_emb.forward(inputs[i], t.emb[i]);
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t j = 0; j < t.n; ++j)
            if (i != j && t.mask[i] && t.mask[j]) t.pairs.emplace_back(i, j);
    const std::size_t p = t.pairs.size();
    t.rel0.resize(p);
    t.rel1.resize(p);
    t.epred.resize(p);
    t.e0.resize(p);
    t.e1.resize(p);
    t.pair_logits.resize(p);

    std::vector<Vec> agg(t.n, Vec(d, 0.0));
    for (std::size_t k = 0; k < p; ++k) {
        auto [i, j] = t.pairs[k];
        t.e0[k] = m.f_rel0.forward(concat(t.v0[i], t.v0[j]), t.rel0[k]);
        add_to(agg[i], t.e0[k]);
    }
    for (std::size_t i = 0; i < t.n; ++i)
        if (t.mask[i]) t.v1[i] = m.f_enc0.forward(agg[i], t.enc0[i]);
    agg.assign(t.n, Vec(d, 0.0));
    for (std::size_t k = 0; k < p; ++k) {
        auto [i, j] = t.pairs[k];
        t.e1[k] = m.f_rel1.forward(concat(t.v1[i], t.v1[j]), t.rel1[k]);
        add_to(agg[i], t.e1[k]);
        const Vec l = m.f_e_pred.forward(t.e1[k], t.epred[k]);
        t.pair_logits[k] = {l[0], l[1], l[2]};
    }
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        t.v2[i] = m.f_enc1.forward(agg[i], t.enc1[i]);
        const Vec l = m.f_v_pred.forward(t.v2[i], t.vpred[i]);
        t.mass[i] = {l[0], l[1]};
        const Vec g = m.f_ground.forward(t.v0[i], t.ground[i]);
        t.ground_logits[i] = {g[0], g[1], g[2]};
    }
    return t;
}

// Symmetrised unordered-pair logits.
std::vector<std::array<double, 3>> edge_logits(const PpiTrace& t) {
    std::vector<std::array<double, 3>> out(edge_count(t.n), {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        auto& e = out[edge_index(i, j, t.n)];
        for (int c = 0; c < 3; ++c) e[static_cast<std::size_t>(c)] += 0.5 * t.pair_logits[k][static_cast<std::size_t>(c)];
    }
    return out;
}

}  // namespace

PpiOutput ppi_forward(const PpiModel& m, const std::vector<Vec>& inputs, const std::vector<char>& mask) {
    const PpiTrace t = ppi_trace(m, inputs, mask);
    PpiOutput out;
    out.mass = t.mass;
    out.relation = edge_logits(t);
    return out;
}

double ppi_loss(const PpiModel& m, const std::vector<Vec>& inputs, const std::vector<char>& mask,
                const PpiTargets& targets, PpiModel* grad) {
    const PpiTrace t = ppi_trace(m, inputs, mask);
    const std::size_t n = t.n;
    const auto edges = edge_logits(t);
    std::vector<std::array<double, 2>> dmass(n, {0.0, 0.0});
    std::vector<std::array<double, 3>> dedge(edges.size(), {0.0, 0.0, 0.0});
    std::vector<std::array<double, 3>> dground(n, {0.0, 0.0, 0.0});
    double loss = 0.0;

    auto node_ce = [&](std::size_t i, int label, double w) {
        const auto p = softmax(t.mass[i]);
        loss += -w * std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
        for (std::size_t c = 0; c < 2; ++c) dmass[i][c] += w * (p[c] - (static_cast<int>(c) == label ? 1.0 : 0.0));
    };

    std::size_t labelled = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (t.mask[i] && i < targets.mass.size() && targets.mass[i] >= 0) ++labelled;
    if (labelled > 0 && targets.mass_weight > 0.0)
        for (std::size_t i = 0; i < n; ++i)
            if (t.mask[i] && i < targets.mass.size() && targets.mass[i] >= 0)
                node_ce(i, targets.mass[i], targets.mass_weight / static_cast<double>(labelled));

    std::size_t labelled_edges = 0;
    auto edge_present = [&](std::size_t i, std::size_t j) { return t.mask[i] && t.mask[j]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t e = edge_index(i, j, n);
            if (edge_present(i, j) && e < targets.relation.size() && targets.relation[e] >= 0) ++labelled_edges;
        }
    if (labelled_edges > 0 && targets.relation_weight > 0.0) {
        const double w = targets.relation_weight / static_cast<double>(labelled_edges);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::size_t e = edge_index(i, j, n);
                if (!edge_present(i, j) || e >= targets.relation.size() || targets.relation[e] < 0) continue;
                const auto p = softmax(edges[e]);
                const int label = targets.relation[e];
                loss += -w * std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
                for (std::size_t c = 0; c < 3; ++c) dedge[e][c] += w * (p[c] - (static_cast<int>(c) == label ? 1.0 : 0.0));
            }
    }

    if (!targets.ground.empty()) {
        std::size_t present = 0;
        for (std::size_t i = 0; i < n; ++i) present += t.mask[i] ? 1 : 0;
        const double w = present ? 1.0 / static_cast<double>(present * kGroundConcepts) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!t.mask[i]) continue;
            for (std::size_t c = 0; c < kGroundConcepts; ++c) {
                const double z = t.ground_logits[i][c];
                const double y = targets.ground[i][c];
                // numerically stable BCE with logits
                loss += w * (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))));
                dground[i][c] += w * (1.0 / (1.0 + std::exp(-z)) - y);
            }
        }
    }

    const std::size_t facts = targets.mass_facts.size() + targets.charged_facts.size();
    if (facts > 0 && targets.fact_weight > 0.0) {
        const double w = targets.fact_weight / static_cast<double>(facts);
        for (auto [i, heavy] : targets.mass_facts)
            if (t.mask[static_cast<std::size_t>(i)]) node_ce(static_cast<std::size_t>(i), heavy, w);
        for (int i : targets.charged_facts) {
            // most charged-looking partner: -log(1 - P(none))
            std::size_t best = edges.size();
            double best_q = -1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == static_cast<std::size_t>(i) || !edge_present(static_cast<std::size_t>(i), j)) continue;
                const std::size_t e = edge_index(static_cast<std::size_t>(i), j, n);
                const auto p = softmax(edges[e]);
                if (p[0] + p[1] > best_q) best_q = p[0] + p[1], best = e;
            }
            if (best == edges.size()) continue;
            const auto p = softmax(edges[best]);
            const double q = std::max(p[0] + p[1], 1e-300);
            loss += -w * std::log(q);
            for (std::size_t c = 0; c < 3; ++c) dedge[best][c] += w * (p[c] - (c < 2 ? p[c] / q : 0.0));
        }
    }

    if (!grad) return loss;

    const std::size_t d = static_cast<std::size_t>(m.f_emb.out_dim());
    std::vector<Vec> dv0(n, Vec(d, 0.0));
    std::vector<Vec> dv1(n, Vec(d, 0.0));
    std::vector<Vec> dv2(n, Vec(d, 0.0));
    std::vector<Vec> de1(t.pairs.size(), Vec(d, 0.0));
    std::vector<Vec> de0(t.pairs.size(), Vec(d, 0.0));

    for (std::size_t i = 0; i < n; ++i) {
        if (!t.mask[i]) continue;
        m.f_v_pred.backward(t.vpred[i], dmass[i], grad->f_v_pred, dv2[i]);
        m.f_ground.backward(t.ground[i], dground[i], grad->f_ground, dv0[i]);
    }
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        const auto& g = dedge[edge_index(i, j, n)];
        const std::array<double, 3> half{0.5 * g[0], 0.5 * g[1], 0.5 * g[2]};
        m.f_e_pred.backward(t.epred[k], half, grad->f_e_pred, de1[k]);
    }
    std::vector<Vec> ds(n, Vec(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        if (t.mask[i]) m.f_enc1.backward(t.enc1[i], dv2[i], grad->f_enc1, ds[i]);
    Vec dpair(2 * d);
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        add_to(de1[k], ds[i]);
        std::fill(dpair.begin(), dpair.end(), 0.0);
        m.f_rel1.backward(t.rel1[k], de1[k], grad->f_rel1, dpair);
        for (std::size_t c = 0; c < d; ++c) {
            dv1[i][c] += dpair[c];
            dv1[j][c] += dpair[d + c];
        }
    }
    ds.assign(n, Vec(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        if (t.mask[i]) m.f_enc0.backward(t.enc0[i], dv1[i], grad->f_enc0, ds[i]);
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        std::fill(dpair.begin(), dpair.end(), 0.0);
        m.f_rel0.backward(t.rel0[k], ds[i], grad->f_rel0, dpair);
        for (std::size_t c = 0; c < d; ++c) {
            dv0[i][c] += dpair[c];
            dv0[j][c] += dpair[d + c];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (t.mask[i]) m.f_emb.backward(t.emb[i], dv0[i], grad->f_emb);
    return loss;
}

PropertyGraph aggregate_set(std::size_t roster_size, const std::vector<PpiOutput>& per_video,
                            const Alignment& alignment) {
    constexpr double lowest = -std::numeric_limits<double>::infinity();
    std::vector<std::array<double, 2>> mass(roster_size, {lowest, lowest});
    std::vector<std::array<double, 3>> rel(edge_count(roster_size), {lowest, lowest, lowest});
    for (std::size_t v = 0; v < per_video.size(); ++v) {
        const auto& out = per_video[v];
        const std::size_t n = out.mass.size();
        auto roster_id = [&](std::size_t col) -> std::size_t {
            if (v == 0) return col;
            return static_cast<std::size_t>(alignment.at(v - 1).at(col));
        };
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t k = 0; k < 2; ++k) mass[roster_id(c)][k] = std::max(mass[roster_id(c)][k], out.mass[c][k]);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const auto& l = out.relation[edge_index(a, b, n)];
                auto& r = rel[edge_index(roster_id(a), roster_id(b), roster_size)];
                for (std::size_t k = 0; k < 3; ++k) r[k] = std::max(r[k], l[k]);
            }
    }
    PropertyGraph g(roster_size);
    g.heavy_scores.resize(roster_size);
    g.relation_scores.resize(rel.size());
    for (std::size_t i = 0; i < roster_size; ++i) {
        if (mass[i][0] == lowest) {
            g.heavy_scores[i] = 0.5;
            continue;
        }
        const auto p = softmax(mass[i]);
        g.heavy_scores[i] = p[1];
        g.mass[i] = p[1] > p[0] ? MassLabel::Heavy : MassLabel::Light;
    }
    for (std::size_t e = 0; e < rel.size(); ++e) {
        if (rel[e][0] == lowest) {
            g.relation_scores[e] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
            continue;
        }
        const auto p = softmax(rel[e]);
        g.relation_scores[e] = p;
        g.relations[e] = static_cast<Relation>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    return g;
}

PropertyGraph project_consistent(const PropertyGraph& scored) {
    const std::size_t n = scored.size();
    auto lg = [](double p) { return std::log(std::clamp(p, 1e-12, 1.0)); };
    PropertyGraph g = scored;

    double best_mass = 0.0;
    int heavy = -1;
    for (std::size_t i = 0; i < n; ++i) best_mass += lg(1.0 - scored.heavy_score(i));
    for (std::size_t h = 0; h < n; ++h) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += lg(i == h ? scored.heavy_score(i) : 1.0 - scored.heavy_score(i));
        if (s > best_mass) best_mass = s, heavy = static_cast<int>(h);
    }
    for (std::size_t i = 0; i < n; ++i)
        g.mass[i] = static_cast<int>(i) == heavy ? MassLabel::Heavy : MassLabel::Light;

    double none_total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) none_total += lg(scored.scores(i, j)[2]);
    double best = none_total;
    std::size_t ba = 0, bb = 0;
    int brel = -1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto s = scored.scores(i, j);
            for (int r = 0; r < 2; ++r) {
                const double v = none_total - lg(s[2]) + lg(s[static_cast<std::size_t>(r)]);
                if (v > best) best = v, ba = i, bb = j, brel = r;
            }
        }
    std::vector<int> signs(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g.set_relation(i, j, Relation::None);
    if (brel >= 0) {
        g.set_relation(ba, bb, static_cast<Relation>(brel));
        signs[ba] = 1;
        signs[bb] = brel == 0 ? 1 : -1;
    }
    g.signs = signs;
    return g;
}

PropertyGraph ppi_infer(const PpiModel& m, const ObservedSet& set) {
    const Alignment align = align_objects(set);
    std::vector<PpiOutput> outs;
    outs.push_back(ppi_forward(m, ppi_inputs(set.target.trajectory), {}));
    for (const auto& ref : set.references) outs.push_back(ppi_forward(m, ppi_inputs(ref.trajectory), {}));
    return project_consistent(aggregate_set(set.roster().size(), outs, align));
}

// ---------------------------------------------------------------------------
// Dynamics

Vec dyn_node_input(const std::array<const ObjectState*, 3>& w, bool heavy) {
    const ObjectState& a = *w[0];
    const ObjectState& b = *w[1];
    const ObjectState& c = *w[2];
    const double s = kDynVelocityScale;
    return {c.position.x,
            c.position.y,
            2.0 * c.radius,
            2.0 * c.radius,
            (c.position.x - b.position.x) * s,
            (c.position.y - b.position.y) * s,
            2.0 * (c.radius - b.radius) * s,
            2.0 * (c.radius - b.radius) * s,
            (b.position.x - a.position.x) * s,
            (b.position.y - a.position.y) * s,
            2.0 * (b.radius - a.radius) * s,
            2.0 * (b.radius - a.radius) * s,
            heavy ? 1.0 : 0.0};
}

Vec dyn_pair_input(const Vec& a, const Vec& b) {
    Vec x = a;
    x[0] = 0.0;
    x[1] = 0.0;
    for (std::size_t c = 0; c < b.size(); ++c) x.push_back(a[c] - b[c]);
    const Vec2 d{b[0] - a[0], b[1] - a[1]};
    const double dist = d.norm();
    const double clamped = std::max(dist, 0.05);
    const Vec2 away = dist > 0.0 ? d * (-1.0 / (clamped * clamped * dist)) : Vec2{};
    const Vec2 rel_v{a[4] - b[4], a[5] - b[5]};
    const double closing = dist > 0.0 ? (rel_v.x * d.x + rel_v.y * d.y) / dist : 0.0;
    x.push_back(0.02 * away.x);
    x.push_back(0.02 * away.y);
    x.push_back(10.0 * (dist - 0.5 * (a[2] + b[2])));
    x.push_back(5.0 * closing);
    return x;
}

DynModel DynModel::create(Rng& rng, int d) {
    DynModel m;
    m.g_node = Mlp::create({kDynInput, d, d}, rng);
    for (auto& e : m.g_emb) e = Mlp::create({kDynPairInput, d, d}, rng);
    m.g_rel0 = Mlp::create({d, d, d}, rng);
    m.g_rel1 = Mlp::create({d, d, d}, rng);
    for (auto& e : m.g_enc) e = Mlp::create({2 * d, d, d}, rng);
    m.g_pred = Mlp::create({d, 4}, rng);
    m.g_pred.fill(0.0);
    return m;
}

std::vector<NamedMlp> DynModel::parts() {
    return named({{"g_node", &g_node},
                  {"g_emb_same", &g_emb[0]},
                  {"g_emb_opposite", &g_emb[1]},
                  {"g_emb_none", &g_emb[2]},
                  {"g_rel0", &g_rel0},
                  {"g_rel1", &g_rel1},
                  {"g_enc_same", &g_enc[0]},
                  {"g_enc_opposite", &g_enc[1]},
                  {"g_enc_none", &g_enc[2]},
                  {"g_pred", &g_pred}});
}

DynModel DynModel::zeros_like() const {
    DynModel z = *this;
    for (auto& p : z.parts()) p.mlp->fill(0.0);
    return z;
}

namespace {

struct DynTrace {
    std::size_t n = 0;
    std::vector<char> mask;
    std::vector<Mlp::Tape> node, rel0, rel1, pred;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<int> type;
    std::vector<Mlp::Tape> emb, enc;
    std::vector<Vec> o0, o1, o2;
    std::vector<Vec> residual;
};

Vec relative_node(Vec node) {
    node[0] = 0.0;
    node[1] = 0.0;
    return node;
}

bool in_contact_range(const Vec& a, const Vec& b) {
    const double dist = std::hypot(b[0] - a[0], b[1] - a[1]);
    return dist - 0.5 * (a[2] + b[2]) < kDynContactGap;
}

DynTrace dyn_trace(const DynModel& m, const std::vector<Vec>& nodes, const std::vector<int>& z,
                   const std::vector<char>& mask) {
    DynTrace t;
    t.n = nodes.size();
    t.mask = mask.empty() ? std::vector<char>(t.n, 1) : mask;
    const std::size_t d = static_cast<std::size_t>(m.g_node.out_dim());
    t.node.resize(t.n);
    t.rel0.resize(t.n);
    t.rel1.resize(t.n);
    t.pred.resize(t.n);
    t.o0.assign(t.n, Vec(d, 0.0));
    t.o1.assign(t.n, Vec(d, 0.0));
    t.o2.assign(t.n, Vec(d, 0.0));
    t.residual.assign(t.n, Vec(4, 0.0));
    for (std::size_t i = 0; i < t.n; ++i)
        if (t.mask[i]) t.o0[i] = m.g_node.forward(relative_node(nodes[i]), t.node[i]);
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t j = 0; j < t.n; ++j)
            if (i != j && t.mask[i] && t.mask[j]) {
                const std::size_t e = edge_index(i, j, t.n);
                const int type = e < z.size() ? z[e] : 2;
                if (type == 2 && !in_contact_range(nodes[i], nodes[j])) continue;
                t.pairs.emplace_back(i, j);
                t.type.push_back(type);
            }
    t.emb.resize(t.pairs.size());
    t.enc.resize(t.pairs.size());
    std::vector<Vec> agg(t.n, Vec(d, 0.0));
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        add_to(agg[i], m.g_emb[static_cast<std::size_t>(t.type[k])].forward(dyn_pair_input(nodes[i], nodes[j]), t.emb[k]));
    }
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        t.o1[i] = t.o0[i];
        add_to(t.o1[i], m.g_rel0.forward(agg[i], t.rel0[i]));
    }
    agg.assign(t.n, Vec(d, 0.0));
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        add_to(agg[i], m.g_enc[static_cast<std::size_t>(t.type[k])].forward(concat(t.o1[i], t.o1[j]), t.enc[k]));
    }
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        t.o2[i] = t.o1[i];
        add_to(t.o2[i], m.g_rel1.forward(agg[i], t.rel1[i]));
        t.residual[i] = m.g_pred.forward(t.o2[i], t.pred[i]);
    }
    return t;
}

std::array<double, 4> constant_velocity(const Vec& node) {
    const double s = kDynVelocityScale;
    return {node[0] + node[4] / s, node[1] + node[5] / s, node[2] + node[6] / s, node[3] + node[7] / s};
}

}  // namespace

std::vector<std::array<double, 4>> dyn_forward(const DynModel& m, const std::vector<Vec>& nodes,
                                               const std::vector<int>& z, const std::vector<char>& mask) {
    const DynTrace t = dyn_trace(m, nodes, z, mask);
    std::vector<std::array<double, 4>> out(t.n, {0.0, 0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        const auto cv = constant_velocity(nodes[i]);
        for (std::size_t c = 0; c < 4; ++c) out[i][c] = cv[c] + t.residual[i][c] / kDynResidualScale;
    }
    return out;
}

double dyn_loss(const DynModel& m, const std::vector<Vec>& nodes, const std::vector<int>& z,
                const std::vector<char>& mask, const std::vector<std::array<double, 4>>& next, DynModel* grad) {
    const DynTrace t = dyn_trace(m, nodes, z, mask);
    std::size_t present = 0;
    for (char c : t.mask) present += c ? 1 : 0;
    if (present == 0) return 0.0;
    const double w = 1.0 / static_cast<double>(present * 4);
    double loss = 0.0;
    std::vector<Vec> dres(t.n, Vec(4, 0.0));
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        const auto cv = constant_velocity(nodes[i]);
        for (std::size_t c = 0; c < 4; ++c) {
            const double target = (next[i][c] - cv[c]) * kDynResidualScale;
            const double diff = t.residual[i][c] - target;
            loss += w * diff * diff;
            dres[i][c] = 2.0 * w * diff;
        }
    }
    if (!grad) return loss;

    const std::size_t d = static_cast<std::size_t>(m.g_node.out_dim());
    std::vector<Vec> do2(t.n, Vec(d, 0.0));
    std::vector<Vec> do1(t.n, Vec(d, 0.0));
    std::vector<Vec> dagg(t.n, Vec(d, 0.0));
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        m.g_pred.backward(t.pred[i], dres[i], grad->g_pred, do2[i]);
        m.g_rel1.backward(t.rel1[i], do2[i], grad->g_rel1, dagg[i]);
        add_to(do1[i], do2[i]);
    }
    Vec dpair(2 * d);
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        const auto ty = static_cast<std::size_t>(t.type[k]);
        std::fill(dpair.begin(), dpair.end(), 0.0);
        m.g_enc[ty].backward(t.enc[k], dagg[i], grad->g_enc[ty], dpair);
        for (std::size_t c = 0; c < d; ++c) {
            do1[i][c] += dpair[c];
            do1[j][c] += dpair[d + c];
        }
    }
    dagg.assign(t.n, Vec(d, 0.0));
    std::vector<Vec> do0(t.n, Vec(d, 0.0));
    for (std::size_t i = 0; i < t.n; ++i) {
        if (!t.mask[i]) continue;
        m.g_rel0.backward(t.rel0[i], do1[i], grad->g_rel0, dagg[i]);
        add_to(do0[i], do1[i]);
    }
    for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        auto [i, j] = t.pairs[k];
        const auto ty = static_cast<std::size_t>(t.type[k]);
        m.g_emb[ty].backward(t.emb[k], dagg[i], grad->g_emb[ty]);
    }
    for (std::size_t i = 0; i < t.n; ++i)
        if (t.mask[i]) m.g_node.backward(t.node[i], do0[i], grad->g_node);
    return loss;
}

std::vector<int> charge_types(const PropertyGraph& g) {
    std::vector<int> z(g.relations.size(), 2);
    for (std::size_t e = 0; e < z.size(); ++e)
        if (g.relations[e] == Relation::Same) z[e] = 0;
        else if (g.relations[e] == Relation::Opposite) z[e] = 1;
    return z;
}

Trajectory rollout(const DynModel& m, std::span<const std::vector<ObjectState>> init, const PropertyGraph& graph,
                   int horizon, const Rect& bounds) {
    if (horizon < 1) throw Error(ErrorKind::Config, "rollout horizon must be at least 1");
    if (init.size() != 3) throw Error(ErrorKind::Config, "rollout needs a three-frame window");
    const std::size_t n = init[0].size();
    const auto z = charge_types(graph);
    std::vector<std::vector<ObjectState>> window(init.begin(), init.end());
    Trajectory out;
    out.fps = 25.0;
    for (int step = 0; step < horizon; ++step) {
        std::vector<Vec> nodes(n);
        for (std::size_t i = 0; i < n; ++i)
            nodes[i] = dyn_node_input({&window[0][i], &window[1][i], &window[2][i]},
                                      i < graph.size() && graph.mass[i] == MassLabel::Heavy);
        const auto pred = dyn_forward(m, nodes, z, {});
        std::vector<ObjectState> frame(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (double v : pred[i])
                if (!std::isfinite(v))
                    throw Error(ErrorKind::RolloutDiverged, "non-finite prediction at step " + std::to_string(step));
            ObjectState s;
            s.position = {pred[i][0], pred[i][1]};
            s.radius = std::max(0.25 * (pred[i][2] + pred[i][3]), 1e-6);
            s.present = inside_frame(s, bounds);
            frame[i] = s;
        }
        out.frames.push_back(frame);
        window.erase(window.begin());
        window.push_back(std::move(frame));
    }
    return out;
}

Trajectory LearnedBackend::counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const {
    const std::size_t frames = ctx.target.frame_count();
    if (frames < 4) throw Error(ErrorKind::Data, "target too short for a learned rollout");
    std::vector<std::vector<ObjectState>> init(ctx.target.frames.begin(), ctx.target.frames.begin() + 3);
    Trajectory out;
    out.fps = ctx.target.fps;
    out.frames = init;
    Trajectory rest = rollout(*model_, init, graph, static_cast<int>(frames) - 3, bounds_);
    out.frames.insert(out.frames.end(), rest.frames.begin(), rest.frames.end());
    return out;
}

Trajectory LearnedBackend::future(const ExecContext& ctx, int horizon) const {
    const std::size_t frames = ctx.target.frame_count();
    if (frames < 3) throw Error(ErrorKind::Data, "target too short for a learned rollout");
    std::vector<std::vector<ObjectState>> init(ctx.target.frames.end() - 3, ctx.target.frames.end());
    Trajectory out = rollout(*model_, init, ctx.graph, horizon, bounds_);
    out.fps = ctx.target.fps;
    return out;
}

}  // namespace comphy
