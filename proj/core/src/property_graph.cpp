#include "comphy/property_graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "comphy/error.hpp"

namespace comphy {

std::string_view to_string(MassLabel m) {
    switch (m) {
        case MassLabel::Light: return "light";
        case MassLabel::Heavy: return "heavy";
        case MassLabel::Unknown: return "unknown";
    }
    return "?";
}

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::Same: return "same";
        case Relation::Opposite: return "opposite";
        case Relation::None: return "none";
        case Relation::Unknown: return "unknown";
    }
    return "?";
}

std::string_view to_string(Condition c) {
    switch (c) {
        case Condition::Heavier: return "heavier";
        case Condition::Lighter: return "lighter";
        case Condition::Uncharged: return "uncharged";
        case Condition::OppositeCharge: return "opposite_charge";
    }
    return "?";
}

std::optional<MassLabel> parse_mass_label(std::string_view s) {
    for (auto m : {MassLabel::Light, MassLabel::Heavy, MassLabel::Unknown})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view s) {
    for (auto r : {Relation::Same, Relation::Opposite, Relation::None, Relation::Unknown})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

std::optional<Condition> parse_condition(std::string_view s) {
    for (auto c : {Condition::Heavier, Condition::Lighter, Condition::Uncharged,
                   Condition::OppositeCharge})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::size_t edge_index(std::size_t i, std::size_t j, std::size_t n) {
    if (i > j) std::swap(i, j);
    // Row i starts after sum_{r<i} (n - 1 - r) entries.
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

Relation PropertyGraph::relation(std::size_t i, std::size_t j) const {
    return relations[edge_index(i, j, size())];
}

void PropertyGraph::set_relation(std::size_t i, std::size_t j, Relation r) {
    relations[edge_index(i, j, size())] = r;
}

ChargeStatus PropertyGraph::charge_status(std::size_t i) const {
    if (signs) return (*signs)[i] != 0 ? ChargeStatus::Charged : ChargeStatus::Uncharged;
    const std::size_t n = size();
    if (n < 2) return ChargeStatus::Unknown;
    bool all_none = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Relation r = relation(i, j);
        if (r == Relation::Same || r == Relation::Opposite) return ChargeStatus::Charged;
        if (r != Relation::None) all_none = false;
    }
    return all_none ? ChargeStatus::Uncharged : ChargeStatus::Unknown;
}

bool PropertyGraph::complete() const {
    return std::none_of(mass.begin(), mass.end(), [](MassLabel m) { return m == MassLabel::Unknown; }) &&
           std::none_of(relations.begin(), relations.end(),
                        [](Relation r) { return r == Relation::Unknown; });
}

double PropertyGraph::heavy_score(std::size_t i) const {
    if (has_scores()) return heavy_scores[i];
    switch (mass[i]) {
        case MassLabel::Heavy: return 1.0;
        case MassLabel::Light: return 0.0;
        case MassLabel::Unknown: return 0.5;
    }
    return 0.5;
}

RelationScores PropertyGraph::scores(std::size_t i, std::size_t j) const {
    if (!relation_scores.empty()) return relation_scores[edge_index(i, j, size())];
    switch (relation(i, j)) {
        case Relation::Same: return {1.0, 0.0, 0.0};
        case Relation::Opposite: return {0.0, 1.0, 0.0};
        case Relation::None: return {0.0, 0.0, 1.0};
        case Relation::Unknown: return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    }
    return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
}

double PropertyGraph::charged_score(std::size_t i) const {
    if (relation_scores.empty()) {
        switch (charge_status(i)) {
            case ChargeStatus::Charged: return 1.0;
            case ChargeStatus::Uncharged: return 0.0;
            case ChargeStatus::Unknown: return 0.5;
        }
    }
    double best = 0.0;
    for (std::size_t j = 0; j < size(); ++j)
        if (j != i) best = std::max(best, 1.0 - scores(i, j)[2]);
    return best;
}

PropertyGraph PropertyGraph::from_props(std::span<const PhysProps> props) {
    PropertyGraph g(props.size());
    std::vector<int> signs(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
        g.mass[i] = props[i].mass > 0.5 * (kLightMass + kHeavyMass) ? MassLabel::Heavy
                                                                    : MassLabel::Light;
        signs[i] = props[i].charge;
    }
    for (std::size_t i = 0; i < props.size(); ++i)
        for (std::size_t j = i + 1; j < props.size(); ++j) {
            const int p = props[i].charge * props[j].charge;
            g.set_relation(i, j, p > 0 ? Relation::Same : p < 0 ? Relation::Opposite : Relation::None);
        }
    g.signs = std::move(signs);
    return g;
}

namespace {

// Colours the same/opposite components; returns false on a parity conflict.
bool two_colour(const PropertyGraph& g, std::vector<int>& colour) {
    const std::size_t n = g.size();
    colour.assign(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
        if (colour[start] != 0) continue;
        bool charged = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == start) continue;
            Relation r = g.relation(start, j);
            if (r == Relation::Same || r == Relation::Opposite) charged = true;
        }
        if (!charged) continue;
        colour[start] = 1;
        std::deque<std::size_t> queue{start};
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v = 0; v < n; ++v) {
                if (v == u) continue;
                const Relation r = g.relation(u, v);
                if (r != Relation::Same && r != Relation::Opposite) continue;
                const int want = r == Relation::Same ? colour[u] : -colour[u];
                if (colour[v] == 0) {
                    colour[v] = want;
                    queue.push_back(v);
                } else if (colour[v] != want) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace

bool consistent(const PropertyGraph& g) {
    std::vector<int> colour;
    if (!two_colour(g, colour)) return false;
    if (g.signs) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if ((*g.signs)[i] != 0) continue;
            for (std::size_t j = 0; j < g.size(); ++j) {
                if (j == i) continue;
                const Relation r = g.relation(i, j);
                if (r == Relation::Same || r == Relation::Opposite) return false;
            }
        }
    }
    return true;
}

bool same_labels(const PropertyGraph& a, const PropertyGraph& b) {
    return a.mass == b.mass && a.relations == b.relations;
}

std::vector<int> charges_from_relations(const PropertyGraph& g) {
    std::vector<int> colour;
    if (!two_colour(g, colour))
        throw Error(ErrorKind::InconsistentEvidence, "relative charges admit no sign assignment");
    return colour;
}

std::vector<PhysProps> props_from_graph(const PropertyGraph& g) {
    if (!g.complete())
        throw Error(ErrorKind::InsufficientEvidence, "property graph has unknown labels");
    const std::vector<int> charges = charges_from_relations(g);
    std::vector<PhysProps> props(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        props[i].mass = g.mass[i] == MassLabel::Heavy ? kHeavyMass : kLightMass;
        props[i].charge = charges[i];
    }
    return props;
}

PropertyGraph labels_from_scores(const PropertyGraph& g) {
    PropertyGraph out = g;
    if (!g.has_scores()) return out;
    for (std::size_t i = 0; i < g.size(); ++i)
        out.mass[i] = g.heavy_scores[i] > 0.5 ? MassLabel::Heavy : MassLabel::Light;
    for (std::size_t e = 0; e < g.relations.size(); ++e) {
        const auto& s = g.relation_scores[e];
        std::size_t best = 0;
        for (std::size_t k = 1; k < 3; ++k)
            if (s[k] > s[best]) best = k;
        out.relations[e] = static_cast<Relation>(best);
    }
    return out;
}

PropertyGraph with_condition(const PropertyGraph& g, std::size_t object, Condition c) {
    PropertyGraph out = g;
    const std::size_t n = g.size();
    switch (c) {
        case Condition::Heavier:
        case Condition::Lighter: {
            const bool heavy = c == Condition::Heavier;
            out.mass[object] = heavy ? MassLabel::Heavy : MassLabel::Light;
            if (out.has_scores()) out.heavy_scores[object] = heavy ? 1.0 : 0.0;
            break;
        }
        case Condition::Uncharged:
            for (std::size_t j = 0; j < n; ++j) {
                if (j == object) continue;
                out.set_relation(object, j, Relation::None);
                if (!out.relation_scores.empty())
                    out.relation_scores[edge_index(object, j, n)] = {0.0, 0.0, 1.0};
            }
            if (out.signs) (*out.signs)[object] = 0;
            break;
        case Condition::OppositeCharge:
            for (std::size_t j = 0; j < n; ++j) {
                if (j == object) continue;
                const Relation r = g.relation(object, j);
                if (r == Relation::Same) out.set_relation(object, j, Relation::Opposite);
                if (r == Relation::Opposite) out.set_relation(object, j, Relation::Same);
                if (!out.relation_scores.empty()) {
                    auto& s = out.relation_scores[edge_index(object, j, n)];
                    std::swap(s[0], s[1]);
                }
            }
            if (out.signs) (*out.signs)[object] = -(*out.signs)[object];
            break;
    }
    return out;
}

bool counter_to_fact(const PropertyGraph& g, std::size_t object, Condition c) {
    switch (c) {
        case Condition::Heavier: return g.mass[object] == MassLabel::Light;
        case Condition::Lighter: return g.mass[object] == MassLabel::Heavy;
        case Condition::Uncharged:
        case Condition::OppositeCharge: return g.charge_status(object) == ChargeStatus::Charged;
    }
    return false;
}

}  // namespace comphy
