#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "comphy/physics.hpp"

namespace comphy {

enum class MassLabel { Light, Heavy, Unknown };
/// Relation order matches the one-hot charge-type index used by the
/// dynamics model: 0 same, 1 opposite, 2 none.
enum class Relation { Same, Opposite, None, Unknown };
enum class ChargeStatus { Charged, Uncharged, Unknown };

/// Counter-to-fact property edits used by counterfactual questions.
enum class Condition { Heavier, Lighter, Uncharged, OppositeCharge };

std::string_view to_string(MassLabel m);
std::string_view to_string(Relation r);
std::string_view to_string(Condition c);
std::optional<MassLabel> parse_mass_label(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);
std::optional<Condition> parse_condition(std::string_view s);

/// Index of the unordered pair {i, j} (i != j) in an upper-triangular edge list.
std::size_t edge_index(std::size_t i, std::size_t j, std::size_t n);
inline std::size_t edge_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

using RelationScores = std::array<double, 3>;  // P(same), P(opposite), P(none)

/// Nodes carry mass labels, edges relative-charge relations. Optional absolute
/// signs are kept for simulation only. Soft scores are optional; when absent
/// they are derived from the crisp labels (unknown -> uniform).
struct PropertyGraph {
    std::vector<MassLabel> mass;
    std::vector<Relation> relations;
    std::optional<std::vector<int>> signs;
    std::vector<double> heavy_scores;
    std::vector<RelationScores> relation_scores;

    PropertyGraph() = default;
    explicit PropertyGraph(std::size_t n)
        : mass(n, MassLabel::Unknown), relations(edge_count(n), Relation::Unknown) {}

    std::size_t size() const { return mass.size(); }
    Relation relation(std::size_t i, std::size_t j) const;
    void set_relation(std::size_t i, std::size_t j, Relation r);

    ChargeStatus charge_status(std::size_t i) const;
    bool complete() const;
    bool has_scores() const { return !heavy_scores.empty(); }

    double heavy_score(std::size_t i) const;
    RelationScores scores(std::size_t i, std::size_t j) const;
    double charged_score(std::size_t i) const;

    bool operator==(const PropertyGraph&) const = default;

    /// Ground-truth graph (labels, relations and signs) from physical props.
    static PropertyGraph from_props(std::span<const PhysProps> props);
};

/// True when the labels satisfy the graph invariants: neutral nodes have only
/// `none` edges and the same/opposite edges admit a consistent 2-colouring.
bool consistent(const PropertyGraph& g);

/// Same relations and masses; signs and scores ignored.
bool same_labels(const PropertyGraph& a, const PropertyGraph& b);

/// Absolute charges consistent with the relations: each same/opposite
/// component is 2-coloured starting from +1 at its lowest index; nodes with
/// only `none` edges get 0. Signs stored in the graph are ignored so that any
/// two graphs with equal relations simulate identically.
std::vector<int> charges_from_relations(const PropertyGraph& g);

/// Physical props for simulation. Throws InsufficientEvidence on unknowns.
std::vector<PhysProps> props_from_graph(const PropertyGraph& g);

/// Replaces every label by the argmax of its scores.
PropertyGraph labels_from_scores(const PropertyGraph& g);

/// The graph after the counterfactual edit of `object`.
PropertyGraph with_condition(const PropertyGraph& g, std::size_t object, Condition c);

/// True when the condition contradicts the object's current labels, i.e. it
/// describes a genuinely counterfactual world.
bool counter_to_fact(const PropertyGraph& g, std::size_t object, Condition c);

}  // namespace comphy
