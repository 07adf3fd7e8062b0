#pragma once

#include <cstddef>
#include <vector>

#include "comphy/events.hpp"
#include "comphy/property_graph.hpp"
#include "comphy/scene.hpp"

namespace comphy {

/// Exact (color, shape, material) matching of every reference column to the
/// roster. Throws AlignmentFailure when a column has no match or two columns
/// map to the same roster object.
Alignment align_objects(const ObservedSet& set);

/// A polarity observation mapped onto roster ids; video 0 is the target.
struct ChargeEvidence {
    int a = 0;
    int b = 0;
    Relation relation = Relation::Unknown;  // same (repel) or opposite (attract)
    int video = 0;
    int frame = 0;
    bool operator==(const ChargeEvidence&) const = default;
};

/// Momentum-exchange observation: ratio = |dv_a| / |dv_b| = m_b / m_a.
struct MassEvidence {
    int a = 0;
    int b = 0;
    double ratio = 1.0;
    int video = 0;
    int frame = 0;
};

struct InferenceParams {
    EventParams events;
    double heavy_ratio = 2.5;  // ratio >= this: a light, b heavy; <= 1/this: converse
    /// Every charged pair in a set is exhibited by at least one observed
    /// interaction, so a set without any interaction has no charged objects.
    bool charges_exhibited = true;
};

std::vector<ChargeEvidence> collect_charge_evidence(const ObservedSet& set, const Alignment& align,
                                                    const InferenceParams& params = {});

std::vector<MassEvidence> collect_mass_evidence(const ObservedSet& set, const Alignment& align,
                                                const InferenceParams& params = {});

/// Mass observation from one collision episode; nullopt when the episode is
/// not clean (other contacts nearby, missing frames, no velocity change).
std::optional<double> collision_mass_ratio(const Trajectory& traj, int a, int b, int frame,
                                           const EventParams& params = {});

/// Relations from evidence: attract -> opposite, repel -> same; parity
/// propagation to fixpoint; nodes outside every charged relation become
/// chargeless once a charged pair is known (or, with `charges_exhibited`,
/// when no interaction was seen at all). Throws InconsistentEvidence.
PropertyGraph infer_charge_edges(std::size_t objects, const std::vector<ChargeEvidence>& evidence,
                                 const InferenceParams& params = {});

/// Mass labels from collision ratios under the at-most-one-heavy prior.
/// Throws InconsistentEvidence.
std::vector<MassLabel> infer_mass(std::size_t objects, const std::vector<MassEvidence>& evidence,
                                  const InferenceParams& params = {});

/// Alignment, evidence collection, and both inference passes.
PropertyGraph infer_properties(const ObservedSet& set, const InferenceParams& params = {});

struct FitResult {
    PropertyGraph graph;  // with signs
    std::vector<PhysProps> props;
    double score = 0.0;
    std::size_t evaluated = 0;
};

struct FitOptions {
    std::size_t max_objects = 6;
    unsigned threads = 0;
};

/// Brute-force property search: every assignment with at most one heavy
/// object and zero or two charged objects is re-simulated on every video of
/// the set from its first recorded frames; the minimum total squared
/// position error wins (ties: fewer charged, fewer heavy, lexicographic).
FitResult fit_by_simulation(const ObservedSet& set, const SimConfig& cfg,
                            const FitOptions& options = {});

/// Squared position error of one assignment over every video of the set.
double simulation_error(const ObservedSet& set, const Alignment& align,
                        const std::vector<PhysProps>& props, const SimConfig& cfg);

}  // namespace comphy
