#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "comphy/events.hpp"
#include "comphy/physics.hpp"
#include "comphy/property_graph.hpp"
#include "comphy/rng.hpp"
#include "comphy/scene.hpp"

namespace comphy {

struct SplitCounts {
    int train = 800;
    int val = 200;
    int test = 200;
    bool operator==(const SplitCounts&) const = default;
};

struct GenConfig {
    std::uint64_t seed = 0;
    SplitCounts counts;
    SimConfig sim;
    EventParams events;
    int max_attempts = 400;
    double speed_min = 0.05;
    double speed_max = 0.2;
    int min_objects = 3;
    int max_objects = 5;
    double radius_min = 0.03;
    double radius_max = 0.05;
    double p_heavy = 0.5;
    double p_charged = 0.5;
    double p_at_rest = 0.25;
    double p_entering = 0.3;
    double p_target_collision = 0.7;
    double p_late_collision = 0.5;

    /// Throws Error(Config).
    void validate() const;
    bool operator==(const GenConfig&) const = default;
};

struct Roster {
    std::vector<StaticAttrs> attrs;
    std::vector<double> radii;
    std::vector<PhysProps> props;
    PropertyGraph graph;  // with signs
};

/// Unique attribute triples; at most one heavy object; zero or two charged
/// objects with independent random signs.
Roster sample_roster(Rng& rng, const GenConfig& cfg = {});

/// A complete video set whose references all contain an interaction and
/// cover the roster, and whose hidden properties are recoverable from the
/// observable record. Throws GenerationFailed naming the last failing
/// constraint once the attempts are exhausted.
VideoSet generate_set(Rng& rng, const GenConfig& cfg, const std::string& set_id);

/// Why a candidate set was rejected, or empty when it is acceptable.
std::string check_set(const VideoSet& set, const GenConfig& cfg);

/// Interaction evidence a question relies on.
enum class Need { None, Mass, Charge, Relation };

/// Mass: each relevant object takes part in a collision in some video.
/// Charge: a charged object takes part in an attraction/repulsion; an
/// uncharged one requires that the set's charged pair (if any) was seen
/// interacting. Relation: the pair interacts, or when either side is
/// uncharged, both charge statuses are certified.
bool certify_informative(const VideoSet& set, Need need, std::span<const int> relevant);

}  // namespace comphy
