#pragma once

#include <string>
#include <vector>

#include "comphy/attributes.hpp"
#include "comphy/events.hpp"
#include "comphy/physics.hpp"
#include "comphy/property_graph.hpp"

namespace comphy {

inline constexpr int kReferenceCount = 4;
inline constexpr double kTargetSeconds = 5.0;
inline constexpr double kExtensionSeconds = 2.0;
inline constexpr double kReferenceSeconds = 2.0;

/// One recorded video: trajectory columns are described by `objects`.
/// Positions are recorded for every frame; `present` marks whether the object
/// is inside the camera frame.
struct Video {
    std::string id;
    std::vector<StaticAttrs> objects;
    Trajectory trajectory;
    std::vector<Event> events;  // observable kinds only: collision, in, out
    bool operator==(const Video&) const = default;
};

/// The observable record of a video set: the target's columns are the roster.
struct ObservedSet {
    std::string set_id;
    Video target;
    std::vector<Video> references;

    const std::vector<StaticAttrs>& roster() const { return target.objects; }
    bool operator==(const ObservedSet&) const = default;
};

/// Per reference video, the roster index of each of its columns.
using Alignment = std::vector<std::vector<int>>;

/// Hidden ground truth that accompanies an observed set.
struct SetTruth {
    PropertyGraph graph;  // with absolute signs
    std::vector<PhysProps> props;
    Trajectory extension;  // frames [125, 175) of the target simulation
    Alignment alignment;
    /// Exact initial states; index 0 is the target, 1.. the references.
    std::vector<std::vector<ObjectState>> initial_states;
    /// Annotated attraction/repulsion events; index 0 is the target.
    std::vector<std::vector<Event>> charge_events;
    bool operator==(const SetTruth&) const = default;
};

struct VideoSet {
    ObservedSet observed;
    SetTruth truth;
    bool operator==(const VideoSet&) const = default;
};

}  // namespace comphy
