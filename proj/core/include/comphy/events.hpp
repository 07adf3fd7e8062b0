#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comphy/physics.hpp"
#include "comphy/property_graph.hpp"

namespace comphy {

enum class EventKind { In, Out, Collision, Attraction, Repulsion };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct Event {
    EventKind kind = EventKind::Collision;
    std::vector<int> participants;  // one for In/Out, two (ascending) otherwise
    int frame = 0;
    std::string video_id;

    bool involves(int object) const;
    bool operator==(const Event&) const = default;
};

/// Thresholds shared by the detectors. `damping` is the scene's known linear
/// friction; the kinematic detector subtracts its acceleration so that only
/// pairwise interaction accelerations remain.
struct EventParams {
    double contact_eps = 0.005;
    double interaction_radius = 0.4;
    double accel_threshold = 0.05;
    int min_run = 5;
    int episode_gap = 3;
    double contact_guard = 0.05;
    double damping = 0.1;
};

enum class Polarity { Attract, Repel };

struct Interaction {
    int a = 0;
    int b = 0;
    Polarity polarity = Polarity::Attract;
    int frame = 0;
    double confidence = 0.0;
    bool operator==(const Interaction&) const = default;
};

/// In on every absent->present transition, Out on present->absent.
std::vector<Event> detect_in_out(const Trajectory& traj, std::string_view video_id = {});

/// Onset frames of contact episodes. A frame t is a contact frame for a pair
/// approaching at t-1 when the pair is within contact distance at t, or when
/// its straight-line path over (t-1, t] reaches contact distance.
std::vector<Event> detect_collisions(const Trajectory& traj, std::string_view video_id = {},
                                     const EventParams& params = {});

/// Attraction/Repulsion at the first frame a charged pair is closer than the
/// interaction radius (both present). Requires absolute signs.
std::vector<Event> annotate_charge_events(const Trajectory& traj, const PropertyGraph& props,
                                          std::string_view video_id = {},
                                          const EventParams& params = {});

/// Pairwise interactions recovered from second differences alone. Frames near
/// any contact of either object are excluded; a run of at least `min_run`
/// frames where both objects accelerate toward (away from) each other beyond
/// the threshold reports attract (repel) at the run's first frame.
std::vector<Interaction> detect_interactions_kinematic(const Trajectory& traj,
                                                       const EventParams& params = {});

/// Collisions, In and Out events merged in (frame, kind, participants) order.
std::vector<Event> observable_events(const Trajectory& traj, std::string_view video_id = {},
                                     const EventParams& params = {});

/// Finite-difference velocity at `frame` (central inside, one-sided at ends).
Vec2 estimate_velocity(const Trajectory& traj, std::size_t frame, std::size_t object);

}  // namespace comphy
